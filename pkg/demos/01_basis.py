"""Build the 90-state reduced basis of three exchange-only qubits.

Prints the sector sizes, checks orthonormality and shows a few states with
their quantum numbers and largest product-basis amplitudes.
"""

import numpy as np

from eoqubit import angular_momentum as am


def show_state(state, top=4):
    vec = state.vector()
    order = np.argsort(-np.abs(vec))[:top]
    kets = ", ".join(f"{vec[i]:+.4f}|{i:09b}>" for i in order)
    print(f"  {state.name} {state.label}  {kets} ...")


def main():
    basis = am.basis_matrix()
    print(f"basis matrix {basis.shape}, orthonormality error "
          f"{np.abs(basis.T @ basis - np.eye(90)).max():.1e}")
    print("sector sizes (S_tot, S_AB, S_C):")
    for sector, n in zip(am.SECTORS, am.sector_counts()):
        print(f"  {tuple(str(x) for x in sector)}: {n}")
    states = am.build_three_qubit_basis()
    print("label order: (S_tot, S_z, S_AB, S_A, S_B, S_C, S_A12, S_B12, S_C12)")
    for name in ("001", "011", "038", "090"):
        show_state(states[int(name) - 1])


if __name__ == "__main__":
    main()
