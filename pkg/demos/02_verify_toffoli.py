"""Verify the bundled 92-pulse Toffoli and the single-qubit gate sequences.

Also shows how the as-printed table (one misprinted entry) compares with
the corrected file, and how the result depends on which qubit is the target.
"""

from eoqubit import pulse_sequence as ps
from eoqubit.eo_model import default_model, toffoli_target


def main():
    model = default_model()
    seq = ps.load_bundled("toffoli_jk_92")
    print("pulses, steps:", ps.count_pulses(seq))
    for name, start, stop, qubits in ps.TOFFOLI_SECTIONS:
        print(f"  {name}: steps {start}-{stop}, qubits {qubits}, "
              f"{ps.count_pulses(seq.section(name))[0]} pulses")
    for controls, target in (("AB", "C"), ("AC", "B"), ("BC", "A")):
        rep = ps.verify_sequence(seq, toffoli_target(model, controls, target), model)
        print(f"controls {controls} target {target}: 1-F = {rep.infidelity_d24:.3e}, "
              f"leakage {rep.leakage:.1e}")
    printed = ps.verify_sequence(ps.load_bundled("toffoli_jk_92_as_printed"), "toffoli", model)
    print(f"as-printed table: 1-F = {printed.infidelity_d24:.3e}")
    for kind, name in (("T", "t-gate"), ("H", "h-gate")):
        for q in "ABC":
            rep = ps.verify_sequence(ps.build_table1_gate(kind, q), f"{name}:{q}", model)
            print(f"{kind} on {q}: 1-F = {rep.infidelity_d24:.1e}")


if __name__ == "__main__":
    main()
