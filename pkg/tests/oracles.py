"""Independent reference computations used only by the tests.

Nothing here imports the package's construction code: spin operators are
built from Pauli matrices, permutations by bit manipulation, Clebsch-Gordan
coefficients come from sympy and matrix exponentials from scipy.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.linalg
from sympy import Rational, nsimplify
from sympy.physics.quantum.cg import CG

N = 9
UP, DOWN = 0, 1

SX = np.array([[0, 1], [1, 0]]) / 2
SY = np.array([[0, -1j], [1j, 0]]) / 2
SZ = np.array([[1, 0], [0, -1]]) / 2


def _bit(spin: int) -> int:
    # bit (spin - 1) of a product-state index is computational spin ``spin``
    return 1 << (spin - 1)


def single_spin_op(op: np.ndarray, spin: int, n: int = N) -> np.ndarray:
    """``op`` on one spin, identity elsewhere, in the bitmask product basis."""
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    b = _bit(spin)
    for idx in range(dim):
        s = (idx >> (spin - 1)) & 1
        for t in (0, 1):
            amp = op[t, s]
            if amp != 0:
                out[(idx & ~b) | (t << (spin - 1)), idx] += amp
    return out


@lru_cache(maxsize=None)
def spin_vector(spin: int, n: int = N):
    return tuple(single_spin_op(op, spin, n) for op in (SX, SY, SZ))


def total_spin_squared(spins, n: int = N) -> np.ndarray:
    comps = [sum(spin_vector(s, n)[a] for s in spins) for a in range(3)]
    return sum(c @ c for c in comps).real


def permutation_operator(i: int, j: int, n: int = N) -> np.ndarray:
    """Operator exchanging computational spins ``i`` and ``j`` (2^n x 2^n)."""
    dim = 1 << n
    out = np.zeros((dim, dim))
    for idx in range(dim):
        bi, bj = (idx >> (i - 1)) & 1, (idx >> (j - 1)) & 1
        new = idx
        if bi != bj:
            new ^= _bit(i) | _bit(j)
        out[new, idx] = 1.0
    return out


def block_permutation_operator(mapping: dict[int, int], n: int = N) -> np.ndarray:
    """Operator moving the state of spin ``s`` to spin ``mapping[s]``."""
    dim = 1 << n
    out = np.zeros((dim, dim))
    for idx in range(dim):
        new = 0
        for s in range(1, n + 1):
            if (idx >> (s - 1)) & 1:
                new |= _bit(mapping.get(s, s))
        out[new, idx] = 1.0
    return out


def exchange_generator_oracle(basis: np.ndarray, l: int) -> np.ndarray:
    """``S_l . S_{l+1} - 1/4`` projected onto the columns of ``basis``."""
    sl, sr = spin_vector(l), spin_vector(l + 1)
    dot = sum(a @ b for a, b in zip(sl, sr)).real
    H = dot - 0.25 * np.eye(1 << N)
    return basis.T @ H @ basis


def expm_hermitian(H: np.ndarray, t: float = 1.0) -> np.ndarray:
    return scipy.linalg.expm(-1j * t * H)


def cg_sympy(j1, m1, j2, m2, J, M) -> float:
    r = lambda x: nsimplify(x, rational=True) if not isinstance(x, Rational) else x
    return float(CG(r(j1), r(m1), r(j2), r(m2), r(J), r(M)).doit())


def natural_ket(config: str, qubit: int = 0) -> np.ndarray:
    """Product state of one qubit from a printed ket such as ``"udu"``.

    Printed kets list particles 1, 2, 3 of a qubit; particles 1 and 2 form the
    inner pair, which sits on computational spins 3q+2 and 3q+3, and particle
    3 is the outer spin 3q+1.
    """
    comp = (3 * qubit + 2, 3 * qubit + 3, 3 * qubit + 1)
    idx = 0
    for spin, c in zip(comp, config):
        if c == "d":
            idx |= _bit(spin)
    v = np.zeros(1 << N)
    v[idx] = 1.0
    return v


#: Printed single-qubit states |1>..|8> as (coefficient, ket) lists.
S6, S3, S2 = np.sqrt(6), np.sqrt(3), np.sqrt(2)
PRINTED_SINGLE_QUBIT = {
    1: [(1 / S2, "udu"), (-1 / S2, "duu")],
    2: [(1 / S2, "udd"), (-1 / S2, "dud")],
    3: [(np.sqrt(2 / 3), "uud"), (-1 / S6, "udu"), (-1 / S6, "duu")],
    4: [(1 / S6, "udd"), (1 / S6, "dud"), (-np.sqrt(2 / 3), "ddu")],
    5: [(1.0, "uuu")],
    6: [(1 / S3, "uud"), (1 / S3, "udu"), (1 / S3, "duu")],
    7: [(1 / S3, "udd"), (1 / S3, "dud"), (1 / S3, "ddu")],
    8: [(1.0, "ddd")],
}


def printed_single_qubit(k: int, qubit: int = 0) -> np.ndarray:
    return sum(c * natural_ket(ket, qubit) for c, ket in PRINTED_SINGLE_QUBIT[k])


def combine(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Tensor product of two states living on disjoint spins."""
    out = np.zeros_like(u)
    for i in np.flatnonzero(u):
        for j in np.flatnonzero(v):
            out[i | j] += u[i] * v[j]
    return out


def _coefficient(term) -> float:
    return term["sign"] * np.sqrt(term["num"] / term["den"])


def printed_two_qubit(entry) -> np.ndarray:
    return sum(_coefficient(t) * combine(printed_single_qubit(int(t["left"]), 0),
                                         printed_single_qubit(int(t["right"]), 1))
               for t in entry["terms"])


def printed_three_qubit(entry, table) -> np.ndarray:
    return sum(_coefficient(t) * combine(printed_two_qubit(table[t["left"]]),
                                         printed_single_qubit(int(t["right"]), 2))
               for t in entry["terms"])
