"""Sequential angular-momentum coupling for chains of spin-1/2 particles.

Everything here is built on a product basis of ``n`` spins in *computational*
(left-to-right) order.  Bit ``i`` of a product-basis index is spin ``i + 1``;
a clear bit is spin up, a set bit is spin down.

Coupled states are assembled bottom-up from the coupling tree of an
exchange-only qubit: inside each qubit the pair of computational spins
``(2, 3)`` is coupled first and the result is coupled with spin ``1``.  Two
qubits couple as ``A x B``, and the three-qubit register as ``(A x B) x C``.

Clebsch-Gordan coefficients follow Condon-Shortley, with the larger of the
two angular momenta taken as the first argument.  This reproduces every
published sign of the 90-state three-qubit basis, which matters because the
phase-sensitive figures of merit depend on the sign of each basis vector.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from math import factorial, sqrt
from typing import Mapping, Union

import numpy as np

Spin = Union[int, float, Fraction, str]

HALF = Fraction(1, 2)
N_SPINS = 9

#: Natural (coupling-order) label of each computational spin 1..9.
NATURAL_ORDER = (3, 1, 2, 6, 4, 5, 9, 7, 8)

#: Row order of the classification of the 90 states: (S_tot, S_AB, S_C).
SECTORS = (
    (HALF, 0, HALF),
    (HALF, 1, HALF),
    (HALF, 1, 3 * HALF),
    (HALF, 2, 3 * HALF),
    (3 * HALF, 1, HALF),
    (3 * HALF, 2, HALF),
    (3 * HALF, 0, 3 * HALF),
    (3 * HALF, 1, 3 * HALF),
    (3 * HALF, 2, 3 * HALF),
    (3 * HALF, 3, 3 * HALF),
)
SECTOR_SIZES = (10, 18, 9, 5, 18, 10, 5, 9, 5, 1)


def as_half_integer(x: Spin) -> Fraction:
    """Convert ``x`` to an exact half-integer, rejecting anything else."""
    try:
        value = Fraction(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a number: {x!r}") from exc
    if (2 * value).denominator != 1:
        raise ValueError(f"{x!r} is not a half-integer")
    return value


def _is_int(x: Fraction) -> bool:
    return x.denominator == 1


def _fact(x: Fraction) -> int:
    return factorial(int(x))


def cg_exact(j1: Spin, m1: Spin, j2: Spin, m2: Spin, J: Spin, M: Spin) -> tuple[int, Fraction]:
    """Condon-Shortley Clebsch-Gordan coefficient as ``(sign, square)``.

    The coefficient equals ``sign * sqrt(square)`` with ``square`` an exact
    rational (Racah's closed form).  Returns ``(0, 0)`` whenever a selection
    rule kills the coefficient.
    """
    j1, m1, j2, m2, J, M = (as_half_integer(v) for v in (j1, m1, j2, m2, J, M))
    for j in (j1, j2, J):
        if j < 0:
            raise ValueError(f"negative angular momentum {j}")
    for j, m in ((j1, m1), (j2, m2), (J, M)):
        if not _is_int(j - m):
            raise ValueError(f"projection {m} incompatible with j = {j}")
    if m1 + m2 != M or abs(m1) > j1 or abs(m2) > j2 or abs(M) > J:
        return 0, Fraction(0)
    if not (abs(j1 - j2) <= J <= j1 + j2) or not _is_int(j1 + j2 + J):
        return 0, Fraction(0)

    pref = Fraction(
        (2 * J + 1).numerator
        * _fact(J + j1 - j2) * _fact(J - j1 + j2) * _fact(j1 + j2 - J)
        * _fact(J + M) * _fact(J - M)
        * _fact(j1 - m1) * _fact(j1 + m1) * _fact(j2 - m2) * _fact(j2 + m2),
        _fact(j1 + j2 + J + 1),
    )
    kmin = int(max(0, j2 - J - m1, j1 - J + m2))
    kmax = int(min(j1 + j2 - J, j1 - m1, j2 + m2))
    total = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (factorial(k) * _fact(j1 + j2 - J - k) * _fact(j1 - m1 - k)
               * _fact(j2 + m2 - k) * _fact(J - j2 + m1 + k) * _fact(J - j1 - m2 + k))
        total += Fraction((-1) ** k, den)
    if total == 0:
        return 0, Fraction(0)
    return (1 if total > 0 else -1), pref * total * total


def cg_coefficient(j1: Spin, m1: Spin, j2: Spin, m2: Spin, J: Spin, M: Spin) -> float:
    """Condon-Shortley Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>."""
    sign, square = cg_exact(j1, m1, j2, m2, J, M)
    return sign * sqrt(square)


def coupling_coefficient(jl: Spin, ml: Spin, jr: Spin, mr: Spin, J: Spin, M: Spin) -> float:
    """Coefficient of ``|jl ml>|jr mr>`` in the coupled state ``|J M>``.

    Same as :func:`cg_coefficient` except that the larger momentum is always
    treated as the first one, i.e. an extra ``(-1)**(jl + jr - J)`` appears
    when ``jl < jr``.
    """
    jl_, jr_, J_ = as_half_integer(jl), as_half_integer(jr), as_half_integer(J)
    value = cg_coefficient(jl, ml, jr, mr, J, M)
    if jl_ < jr_ and int(jl_ + jr_ - J_) % 2:
        value = -value
    return value


@dataclass(frozen=True)
class CoupledLabel:
    """Nine quantum numbers of a three-qubit coupled state.

    ``s_a12`` etc. are the spins of the inner pair (natural spins 1, 2) of
    each qubit, which are also the logical values of the encoded qubits when
    the qubit spin is 1/2.
    """

    s_tot: Fraction
    s_z_tot: Fraction
    s_ab: int
    s_a: Fraction
    s_b: Fraction
    s_c: Fraction
    s_a12: int
    s_b12: int
    s_c12: int

    def __post_init__(self):
        for name in ("s_a12", "s_b12", "s_c12"):
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"{name} must be 0 or 1")
        checks = (
            (self.s_a12, HALF, self.s_a),
            (self.s_b12, HALF, self.s_b),
            (self.s_c12, HALF, self.s_c),
            (self.s_a, self.s_b, self.s_ab),
            (self.s_ab, self.s_c, self.s_tot),
        )
        for j1, j2, j in checks:
            if not (abs(j1 - j2) <= j <= j1 + j2):
                raise ValueError(f"triangle rule fails for ({j1}, {j2}; {j}) in {self}")
        if abs(self.s_z_tot) > self.s_tot:
            raise ValueError("|S_z| exceeds S_tot")

    def as_tuple(self) -> tuple:
        return (self.s_tot, self.s_z_tot, self.s_ab, self.s_a, self.s_b,
                self.s_c, self.s_a12, self.s_b12, self.s_c12)

    def __str__(self):
        return "|" + ",".join(str(v) for v in self.as_tuple()) + ">"


@dataclass(frozen=True)
class CoupledBasisState:
    """A coupled spin state stored as sparse product-basis amplitudes.

    ``amplitudes`` maps a product-basis index (bits of spins outside
    ``spins`` are zero) to a real amplitude.
    """

    j: Fraction
    m: Fraction
    spins: tuple[int, ...]
    amplitudes: Mapping[int, float]
    name: str = ""
    label: CoupledLabel | None = field(default=None, compare=False)

    def vector(self, n_spins: int = N_SPINS) -> np.ndarray:
        out = np.zeros(2 ** n_spins)
        for idx, amp in self.amplitudes.items():
            out[idx] = amp
        return out

    def norm(self) -> float:
        return sqrt(sum(a * a for a in self.amplitudes.values()))

    def relabel(self, name: str = "", label: CoupledLabel | None = None) -> "CoupledBasisState":
        return replace(self, name=name, label=label)


def spin_half(spin: int, up: bool = True) -> CoupledBasisState:
    """A single computational spin (1-based) pointing up or down."""
    idx = 0 if up else 1 << (spin - 1)
    return CoupledBasisState(HALF, HALF if up else -HALF, (spin,), {idx: 1.0})


def spin_doublet(spin: int) -> dict[Fraction, CoupledBasisState]:
    return {HALF: spin_half(spin, True), -HALF: spin_half(spin, False)}


def couple(left: Mapping[Fraction, CoupledBasisState],
           right: Mapping[Fraction, CoupledBasisState],
           J: Spin, M: Spin, name: str = "") -> CoupledBasisState:
    """Couple two multiplets (keyed by projection) to total ``|J M>``.

    ``left`` and ``right`` must act on disjoint spins and contain every
    projection that contributes to ``M``.
    """
    J, M = as_half_integer(J), as_half_integer(M)
    jl = next(iter(left.values())).j
    jr = next(iter(right.values())).j
    if not (abs(jl - jr) <= J <= jl + jr) or not _is_int(jl + jr + J):
        raise ValueError(f"cannot couple {jl} and {jr} to {J}")
    if abs(M) > J:
        raise ValueError(f"|M| = {abs(M)} exceeds J = {J}")
    spins_l = next(iter(left.values())).spins
    spins_r = next(iter(right.values())).spins
    if set(spins_l) & set(spins_r):
        raise ValueError("left and right multiplets share spins")

    amps: dict[int, float] = {}
    ml = jl
    while ml >= -jl:
        mr = M - ml
        if abs(mr) <= jr:
            coeff = coupling_coefficient(jl, ml, jr, mr, J, M)
            if coeff != 0.0:
                if ml not in left or mr not in right:
                    raise KeyError(f"missing component m_left={ml} or m_right={mr}")
                for il, al in left[ml].amplitudes.items():
                    for ir, ar in right[mr].amplitudes.items():
                        key = il | ir
                        amps[key] = amps.get(key, 0.0) + coeff * al * ar
        ml -= 1
    amps = {k: v for k, v in amps.items() if v != 0.0}
    return CoupledBasisState(J, M, tuple(spins_l) + tuple(spins_r), amps, name)


def qubit_spins(qubit: int) -> tuple[int, int, int]:
    """Computational spins (outer, inner1, inner2) of qubit 0, 1 or 2."""
    base = 3 * qubit
    return base + 1, base + 2, base + 3


def single_qubit_multiplet(qubit: int, s: Spin, s12: int) -> dict[Fraction, CoupledBasisState]:
    """All projections of the qubit state ``((inner pair)_{s12} outer)_s``."""
    s = as_half_integer(s)
    outer, in1, in2 = qubit_spins(qubit)
    pair = {Fraction(m): couple(spin_doublet(in1), spin_doublet(in2), s12, m)
            for m in range(-s12, s12 + 1)}
    out = {}
    m = s
    while m >= -s:
        out[m] = couple(pair, spin_doublet(outer), s, m)
        m -= 1
    return out


#: (S, S_z, S_12) of the eight single-qubit states |1>..|8>.
SINGLE_QUBIT_LABELS = (
    (HALF, HALF, 0), (HALF, -HALF, 0), (HALF, HALF, 1), (HALF, -HALF, 1),
    (3 * HALF, 3 * HALF, 1), (3 * HALF, HALF, 1), (3 * HALF, -HALF, 1), (3 * HALF, -3 * HALF, 1),
)

#: (S_q, S_12) combinations a single qubit can take.
QUBIT_SPECIES = ((HALF, 0), (HALF, 1), (3 * HALF, 1))


def build_single_qubit_states(qubit: int = 0) -> list[CoupledBasisState]:
    """States |1>..|8> of one qubit, in the published order."""
    states = []
    for k, (s, m, s12) in enumerate(SINGLE_QUBIT_LABELS, start=1):
        states.append(single_qubit_multiplet(qubit, s, s12)[m].relabel(str(k)))
    return states


def two_qubit_labels() -> list[tuple]:
    """(S, M, S_A, S_B, S_A12, S_B12) of |01>..|64>, in published order."""
    labels = []
    for S in range(4):
        for M in range(-S, S + 1) if S else (0,):
            for sa, a12 in QUBIT_SPECIES:
                for sb, b12 in QUBIT_SPECIES:
                    if abs(sa - sb) <= S <= sa + sb:
                        labels.append((S, M, sa, sb, a12, b12))
    labels.sort(key=lambda t: (t[0], t[1], t[2], t[3], t[4], t[5]))
    return labels


def _two_qubit_multiplet(S: int, sa, sb, a12: int, b12: int, qubits=(0, 1)):
    left = single_qubit_multiplet(qubits[0], sa, a12)
    right = single_qubit_multiplet(qubits[1], sb, b12)
    return {Fraction(M): couple(left, right, S, M) for M in range(-S, S + 1)}


def build_two_qubit_states() -> list[CoupledBasisState]:
    """States |01>..|64> of qubits A and B, in published order."""
    out = []
    for k, (S, M, sa, sb, a12, b12) in enumerate(two_qubit_labels(), start=1):
        state = _two_qubit_multiplet(S, sa, sb, a12, b12)[Fraction(M)]
        out.append(state.relabel(f"{k:02d}"))
    return out


def three_qubit_labels() -> list[CoupledLabel]:
    """The 90 labels with maximal S_z, in published order."""
    labels = []
    for sector, (s_tot, s_ab, s_c) in enumerate(SECTORS):
        rows = []
        for sa, a12 in QUBIT_SPECIES:
            for sb, b12 in QUBIT_SPECIES:
                if not abs(sa - sb) <= s_ab <= sa + sb:
                    continue
                for sc, c12 in QUBIT_SPECIES:
                    if sc != s_c:
                        continue
                    rows.append(CoupledLabel(s_tot, s_tot, s_ab, sa, sb, sc, a12, b12, c12))
        rows.sort(key=lambda l: (l.s_a, l.s_b, l.s_a12, l.s_b12, l.s_c12))
        labels.extend(rows)
    return labels


def _coupled_three_qubit(label: CoupledLabel) -> CoupledBasisState:
    ab = _two_qubit_multiplet(label.s_ab, label.s_a, label.s_b, label.s_a12, label.s_b12)
    c = single_qubit_multiplet(2, label.s_c, label.s_c12)
    return couple(ab, c, label.s_tot, label.s_z_tot)


@lru_cache(maxsize=None)
def build_three_qubit_basis() -> tuple[CoupledBasisState, ...]:
    """The 90 reduced basis states ``|001>..|090>``, labels attached."""
    return tuple(
        _coupled_three_qubit(label).relabel(f"{k:03d}", label)
        for k, label in enumerate(three_qubit_labels(), start=1)
    )


@lru_cache(maxsize=None)
def basis_matrix() -> np.ndarray:
    """512 x 90 real matrix whose columns are the reduced basis vectors."""
    mat = np.column_stack([s.vector() for s in build_three_qubit_basis()])
    mat.setflags(write=False)
    return mat


def sector_counts() -> list[int]:
    labels = three_qubit_labels()
    return [sum(1 for l in labels if (l.s_tot, l.s_ab, l.s_c) == sec) for sec in SECTORS]


# --- brute-force oracle -----------------------------------------------------

@lru_cache(maxsize=None)
def total_spin_squared(spins: tuple[int, ...], n: int = N_SPINS) -> np.ndarray:
    """Dense matrix of (sum_i S_i)^2 over the listed spins."""
    k = len(spins)
    # S_i . S_j = (P_ij - 1/2) / 2 with P_ij the swap of spins i and j
    mat = np.eye(2 ** n) * (0.75 * k - 0.25 * k * (k - 1))
    for a in range(k):
        for b in range(a + 1, k):
            mat += swap_matrix(spins[a], spins[b], n)
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=None)
def _swap_perm(i: int, j: int, n: int) -> np.ndarray:
    idx = np.arange(2 ** n)
    bi, bj = (idx >> (i - 1)) & 1, (idx >> (j - 1)) & 1
    return idx ^ ((bi ^ bj) << (i - 1)) ^ ((bi ^ bj) << (j - 1))


def swap_matrix(i: int, j: int, n: int = N_SPINS) -> np.ndarray:
    """Permutation matrix exchanging spins ``i`` and ``j`` in the product basis."""
    perm = _swap_perm(i, j, n)
    mat = np.zeros((2 ** n, 2 ** n))
    mat[perm, np.arange(2 ** n)] = 1.0
    return mat


def _sz_total(n: int = N_SPINS) -> np.ndarray:
    idx = np.arange(2 ** n)
    downs = np.array([bin(i).count("1") for i in idx])
    return 0.5 * n - downs


def oracle_state(label: CoupledLabel) -> np.ndarray:
    """Rebuild a basis state by diagonalising the nine commuting observables.

    Works in the fixed-``S_z`` subspace and multiplies spectral projectors of
    the eight Casimirs together; the result has rank one.  The sign is fixed
    so that the largest-magnitude amplitude is positive.
    """
    sz = _sz_total()
    sub = np.flatnonzero(np.isclose(sz, float(label.s_z_tot)))
    A, B, C = (qubit_spins(q) for q in range(3))
    observables = (
        (tuple(range(1, 10)), label.s_tot),
        (A + B, Fraction(label.s_ab)),
        (A, label.s_a), (B, label.s_b), (C, label.s_c),
        (A[1:], Fraction(label.s_a12)), (B[1:], Fraction(label.s_b12)),
        (C[1:], Fraction(label.s_c12)),
    )
    proj = np.eye(len(sub))
    for spins, s in observables:
        cas = total_spin_squared(tuple(spins))[np.ix_(sub, sub)]
        target = float(s * (s + 1))
        k = len(spins)
        smin = 0.0 if k % 2 == 0 else 0.5
        for s2 in np.arange(smin, k / 2 + 0.25, 1.0):
            ev = s2 * (s2 + 1)
            if abs(ev - target) > 1e-9:
                proj = (cas - ev * np.eye(len(sub))) @ proj / (target - ev)
    col = proj[:, np.argmax(np.linalg.norm(proj, axis=0))]
    vec = np.zeros(2 ** N_SPINS)
    vec[sub] = col / np.linalg.norm(col)
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    return vec


def dump_basis_csv(path) -> None:
    """Write label, quantum numbers and nonzero amplitudes of the 90 states."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["state", "s_tot", "s_z_tot", "s_ab", "s_a", "s_b", "s_c",
                         "s_a12", "s_b12", "s_c12", "amplitudes"])
        for state in build_three_qubit_basis():
            amps = ";".join(f"{idx}:{amp:.17g}" for idx, amp in sorted(state.amplitudes.items()))
            writer.writerow([state.name, *(str(v) for v in state.label.as_tuple()), amps])
