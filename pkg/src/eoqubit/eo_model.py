"""Exchange generators of three linearly coupled exchange-only qubits.

The nine spins are wired as a chain, so there are eight controllable
exchange couplings ``(l, l+1)``.  Each generator

    H_{l,l+1} = sigma_l . sigma_{l+1} / 4 - 1/4 = (P_{l,l+1} - 1) / 2

is minus the projector onto the singlet of the pair, which is why every
exchange pulse has the closed form ``exp(-i pi p H) = 1 - (e^{i pi p} - 1) H``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numpy as np

from .angular_momentum import (
    HALF,
    CoupledLabel,
    _swap_perm,
    basis_matrix,
    build_three_qubit_basis,
)

N_PAIRS = 8
PAIRS = tuple((l, l + 1) for l in range(1, N_PAIRS + 1))
DIM = 90
N_COMP = 24
#: Dimension of the S_tot = 1/2 sector; the S_tot = 3/2 sector follows it.
SECTOR_SPLIT = 42

QUBITS = "ABC"


@dataclass(frozen=True)
class ExchangeGenerator:
    pair: tuple[int, int]
    matrix: np.ndarray


@dataclass(frozen=True)
class TargetGate:
    """A logical three-qubit gate and its image on the 90-state space."""

    logical: np.ndarray
    columns: np.ndarray
    name: str = ""

    @property
    def computational(self) -> np.ndarray:
        """The 24 x 24 ideal operator on the computational subspace."""
        return np.kron(np.eye(3), self.logical)


class EoModel:
    """The reduced 90-state model: basis, generators and computational map.

    Immutable once built; share a single instance via :func:`default_model`.
    """

    def __init__(self):
        self.states = build_three_qubit_basis()
        self.labels: tuple[CoupledLabel, ...] = tuple(s.label for s in self.states)
        basis = basis_matrix()
        gens = np.empty((N_PAIRS, DIM, DIM))
        for k, (i, j) in enumerate(PAIRS):
            swapped = basis[_swap_perm(i, j, 9)]
            gens[k] = 0.5 * (basis.T @ swapped - np.eye(DIM))
        gens[np.abs(gens) < 1e-14] = 0.0
        # symmetrise away round-off so the generators are exactly Hermitian
        gens = 0.5 * (gens + gens.transpose(0, 2, 1))
        gens.setflags(write=False)
        self.generators = gens
        self.blocks = self._computational_blocks()
        self.comp_index = np.concatenate(self.blocks)
        self.comp_index.setflags(write=False)

    def _computational_blocks(self) -> tuple[np.ndarray, ...]:
        groups: dict[tuple, list] = {}
        for idx, lab in enumerate(self.labels):
            if lab.s_a == lab.s_b == lab.s_c == HALF:
                groups.setdefault((lab.s_tot, lab.s_ab), []).append(
                    (4 * lab.s_a12 + 2 * lab.s_b12 + lab.s_c12, idx))
        blocks = []
        for key in sorted(groups, key=lambda k: min(i for _, i in groups[k])):
            rows = sorted(groups[key])
            assert [o for o, _ in rows] == list(range(8))
            blocks.append(np.array([i for _, i in rows]))
        return tuple(blocks)

    def exchange_generator(self, l: int) -> ExchangeGenerator:
        """Generator of the coupling between computational spins ``l, l+1``."""
        if not 1 <= l <= N_PAIRS:
            raise IndexError(f"pair index {l} outside 1..{N_PAIRS}")
        return ExchangeGenerator(PAIRS[l - 1], self.generators[l - 1])

    def state_name(self, index: int) -> str:
        return f"state {self.states[index].name}"

    def embed_logical_gate(self, gate: np.ndarray, name: str = "") -> TargetGate:
        return embed_logical_gate(gate, self, name)

    def restrict(self, U: np.ndarray) -> np.ndarray:
        """Computational 24 x 24 restriction of a 90 x 90 operator."""
        return U[np.ix_(self.comp_index, self.comp_index)]


@lru_cache(maxsize=None)
def default_model() -> EoModel:
    return EoModel()


def _check_unitary(gate: np.ndarray, tol: float) -> None:
    gate = np.asarray(gate)
    if gate.shape != (8, 8):
        raise ValueError(f"logical gate must be 8 x 8, got {gate.shape}")
    if np.abs(gate.conj().T @ gate - np.eye(8)).max() > tol:
        raise ValueError("logical gate is not unitary")


def embed_logical_gate(gate: np.ndarray, model: EoModel | None = None, name: str = "") -> TargetGate:
    """Place an 8 x 8 logical gate identically into the three computational blocks."""
    model = model or default_model()
    _check_unitary(gate, 1e-10)
    gate = np.array(gate, dtype=complex)
    cols = np.zeros((DIM, N_COMP), dtype=complex)
    for b, block in enumerate(model.blocks):
        cols[np.ix_(block, range(8 * b, 8 * b + 8))] = gate
    gate.setflags(write=False)
    cols.setflags(write=False)
    return TargetGate(gate, cols, name)


# --- logical gates ------------------------------------------------------------

I2 = np.eye(2)
T1 = np.diag([1.0, np.exp(1j * np.pi / 4)])
TDG1 = T1.conj()
H1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
X1 = np.array([[0.0, 1.0], [1.0, 0.0]])


def on_qubit(gate: np.ndarray, qubit: str) -> np.ndarray:
    """Lift a 2 x 2 gate to the 8 x 8 logical space (qubit A most significant)."""
    mats = [I2, I2, I2]
    mats[QUBITS.index(qubit)] = gate
    return np.kron(np.kron(mats[0], mats[1]), mats[2])


def permutation_gate(mapping) -> np.ndarray:
    """8 x 8 permutation matrix sending basis state ``k`` to ``mapping(k)``."""
    out = np.zeros((8, 8))
    for k in range(8):
        out[mapping(k), k] = 1.0
    return out


def _bits(k: int) -> list[int]:
    return [(k >> 2) & 1, (k >> 1) & 1, k & 1]


def _index(bits) -> int:
    return 4 * bits[0] + 2 * bits[1] + bits[2]


def toffoli_logical(controls: str = "AB", target: str = "C") -> np.ndarray:
    c0, c1, t = (QUBITS.index(q) for q in (*controls, target))

    def flip(k):
        b = _bits(k)
        if b[c0] and b[c1]:
            b[t] ^= 1
        return _index(b)

    return permutation_gate(flip)


def cnot_logical(control: str, target: str) -> np.ndarray:
    c, t = QUBITS.index(control), QUBITS.index(target)

    def flip(k):
        b = _bits(k)
        if b[c]:
            b[t] ^= 1
        return _index(b)

    return permutation_gate(flip)


def swap_logical(q1: str, q2: str) -> np.ndarray:
    i, j = QUBITS.index(q1), QUBITS.index(q2)

    def exchange(k):
        b = _bits(k)
        b[i], b[j] = b[j], b[i]
        return _index(b)

    return permutation_gate(exchange)


def toffoli_target(model: EoModel | None = None, controls: str = "AB", target: str = "C") -> TargetGate:
    """Toffoli gate (default: controls A, B and target C) on all three blocks."""
    return embed_logical_gate(toffoli_logical(controls, target), model, f"toffoli[{controls}->{target}]")


def toffoli_assignments() -> list[tuple[str, str]]:
    """The three distinct (controls, target) choices of a Toffoli gate."""
    out = []
    for perm in permutations(QUBITS):
        controls = "".join(sorted(perm[:2]))
        if (controls, perm[2]) not in out:
            out.append((controls, perm[2]))
    return out


def target_by_name(name: str, model: EoModel | None = None) -> TargetGate:
    """Look up a target from the registry names used by the command line.

    ``toffoli``, ``cnot:AB``, ``cnot:BC``, ``swap:AB``, ``swap:BC``,
    ``t-gate:X``, ``tdg:X``, ``h-gate:X`` (X one of A, B, C) and ``identity``.
    """
    kind, _, arg = name.partition(":")
    single = {"t-gate": T1, "tdg": TDG1, "h-gate": H1}
    if kind == "toffoli" and not arg:
        logical = toffoli_logical()
    elif kind == "identity" and not arg:
        logical = np.eye(8)
    elif kind in ("cnot", "swap") and arg in ("AB", "BC"):
        logical = cnot_logical(*arg) if kind == "cnot" else swap_logical(*arg)
    elif kind in single and arg in ("A", "B", "C"):
        logical = on_qubit(single[kind], arg)
    else:
        raise KeyError(f"unknown target {name!r}")
    return embed_logical_gate(logical, model, name)
