"""Piecewise-constant exchange pulse sequences.

A sequence is a list of time steps.  Every step drives a set of disjoint
nearest-neighbour pairs, either the *odd* set ``(2,3),(4,5),(6,7),(8,9)`` or
the *even* set ``(1,2),(3,4),(5,6),(7,8)``, with dimensionless amplitudes
``p = J tau / pi``.  Pairs inside one step share no spin, so their pulses
commute and the step propagator is a product of closed-form factors.

Sequence files are CSV with the header ``step,p12,p23,...,p89``, one row per
time step and ``0`` for inactive pairs.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .eo_model import (
    DIM,
    N_COMP,
    N_PAIRS,
    PAIRS,
    EoModel,
    TargetGate,
    default_model,
    target_by_name,
)

log = logging.getLogger(__name__)

DEFAULT_P_MAX = 2.5
COLUMNS = tuple(f"p{i}{j}" for i, j in PAIRS)
HEADER = ("step",) + COLUMNS

#: Pair indices ``l`` (pair ``(l, l+1)``) making up each parity set.
PARITY_SETS = {"odd": (2, 4, 6, 8), "even": (1, 3, 5, 7)}

#: Step ranges (1-based, inclusive) of the five sections of the bundled
#: 50-step Toffoli sequence, with the qubits each section acts on.
TOFFOLI_SECTIONS = (
    ("U1", 1, 15, "AB"),
    ("U2", 16, 27, "ABC"),
    ("U3", 28, 38, "BC"),
    ("U4", 39, 40, "ABC"),
    ("U5", 41, 50, "AB"),
)

#: Reference size of the direct decomposition, (unitaries, time steps).
DIR_REFERENCE_COUNTS = (216, 162)

BUNDLED = {
    "toffoli_jk_92": "toffoli_jk_92.csv",
    "toffoli_jk_92_as_printed": "toffoli_jk_92_as_printed.csv",
    "toffoli_uncompressed_55": "toffoli_uncompressed_55.csv",
}


class SequenceError(ValueError):
    """Raised for malformed steps, sequences or sequence files."""


class ParityError(SequenceError):
    """A step drives pairs from both parity sets, or the wrong set."""


def pair_parity(l: int) -> str:
    """Parity set containing pair ``(l, l+1)``."""
    if not 1 <= l <= N_PAIRS:
        raise IndexError(f"pair index {l} outside 1..{N_PAIRS}")
    return "odd" if l % 2 == 0 else "even"


def pair_qubits(l: int) -> str:
    """Encoded qubits touched by pair ``(l, l+1)``."""
    return "".join(sorted({"ABC"[(l - 1) // 3], "ABC"[l // 3]}))


# --- data model -------------------------------------------------------------


@dataclass(frozen=True)
class PulseStep:
    """One time step: eight pulse amplitudes indexed by pair ``(l, l+1)``.

    ``parity`` is inferred from the nonzero pattern when omitted.  A step
    with no active pair may carry either parity (or none).
    """

    values: tuple[float, ...]
    parity: str | None = None
    p_max: float = DEFAULT_P_MAX

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) != N_PAIRS:
            raise SequenceError(f"a step has {N_PAIRS} entries, got {len(vals)}")
        if not all(math.isfinite(v) for v in vals):
            raise SequenceError(f"non-finite pulse amplitude in {vals}")
        # normalise -0.0 so that equality and file output are canonical
        vals = tuple(0.0 if v == 0 else v for v in vals)
        object.__setattr__(self, "values", vals)
        big = [v for v in vals if abs(v) > self.p_max]
        if big:
            raise SequenceError(f"|p| = {abs(big[0])} exceeds p_max = {self.p_max}")
        found = {pair_parity(l) for l in self.active_pairs}
        if len(found) > 1:
            raise ParityError(f"step mixes odd and even pairs: {self.active_pairs}")
        if self.parity is None:
            object.__setattr__(self, "parity", found.pop() if found else None)
        elif self.parity not in PARITY_SETS:
            raise ParityError(f"unknown parity {self.parity!r}")
        elif found and found != {self.parity}:
            raise ParityError(f"{self.parity} step drives pairs {self.active_pairs}")

    @classmethod
    def from_pairs(cls, pulses: Mapping, parity: str | None = None,
                   p_max: float = DEFAULT_P_MAX) -> "PulseStep":
        """Build a step from ``{l: p}`` or ``{(l, l+1): p}``."""
        vals = [0.0] * N_PAIRS
        for key, p in pulses.items():
            l = key[0] if isinstance(key, tuple) else int(key)
            if isinstance(key, tuple) and key != (l, l + 1):
                raise SequenceError(f"{key} is not a nearest-neighbour pair")
            if not 1 <= l <= N_PAIRS:
                raise SequenceError(f"pair {key} outside the chain")
            vals[l - 1] = p
        return cls(tuple(vals), parity, p_max)

    @classmethod
    def empty(cls, parity: str | None = None) -> "PulseStep":
        return cls((0.0,) * N_PAIRS, parity)

    @property
    def active_pairs(self) -> tuple[int, ...]:
        return tuple(l for l, v in enumerate(self.values, start=1) if v != 0)

    @property
    def pulses(self) -> dict[tuple[int, int], float]:
        """Mapping ``(l, l+1) -> p`` over the active pairs."""
        return {PAIRS[l - 1]: self.values[l - 1] for l in self.active_pairs}

    def negated(self) -> "PulseStep":
        return replace(self, values=tuple(-v for v in self.values))

    def shifted(self, offset: int) -> "PulseStep":
        """Translate every pulse by ``offset`` spins along the chain."""
        vals = [0.0] * N_PAIRS
        for l in self.active_pairs:
            if not 1 <= l + offset <= N_PAIRS:
                raise SequenceError(f"pair {l} shifted by {offset} leaves the chain")
            vals[l + offset - 1] = self.values[l - 1]
        parity = self.parity
        if parity is not None and offset % 2:
            parity = "even" if parity == "odd" else "odd"
        return PulseStep(tuple(vals), parity, self.p_max)


@dataclass(frozen=True)
class Section:
    """A named span of steps, 1-based and inclusive."""

    name: str
    start: int
    stop: int


@dataclass(frozen=True)
class PulseSequence:
    """An ordered list of steps; step 1 is applied first."""

    steps: tuple[PulseStep, ...] = ()
    name: str = ""
    source: str = ""
    sections: tuple[Section, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        for sec in self.sections:
            if not 1 <= sec.start <= sec.stop <= len(self.steps):
                raise SequenceError(f"section {sec} outside 1..{len(self.steps)}")

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __add__(self, other: "PulseSequence") -> "PulseSequence":
        n = len(self.steps)
        moved = tuple(Section(s.name, s.start + n, s.stop + n) for s in other.sections)
        return PulseSequence(self.steps + other.steps, self.name, self.source,
                             self.sections + moved)

    @classmethod
    def from_array(cls, values, parities: Sequence[str | None] | None = None,
                   p_max: float = DEFAULT_P_MAX, **meta) -> "PulseSequence":
        """Build from an ``L x 8`` array of amplitudes."""
        values = np.asarray(values, dtype=float).reshape(-1, N_PAIRS)
        parities = parities if parities is not None else [None] * len(values)
        steps = tuple(PulseStep(tuple(row), par, p_max) for row, par in zip(values, parities))
        return cls(steps, **meta)

    def as_array(self) -> np.ndarray:
        """``L x 8`` amplitude array (column ``l-1`` holds pair ``(l, l+1)``)."""
        return np.array([s.values for s in self.steps], dtype=float).reshape(-1, N_PAIRS)

    def annotated(self, name: str, start: int | None = None, stop: int | None = None) -> "PulseSequence":
        """Copy with one more section (whole sequence by default)."""
        sec = Section(name, start or 1, stop or len(self.steps))
        return replace(self, sections=self.sections + (sec,))

    def section(self, name: str) -> "PulseSequence":
        for sec in self.sections:
            if sec.name == name:
                return PulseSequence(self.steps[sec.start - 1:sec.stop], name, self.source)
        raise KeyError(name)

    def inverse(self) -> "PulseSequence":
        """Steps reversed and amplitudes negated, which propagates to U^dagger."""
        return PulseSequence(tuple(s.negated() for s in reversed(self.steps)),
                             f"{self.name}^-1" if self.name else "", self.source)

    def shifted(self, offset: int) -> "PulseSequence":
        return replace(self, steps=tuple(s.shifted(offset) for s in self.steps))

    def without_empty_steps(self) -> "PulseSequence":
        return PulseSequence(tuple(s for s in self.steps if s.active_pairs), self.name, self.source)

    def qubits_touched(self) -> str:
        """Qubits owning at least one spin of a driven pair."""
        found = set()
        for step in self.steps:
            for l in step.active_pairs:
                found.update(pair_qubits(l))
        return "".join(sorted(found))

    def qubits_driven(self) -> str:
        """Qubits with at least one driven pair inside their own three spins."""
        found = {pair_qubits(l) for step in self.steps for l in step.active_pairs}
        return "".join(sorted(q for q in found if len(q) == 1))


def count_pulses(seq: PulseSequence) -> tuple[int, int]:
    """``(pulses, steps)`` with pulses the number of nonzero amplitudes."""
    return sum(len(s.active_pairs) for s in seq.steps), len(seq.steps)


def count_slots(seq: PulseSequence, excluded: Iterable[int] = (1,)) -> int:
    """Structural pulse slots: pairs in each step's parity set minus ``excluded``.

    With the default exclusion of pair (1,2) this is the size of the dense
    control structure a sequence was optimized in.
    """
    excluded = set(excluded)
    return sum(len(set(PARITY_SETS[s.parity]) - excluded)
               for s in seq.steps if s.parity is not None)


# --- file format --------------------------------------------------------------


def _format_value(v: float) -> str:
    return "0" if v == 0 else repr(float(v))


def _parse_value(text: str, where: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise SequenceError(f"{where}: malformed number {text!r}") from None
    if not math.isfinite(v):
        raise SequenceError(f"{where}: non-finite value {text!r}")
    return v


def read_sequence(stream, name: str = "", source: str = "",
                  p_max: float = DEFAULT_P_MAX) -> PulseSequence:
    """Parse the CSV format from a text stream."""
    rows = [r for r in csv.reader(stream) if r and any(c.strip() for c in r)]
    if not rows or tuple(c.strip() for c in rows[0]) != HEADER:
        raise SequenceError(f"{source or 'input'}: header must be {','.join(HEADER)}")
    indexed = {}
    for lineno, row in enumerate(rows[1:], start=2):
        where = f"{source or 'input'}:{lineno}"
        if len(row) != len(HEADER):
            raise SequenceError(f"{where}: expected {len(HEADER)} fields, got {len(row)}")
        try:
            k = int(row[0])
        except ValueError:
            raise SequenceError(f"{where}: malformed step index {row[0]!r}") from None
        if k in indexed:
            raise SequenceError(f"{where}: duplicate step index {k}")
        vals = tuple(_parse_value(c.strip(), where) for c in row[1:])
        try:
            indexed[k] = PulseStep(vals, p_max=p_max)
        except SequenceError as exc:
            raise type(exc)(f"{where}: {exc}") from None
    if sorted(indexed) != list(range(1, len(indexed) + 1)):
        raise SequenceError(f"{source or 'input'}: step indices must run 1..{len(indexed)}")
    return PulseSequence(tuple(indexed[k] for k in sorted(indexed)), name, source)


def load_sequence(path, p_max: float = DEFAULT_P_MAX) -> PulseSequence:
    """Read a sequence file; parity is inferred and validated per row."""
    path = Path(path)
    with path.open(newline="") as fh:
        return read_sequence(fh, name=path.stem, source=str(path), p_max=p_max)


def write_sequence(seq: PulseSequence, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(HEADER)
    for k, step in enumerate(seq.steps, start=1):
        writer.writerow([k] + [_format_value(v) for v in step.values])


def save_sequence(seq: PulseSequence, path) -> None:
    """Write ``seq``; values use the shortest round-trip float text."""
    with Path(path).open("w", newline="") as fh:
        write_sequence(seq, fh)


def sequence_to_text(seq: PulseSequence) -> str:
    buf = io.StringIO()
    write_sequence(seq, buf)
    return buf.getvalue()


def bundled_path(key: str) -> Path:
    """Path of a bundled data file (``toffoli_jk_92`` and friends)."""
    fname = BUNDLED.get(key, key)
    return Path(str(resources.files("eoqubit") / "data" / fname))


def load_bundled(key: str) -> PulseSequence:
    seq = load_sequence(bundled_path(key))
    if key.startswith("toffoli_jk_92"):
        seq = replace(seq, sections=tuple(Section(n, a, b) for n, a, b, _ in TOFFOLI_SECTIONS))
    return seq


# --- propagation ----------------------------------------------------------------


def pulse_factor(model: EoModel, l: int, p: float) -> np.ndarray:
    """``exp(-i pi p H_l) = I - (e^{i pi p} - 1) H_l``."""
    return np.eye(DIM) - (np.exp(1j * np.pi * p) - 1.0) * model.generators[l - 1]


def apply_step(step: PulseStep, states: np.ndarray, model: EoModel | None = None) -> np.ndarray:
    """Apply one step to the columns of ``states`` (returns a new array)."""
    model = model or default_model()
    out = np.array(states, dtype=complex)
    for l in step.active_pairs:
        out -= (np.exp(1j * np.pi * step.values[l - 1]) - 1.0) * (model.generators[l - 1] @ out)
    return out


def step_propagator(step: PulseStep, model: EoModel | None = None) -> np.ndarray:
    """The 90 x 90 unitary of one step."""
    return apply_step(step, np.eye(DIM), model)


def propagate(seq: PulseSequence, model: EoModel | None = None,
              states: np.ndarray | None = None) -> np.ndarray:
    """Ordered product ``U^(L) ... U^(1)``, or its action on ``states``."""
    model = model or default_model()
    out = np.eye(DIM, dtype=complex) if states is None else np.array(states, dtype=complex)
    for step in seq.steps:
        out = apply_step(step, out, model)
    return out


# --- fidelity -----------------------------------------------------------------


@dataclass(frozen=True)
class FidelityReport:
    """Figures of merit of a 90 x 90 unitary against a target gate.

    ``block_deviation`` is the entrywise maximum of ``|U_b - e^{i phi} G|``
    per computational block after removing the global phase ``phi`` of the
    trace overlap.
    """

    fidelity_d24: float
    infidelity_jtre: float
    block_deviation: tuple[float, float, float]
    leakage: float
    global_phase: float

    @property
    def infidelity_d24(self) -> float:
        return 1.0 - self.fidelity_d24

    def as_dict(self) -> dict:
        return {
            "fidelity_d24": self.fidelity_d24,
            "infidelity_d24": self.infidelity_d24,
            "infidelity_jtre": self.infidelity_jtre,
            "block_deviation": list(self.block_deviation),
            "leakage": self.leakage,
            "global_phase": self.global_phase,
        }


def trace_overlap(columns: np.ndarray, target: TargetGate) -> complex:
    """``Tr(G^dagger U)`` from the 90 x 24 computational columns of ``U``."""
    return complex(np.vdot(target.columns, columns))


def d24_fidelity(overlap: complex, d: int = N_COMP) -> float:
    return (d + abs(overlap) ** 2) / (d * (d + 1))


def jtre_infidelity(overlap: complex, n: int = N_COMP) -> float:
    return 1.0 - overlap.real / n


def fidelity_report(U: np.ndarray, target: TargetGate, model: EoModel | None = None,
                    unitarity_tol: float = 1e-8) -> FidelityReport:
    """Compare ``U`` (90 x 90, or its 90 x 24 computational columns) with ``target``."""
    model = model or default_model()
    U = np.asarray(U)
    cols = U[:, model.comp_index] if U.shape == (DIM, DIM) else U
    if cols.shape != (DIM, N_COMP):
        raise ValueError(f"expected a 90 x 90 unitary or 90 x 24 columns, got {U.shape}")
    gram = cols.conj().T @ cols
    if np.abs(gram - np.eye(N_COMP)).max() > unitarity_tol:
        warnings.warn("propagator is not unitary on the computational subspace", RuntimeWarning)
    tr = trace_overlap(cols, target)
    phase = tr / abs(tr) if abs(tr) > 0 else 1.0
    dev = []
    for b, block in enumerate(model.blocks):
        got = cols[np.ix_(block, range(8 * b, 8 * b + 8))]
        dev.append(float(np.abs(got - phase * target.logical).max()))
    outside = np.ones(DIM, dtype=bool)
    outside[model.comp_index] = False
    leakage = float(np.sqrt((np.abs(cols[outside]) ** 2).sum(axis=0)).max())
    return FidelityReport(
        fidelity_d24=min(1.0, d24_fidelity(tr)),
        infidelity_jtre=jtre_infidelity(tr),
        block_deviation=tuple(dev),
        leakage=leakage,
        global_phase=float(np.angle(phase)),
    )


def verify_sequence(seq: PulseSequence, target: TargetGate | str = "toffoli",
                    model: EoModel | None = None) -> FidelityReport:
    """Propagate ``seq`` and report against ``target`` (object or registry name)."""
    model = model or default_model()
    if isinstance(target, str):
        target = target_by_name(target, model)
    cols = propagate(seq, model, np.eye(DIM)[:, model.comp_index])
    return fidelity_report(cols, target, model)


# --- builders -----------------------------------------------------------------

_SQ2, _SQ3, _SQ6 = math.sqrt(2), math.sqrt(3), math.sqrt(6)


def t_gate_angle() -> float:
    return 1 + math.acos((2 - _SQ2 + math.sqrt(70 + 36 * _SQ2)) / 12) / math.pi


def h_gate_angles() -> tuple[float, float]:
    phi1 = math.acos(-1 + _SQ2 + (-2 + _SQ2) / _SQ3) / math.pi
    phi2 = math.acos((-1 + _SQ2 + _SQ6) / 3) / math.pi
    return phi1, phi2


def table1_parameters(kind: str) -> tuple[float, float, float, float]:
    """``(p1, p2, p3, p4)`` of the four-pulse T or H gate."""
    kind = kind.upper()
    if kind == "T":
        th = t_gate_angle()
        return th, 1.25 - th, th, 1 - th
    if kind == "H":
        phi1, phi2 = h_gate_angles()
        return phi1 - 1, 1 - phi2, 1 + phi2, 2 - phi1
    raise ValueError(f"kind must be 'T' or 'H', got {kind!r}")


def build_table1_gate(kind: str, qubit: str) -> PulseSequence:
    """Four-step T, T-dagger or H gate on one encoded qubit.

    The product ``U_23(p1) U_12(p2) U_23(p3) U_12(p4)`` is laid out with
    ``p4`` at step 1.  On qubit A (spins 1-3) the ``U_23`` factor drives
    pair (1,2) and ``U_12`` drives pair (2,3); B and C are shifted by 3
    and 6 spins.  ``kind`` is ``"T"``, ``"Tdg"`` or ``"H"``.
    """
    if qubit not in ("A", "B", "C"):
        raise ValueError(f"qubit must be A, B or C, got {qubit!r}")
    if kind.upper() == "TDG":
        return build_table1_gate("T", qubit).inverse().annotated(f"Tdg({qubit})")
    p1, p2, p3, p4 = table1_parameters(kind)
    base = 3 * "ABC".index(qubit)
    outer, inner = base + 1, base + 2
    steps = [PulseStep.from_pairs({l: p}) for l, p in ((inner, p4), (outer, p3), (inner, p2), (outer, p1))]
    label = f"{kind.upper()}({qubit})"
    return PulseSequence(tuple(steps), label, "closed form").annotated(label)


def encoded_swap(pair: str) -> PulseSequence:
    """Exchange two adjacent encoded qubits with nine p = 1 pulses in five steps.

    The physical block swap also exchanges the two qubits' gauge spins, so
    the computational block with S_AB = 0 (S_BC = 0) picks up a sign -1.
    Swaps used in pairs cancel this sign.
    """
    if pair not in ("AB", "BC"):
        raise ValueError(f"only adjacent qubits AB or BC can be swapped, got {pair!r}")
    o = 0 if pair == "AB" else 3
    layers = ((3,), (2, 4), (1, 3, 5), (2, 4), (3,))
    steps = tuple(PulseStep.from_pairs({l + o: 1.0 for l in layer}) for layer in layers)
    return PulseSequence(steps, f"SWAP({pair})", "odd-even transposition").annotated(f"SWAP({pair})")


def compact(seq: PulseSequence) -> PulseSequence:
    """Move every pulse to the earliest step it can occupy.

    A pulse may move earlier past pulses that share no spin with it; pulses
    sharing a spin keep their order.  A pulse joins an existing step only
    when the step's parity matches.  Sections are dropped.
    """
    slots: list[dict[int, float]] = []
    parity: list[str | None] = []
    last_use = [-1] * (N_PAIRS + 2)  # latest slot touching spin s (1-based)
    for step in seq.steps:
        for l in step.active_pairs:
            t = max(last_use[l], last_use[l + 1]) + 1
            par = pair_parity(l)
            while t < len(slots) and parity[t] not in (None, par):
                t += 1
            if t == len(slots):
                slots.append({})
                parity.append(par)
            slots[t][l] = step.values[l - 1]
            parity[t] = par
            last_use[l] = last_use[l + 1] = t
    steps = tuple(PulseStep.from_pairs(s) for s in slots)
    return PulseSequence(steps, seq.name, seq.source)


def dir_circuit() -> list[tuple[str, str]]:
    """Gate list of the direct Toffoli decomposition (controls A, B; target C).

    Entries are ``(gate, qubits)`` in time order; ``CNOT`` qubits are
    ``control + target``.
    """
    return [
        ("H", "C"), ("CNOT", "BC"), ("Tdg", "C"), ("CNOT", "AC"), ("T", "C"),
        ("CNOT", "BC"), ("Tdg", "C"), ("CNOT", "AC"), ("T", "B"), ("T", "C"),
        ("H", "C"), ("CNOT", "AB"), ("T", "A"), ("Tdg", "B"), ("CNOT", "AB"),
    ]


def check_cnot_sequence(seq: PulseSequence, model: EoModel | None = None,
                        tol: float = 1e-8) -> FidelityReport:
    """Validate a CNOT(A -> B) sequence confined to spins 1..6."""
    bad = [l for s in seq.steps for l in s.active_pairs if l > 5]
    if bad:
        raise SequenceError(f"CNOT sequence must act on spins 1..6, drives pair {bad[0]}")
    report = verify_sequence(seq, "cnot:AB", model)
    if report.infidelity_d24 > tol:
        raise SequenceError(f"CNOT self-check failed: infidelity {report.infidelity_d24:.3e} > {tol:g}")
    return report


def build_dir_toffoli(fw_data, model: EoModel | None = None, compacted: bool = False) -> PulseSequence:
    """Assemble the direct-decomposition Toffoli from gate-level sequences.

    ``fw_data`` is a path to (or a :class:`PulseSequence` of) a CNOT with
    control A and target B acting on spins 1..6.  CNOT(B, C) is the same
    sequence shifted by three spins; CNOT(A, C) is wrapped in a pair of
    encoded swaps.  Each gate is recorded as a section unless ``compacted``,
    which packs pulses into the fewest steps the wiring allows.
    """
    if isinstance(fw_data, PulseSequence):
        cnot_ab = fw_data
    else:
        path = Path(fw_data)
        if not path.is_file():
            raise FileNotFoundError(f"CNOT pulse file not found: {path}")
        cnot_ab = load_sequence(path)
    check_cnot_sequence(cnot_ab, model)
    cnot_bc = cnot_ab.shifted(3)
    parts = {
        "AB": cnot_ab,
        "BC": cnot_bc,
        "AC": encoded_swap("AB") + cnot_bc + encoded_swap("AB"),
    }
    seq = PulseSequence(name="toffoli_dir", source="direct decomposition")
    for gate, qubits in dir_circuit():
        if gate == "CNOT":
            part = PulseSequence(parts[qubits].steps)
        else:
            part = PulseSequence(build_table1_gate(gate, qubits).steps)
        seq = seq + part.annotated(f"{gate}({qubits})")
    if compacted:
        seq = compact(seq)
    counts = count_pulses(seq)
    if counts != DIR_REFERENCE_COUNTS:
        log.info("direct decomposition has %d pulses in %d steps (reference: %d in %d)",
                 *counts, *DIR_REFERENCE_COUNTS)
    return seq
