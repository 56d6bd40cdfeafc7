"""GRAPE, Krotov and Jenga-Krotov optimization of interleaved exchange pulses.

Controls live on a grid of ``L`` time steps with four slots per step.  Step
``k`` (1-based) drives the odd pair set ``(2,3),(4,5),(6,7),(8,9)`` when
``k`` is odd and the even set ``(1,2),(3,4),(5,6),(7,8)`` when ``k`` is even;
``first_parity="even"`` swaps the two.  Amplitudes are the dimensionless
``p`` of the pulse files, so the step generator is ``pi * sum_l p_l H_l``.

All propagation works on the 24 computational columns split by total spin:
16 columns in the 42-dimensional S = 1/2 sector and 8 in the 48-dimensional
S = 3/2 sector.  The generators never couple the two sectors.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eo_model import N_COMP, SECTOR_SPLIT, EoModel, TargetGate, default_model
from .pulse_sequence import DEFAULT_P_MAX, PARITY_SETS, PulseSequence, PulseStep

log = logging.getLogger(__name__)

SLOTS = 4


# --- control grid -----------------------------------------------------------


@dataclass
class ControlGrid:
    """``L x 4`` pulse amplitudes plus a mask of free entries.

    ``values[k, j]`` drives pair ``pairs(k)[j]``.  Entries where ``mask`` is
    False are fixed at zero.
    """

    values: np.ndarray
    mask: np.ndarray | None = None
    first_parity: str = "odd"

    def __post_init__(self):
        self.values = np.array(self.values, dtype=float).reshape(-1, SLOTS)
        if self.mask is None:
            self.mask = np.ones(self.values.shape, dtype=bool)
        self.mask = np.array(self.mask, dtype=bool)
        if self.mask.shape != self.values.shape:
            raise ValueError(f"mask shape {self.mask.shape} != values shape {self.values.shape}")
        if self.first_parity not in PARITY_SETS:
            raise ValueError(f"unknown parity {self.first_parity!r}")
        if np.any(self.values[~self.mask] != 0):
            raise ValueError("masked entries must be exactly zero")

    @property
    def L(self) -> int:
        return self.values.shape[0]

    def parity(self, k: int) -> str:
        """Parity set of step ``k`` (0-based)."""
        other = "even" if self.first_parity == "odd" else "odd"
        return self.first_parity if k % 2 == 0 else other

    def pairs(self, k: int) -> tuple[int, ...]:
        return PARITY_SETS[self.parity(k)]

    def pulse_count(self) -> int:
        return int(np.count_nonzero(self.values))

    def copy(self) -> "ControlGrid":
        return ControlGrid(self.values.copy(), self.mask.copy(), self.first_parity)

    def to_sequence(self, name: str = "", source: str = "", drop_empty: bool = False,
                    p_max: float = DEFAULT_P_MAX) -> PulseSequence:
        steps = []
        for k in range(self.L):
            if drop_empty and not np.any(self.values[k]):
                continue
            vals = [0.0] * 8
            for j, l in enumerate(self.pairs(k)):
                vals[l - 1] = float(self.values[k, j])
            steps.append(PulseStep(tuple(vals), self.parity(k), p_max))
        return PulseSequence(tuple(steps), name, source)

    @classmethod
    def from_sequence(cls, seq: PulseSequence, mask_zeros: bool = False) -> "ControlGrid":
        """Grid holding ``seq``; its steps must alternate parity.

        Empty steps adopt the parity the alternation requires.  With
        ``mask_zeros`` every zero entry is fixed, which freezes the pulse
        pattern and leaves only the amplitudes free.
        """
        known = [(k, s.parity) for k, s in enumerate(seq.steps) if s.parity is not None]
        if not known:
            first = "odd"
        else:
            k0, par0 = known[0]
            first = par0 if k0 % 2 == 0 else ("even" if par0 == "odd" else "odd")
        grid = cls(np.zeros((len(seq), SLOTS)), first_parity=first)
        for k, step in enumerate(seq.steps):
            if step.parity not in (None, grid.parity(k)):
                raise ValueError(f"step {k + 1} breaks parity alternation")
            for j, l in enumerate(grid.pairs(k)):
                grid.values[k, j] = step.values[l - 1]
        if mask_zeros:
            grid.mask = grid.values != 0
        return grid


def structural_mask(L: int, first_parity: str = "odd", excluded_pairs=()) -> np.ndarray:
    """Mask with every slot free except those driving ``excluded_pairs``."""
    grid = ControlGrid(np.zeros((L, SLOTS)), first_parity=first_parity)
    mask = np.ones((L, SLOTS), dtype=bool)
    for k in range(L):
        for j, l in enumerate(grid.pairs(k)):
            if l in excluded_pairs:
                mask[k, j] = False
    return mask


def random_initial_grid(L: int, r: float = 0.5, seed=None, mask: np.ndarray | None = None,
                        first_parity: str = "odd") -> ControlGrid:
    """Uniform i.i.d. amplitudes in ``[-r, r]`` on the free entries."""
    if not np.isfinite(r):
        raise ValueError("range must be finite")
    rng = np.random.default_rng(seed)
    values = rng.uniform(-r, r, size=(L, SLOTS))
    mask = np.ones((L, SLOTS), dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    values[~mask] = 0.0
    return ControlGrid(values, mask, first_parity)


# --- propagation engine -------------------------------------------------------


class Propagator:
    """Sector-split propagation of the 24 computational columns.

    A state is a pair ``(x_half, x_three_half)`` of complex arrays with
    shapes ``(42, 16)`` and ``(48, 8)``.
    """

    def __init__(self, model: EoModel | None, target: TargetGate):
        model = model or default_model()
        s = SECTOR_SPLIT
        comp = np.asarray(model.comp_index)
        n_half = int(np.sum(comp < s))
        if not np.all(comp[:n_half] < s) or not np.all(comp[n_half:] >= s):
            raise ValueError("computational columns are not ordered by sector")
        gens = model.generators
        self.gens = (np.ascontiguousarray(gens[:, :s, :s]), np.ascontiguousarray(gens[:, s:, s:]))
        eye = np.eye(gens.shape[1])
        self.initial = (np.ascontiguousarray(eye[:s, comp[:n_half]], dtype=complex),
                        np.ascontiguousarray(eye[s:, comp[n_half:]], dtype=complex))
        cols = np.asarray(target.columns)
        if np.abs(cols[:s, n_half:]).max() > 0 or np.abs(cols[s:, :n_half]).max() > 0:
            raise ValueError("target mixes total-spin sectors")
        self.target = (np.ascontiguousarray(cols[:s, :n_half]), np.ascontiguousarray(cols[s:, n_half:]))
        self.n_states = N_COMP

    @staticmethod
    def _h(G: np.ndarray, x: np.ndarray) -> np.ndarray:
        # real generator on a complex block without upcasting the generator
        return (G @ np.ascontiguousarray(x).view(np.float64)).view(np.complex128)

    def hvec(self, l: int, state):
        """``H_l`` applied to a state."""
        return tuple(self._h(G[l - 1], x) for G, x in zip(self.gens, state))

    def pulse(self, l: int, p: float, state, adjoint: bool = False):
        """Apply ``exp(-i pi p H_l)`` (or its adjoint) to a state."""
        c = np.exp((-1j if adjoint else 1j) * np.pi * p) - 1.0
        return tuple(x - c * self._h(G[l - 1], x) for G, x in zip(self.gens, state))

    def step(self, pairs, values, state, adjoint: bool = False):
        for l, p in zip(pairs, values):
            if p != 0:
                state = self.pulse(l, p, state, adjoint)
        return state

    def forward(self, grid: ControlGrid, keep: bool = False):
        """Final state, or the list of states after each step when ``keep``."""
        state = self.initial
        states = [state] if keep else None
        for k in range(grid.L):
            state = self.step(grid.pairs(k), grid.values[k], state)
            if keep:
                states.append(state)
        return states if keep else state

    def overlap(self, state) -> complex:
        """``Tr(G^dagger U)`` restricted to the computational columns."""
        return complex(sum(np.vdot(t, x) for t, x in zip(self.target, state)))

    def jtre(self, state) -> float:
        return 1.0 - self.overlap(state).real / self.n_states

    def fidelity_d24(self, state) -> float:
        d = self.n_states
        return (d + abs(self.overlap(state)) ** 2) / (d * (d + 1))

    def costates(self, grid: ControlGrid, scale: float = 1.0):
        """Target columns propagated backward: entry ``n`` is the co-state after step ``n``."""
        chi = tuple(scale * t for t in self.target)
        out = [chi]
        for k in range(grid.L - 1, -1, -1):
            chi = self.step(grid.pairs(k), grid.values[k], chi, adjoint=True)
            out.append(chi)
        return out[::-1]


def _im_inner(a, b) -> float:
    return float(sum(np.vdot(x, y).imag for x, y in zip(a, b)))


def jtre_gradient(model: EoModel | None, target: TargetGate, grid: ControlGrid) -> np.ndarray:
    """Exact ``dJ_T,re / dp`` for every grid entry (masked entries included)."""
    prop = Propagator(model, target)
    phis = prop.forward(grid, keep=True)
    chis = prop.costates(grid)
    grad = np.zeros_like(grid.values)
    for k in range(grid.L):
        for j, l in enumerate(grid.pairs(k)):
            grad[k, j] = -np.pi * _im_inner(chis[k + 1], prop.hvec(l, phis[k + 1])) / prop.n_states
    return grad


def grid_jtre(model: EoModel | None, target: TargetGate, grid: ControlGrid) -> float:
    prop = Propagator(model, target)
    return prop.jtre(prop.forward(grid))


# --- GRAPE --------------------------------------------------------------------


@dataclass
class GrapeResult:
    grid: ControlGrid
    phi_trace: list[float]
    infidelity_trace: list[float]

    @property
    def final_infidelity(self) -> float:
        return self.infidelity_trace[-1]

    @property
    def final_jtre(self) -> float:
        """``1 - Phi``, the same phase-sensitive measure Krotov minimizes."""
        return 1.0 - self.phi_trace[-1]


def grape_optimize(model: EoModel | None, target: TargetGate, L: int = 25, lr: float = 0.02,
                   iterations: int = 100, seed=None, r: float = 0.5,
                   initial: ControlGrid | None = None, trace_path=None) -> GrapeResult:
    """Gradient ascent on ``Phi = Re Tr(G^dagger U) / 24``.

    Within one step the four generators commute, so ``dU/dp_l = -i pi H_l U``
    exactly and the gradient needs one forward and one backward sweep.  The
    traces hold ``Phi`` and the d = 24 gate infidelity, one entry for the
    initial grid and one per iteration.
    """
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    model = model or default_model()
    grid = initial.copy() if initial is not None else random_initial_grid(L, r, seed)
    prop = Propagator(model, target)
    phis, infids = [], []
    writer = _TraceWriter(trace_path)
    for it in range(iterations + 1):
        states = prop.forward(grid, keep=True)
        final = states[-1]
        phi = prop.overlap(final).real / prop.n_states
        phis.append(phi)
        infids.append(1.0 - prop.fidelity_d24(final))
        writer.write(iteration=it, phi=phi, infidelity=infids[-1], pulses=grid.pulse_count())
        if it == iterations:
            break
        chis = prop.costates(grid)
        grad = np.zeros_like(grid.values)
        for k in range(grid.L):
            for j, l in enumerate(grid.pairs(k)):
                if grid.mask[k, j]:
                    grad[k, j] = np.pi * _im_inner(chis[k + 1], prop.hvec(l, states[k + 1])) / prop.n_states
        grid.values += lr * grad
    writer.close()
    return GrapeResult(grid, phis, infids)


# --- Krotov -------------------------------------------------------------------


@dataclass
class KrotovConfig:
    """Settings of :func:`krotov_optimize`.

    ``shape`` multiplies the update of each entry; it defaults to 1 on free
    entries and is forced to 0 on masked ones.  With ``sequential`` (the
    default) the four controls of a step are updated one after another, each
    seeing the pulses already updated; otherwise they are updated together.
    ``safeguard`` halves any update that would locally raise ``J_T,re``.
    """

    epsilon: float = 1e-8
    lambda_l: float = 1.0
    shape: np.ndarray | None = None
    max_iterations: int = 5000
    stall_window: int = 50
    stall_tolerance: float = 1e-12
    sequential: bool = True
    safeguard: bool = True
    p_max: float = DEFAULT_P_MAX

    def __post_init__(self):
        if self.lambda_l <= 0:
            raise ValueError("lambda_l must be positive")
        if self.shape is not None:
            self.shape = np.asarray(self.shape, dtype=float)
            if self.shape.min() < 0 or self.shape.max() > 1:
                raise ValueError("shape values must lie in [0, 1]")


@dataclass
class KrotovResult:
    grid: ControlGrid
    trace: list[float]
    converged: bool
    reason: str
    iterations: int

    @property
    def final_jtre(self) -> float:
        return self.trace[-1]


def _inner(a, b) -> complex:
    return complex(sum(np.vdot(x, y) for x, y in zip(a, b)))


def _slice_gain(w: complex, delta: float) -> float:
    """Exact change of ``Re <chi|phi>`` when one pulse moves by ``delta``.

    ``w = <chi_before|H_l|phi_before>``; uses ``H U(p) = e^{i pi p} H``.
    """
    return -((np.exp(1j * np.pi * delta) - 1.0) * w).real


def krotov_update_sweep(prop: Propagator, grid: ControlGrid, chis, weights: np.ndarray,
                        sequential: bool, p_max: float, safeguard: bool = True) -> tuple:
    """One forward sweep of first-order Krotov updates; mutates ``grid``.

    ``chis[n]`` is the co-state after step ``n`` under the old controls and
    ``weights`` is ``S / lambda`` per entry.  The change of ``J_T,re`` over
    a sweep telescopes into per-step (per-pulse when ``sequential``) terms
    ``Re <chi_after|phi_after> - Re <chi_before|phi_before>``.  With
    ``safeguard`` an update whose term would be negative is halved until it
    is not, which makes every sweep monotone.  Returns the final state and
    the number of halvings.
    """
    phi = prop.initial
    halvings = 0
    for k in range(grid.L):
        pairs = grid.pairs(k)
        old = grid.values[k].copy()
        if not sequential:
            chi = chis[k]
            delta = np.zeros(SLOTS)
            for j, l in enumerate(pairs):
                if weights[k, j] != 0:
                    g = np.pi * _im_inner(chi, prop.hvec(l, phi))
                    delta[j] = np.clip(old[j] + weights[k, j] * g, -p_max, p_max) - old[j]
            base = _inner(chi, phi).real
            while True:
                grid.values[k] = old + delta
                new_phi = prop.step(pairs, grid.values[k], phi)
                if not safeguard or _inner(chis[k + 1], new_phi).real >= base or not delta.any():
                    break
                delta = 0.5 * delta
                if np.abs(delta).max() < 1e-15:
                    delta[:] = 0.0
                halvings += 1
            phi = new_phi
        else:
            # the four commuting pulses act as consecutive slices
            befores = [chis[k + 1]]
            for j in range(SLOTS - 1, -1, -1):
                befores.append(prop.step(pairs[j:j + 1], old[j:j + 1], befores[-1], adjoint=True))
            befores = befores[::-1]  # befores[j]: co-state before slice j
            for j, l in enumerate(pairs):
                hphi = prop.hvec(l, phi)
                if weights[k, j] != 0:
                    w = _inner(befores[j], hphi)
                    d = np.clip(old[j] + weights[k, j] * np.pi * w.imag, -p_max, p_max) - old[j]
                    while safeguard and d != 0 and _slice_gain(w, d) < 0:
                        d = 0.5 * d if abs(d) > 1e-15 else 0.0
                        halvings += 1
                    grid.values[k, j] = old[j] + d
                p = grid.values[k, j]
                if p != 0:
                    c = np.exp(1j * np.pi * p) - 1.0
                    phi = tuple(x - c * h for x, h in zip(phi, hphi))
    return phi, halvings


def krotov_optimize(model: EoModel | None, target: TargetGate, initial: ControlGrid,
                    config: KrotovConfig | None = None, mask: np.ndarray | None = None,
                    trace_path=None) -> KrotovResult:
    """First-order Krotov iterations with co-states ``chi(T) = target / (2N)``.

    Each iteration propagates the co-states backward under the current
    controls, then sweeps forward updating
    ``p += (S / lambda) Im sum_k <chi_k| pi H_l |phi_k>`` step by step.
    Stops when ``J_T,re < epsilon`` (converged), at ``max_iterations`` or
    when the relative improvement over ``stall_window`` iterations falls
    below ``stall_tolerance``.
    """
    model = model or default_model()
    config = config or KrotovConfig()
    grid = initial.copy()
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != grid.values.shape:
            raise ValueError("mask shape does not match the grid")
        if np.any(grid.values[~mask] != 0):
            raise ValueError("initial grid has nonzero entries where the mask is fixed")
        grid.mask = mask & grid.mask
    shape = np.ones_like(grid.values) if config.shape is None else np.broadcast_to(config.shape, grid.values.shape)
    weights = np.where(grid.mask, shape, 0.0) / config.lambda_l
    prop = Propagator(model, target)
    writer = _TraceWriter(trace_path)
    scale = 1.0 / (2 * prop.n_states)

    trace = [prop.jtre(prop.forward(grid))]
    writer.write(iteration=0, jtre=trace[0], pulses=grid.pulse_count())
    reason = "converged" if trace[0] < config.epsilon else "max_iterations"
    it = 0
    while trace[-1] >= config.epsilon and it < config.max_iterations:
        it += 1
        chis = prop.costates(grid, scale)
        final, halved = krotov_update_sweep(prop, grid, chis, weights, config.sequential,
                                            config.p_max, config.safeguard)
        trace.append(prop.jtre(final))
        writer.write(iteration=it, jtre=trace[-1], pulses=grid.pulse_count(), halvings=halved)
        if trace[-1] < config.epsilon:
            reason = "converged"
        elif it >= config.stall_window:
            ref = trace[-1 - config.stall_window]
            if (ref - trace[-1]) < config.stall_tolerance * abs(ref):
                reason = "stalled"
                break
    writer.close()
    converged = trace[-1] < config.epsilon
    if converged:
        reason = "converged"
    return KrotovResult(grid, trace, converged, reason, it)


# --- Jenga-Krotov -------------------------------------------------------------


@dataclass
class JkState:
    """Bookkeeping of a pruning run.

    ``M`` has shape ``4 x L``: -1 unexplored, 0 removed, 1 removal failed.
    Entries fixed by the input mask start (and stay) at 0.
    """

    M: np.ndarray
    history: list[dict] = field(default_factory=list)

    @property
    def n_ex(self) -> int:
        return int(np.count_nonzero(self.M))

    def as_dict(self) -> dict:
        return {"M": self.M.tolist(), "n_ex": self.n_ex, "history": self.history}


@dataclass
class JengaConfig:
    """Settings of :func:`jenga_prune`; ``krotov`` is used for every attempt."""

    krotov: KrotovConfig = field(default_factory=lambda: KrotovConfig(max_iterations=2000))


@dataclass
class JengaResult:
    sequence: PulseSequence
    state: JkState
    grid: ControlGrid
    final_jtre: float


def jenga_prune(model: EoModel | None, target: TargetGate, converged: ControlGrid,
                config: JengaConfig | None = None, seed=None, log_path=None,
                progress=None) -> JengaResult:
    """Prune pulses one at a time, re-optimizing after each removal.

    Unexplored entries are picked uniformly at random.  The chosen entry is
    zeroed and fixed, and Krotov re-optimizes the rest warm-started from the
    current grid.  A removal is kept if ``J_T,re`` drops below ``epsilon``;
    otherwise the pre-attempt grid is restored.  Finally, all-zero steps
    are deleted.
    """
    model = model or default_model()
    config = config or JengaConfig()
    kcfg = config.krotov
    grid = converged.copy()
    if grid_jtre(model, target, grid) >= kcfg.epsilon:
        raise ValueError("input grid is not converged below epsilon")
    rng = np.random.default_rng(seed)
    M = np.where(grid.mask.T, -1, 0).astype(int)
    state = JkState(M)
    writer = _TraceWriter(log_path)
    attempt = 0
    while np.any(state.M == -1):
        candidates = np.argwhere(state.M == -1)
        j, k = candidates[rng.integers(len(candidates))]
        attempt += 1
        trial = grid.copy()
        trial.values[k, j] = 0.0
        trial.mask[k, j] = False
        res = krotov_optimize(model, target, trial, kcfg)
        accepted = res.converged
        if accepted:
            grid = res.grid
            state.M[j, k] = 0
        else:
            state.M[j, k] = 1
        record = {
            "attempt": attempt,
            "step": int(k) + 1,
            "slot": int(j),
            "accepted": bool(accepted),
            "jtre": res.final_jtre,
            "krotov_iterations": res.iterations,
            "n_ex": state.n_ex,
        }
        state.history.append(record)
        writer.write(**record)
        if progress is not None:
            progress(record)
    writer.close()
    seq = grid.to_sequence(name="toffoli_jk", source="jenga_prune", drop_empty=True, p_max=kcfg.p_max)
    final = grid_jtre(model, target, grid)
    return JengaResult(seq, state, grid, final)


# --- traces -------------------------------------------------------------------


class _TraceWriter:
    """Append JSON lines to ``path`` (no-op when ``path`` is None)."""

    def __init__(self, path):
        # line-buffered so long runs can be followed while they execute
        self._fh = Path(path).open("w", buffering=1) if path is not None else None

    def write(self, **record):
        if self._fh is not None:
            self._fh.write(json.dumps(record) + "\n")

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_trace(path) -> list[dict]:
    with Path(path).open() as fh:
        return [json.loads(line) for line in fh if line.strip()]
