"""Quasi-static charge noise and crosstalk on exchange pulse sequences.

Charge noise rescales every pulse, ``p -> (1 + alpha) p``.  Crosstalk lets a
pulse on pair ``(l, l+1)`` also drive its neighbouring pairs with relative
strength ``beta``; the resulting step generator no longer splits into
commuting pieces and is exponentiated by eigendecomposition.  One draw of
``alpha`` (``beta``) is shared by every pulse of a realization.
"""
from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eo_model import DIM, N_COMP, N_PAIRS, SECTOR_SPLIT, EoModel, TargetGate, default_model
from .pulse_sequence import PulseSequence, PulseStep, apply_step, d24_fidelity, trace_overlap

KINDS = ("charge", "crosstalk")
CSV_HEADER = ("kind", "mean", "sample_count", "mean_infidelity", "stderr")
THREADS_ENV = "EOQUBIT_THREADS"


def default_workers() -> int:
    """Worker count from ``EOQUBIT_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class NoiseConfig:
    """Monte Carlo settings.

    ``alpha_bar`` and ``beta_bar`` are the mean strengths used for whichever
    noise kind is not being swept; each draw is normal with standard
    deviation ``relative_sigma * mean``.
    """

    alpha_bar: float = 0.0
    beta_bar: float = 0.0
    relative_sigma: float = 0.1
    samples: int = 100
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if self.alpha_bar < 0 or self.beta_bar < 0:
            raise ValueError("mean noise strengths must be non-negative")


# --- propagators --------------------------------------------------------------


def step_generator(step: PulseStep, model: EoModel, alpha: float = 0.0, beta: float = 0.0) -> np.ndarray:
    """``pi * sum_l (1 + alpha) p_l [H_l + beta (H_{l-1} + H_{l+1})]`` (90 x 90, real)."""
    gens = model.generators
    out = np.zeros((DIM, DIM))
    for l in step.active_pairs:
        w = np.pi * (1.0 + alpha) * step.values[l - 1]
        out += w * gens[l - 1]
        if beta:
            for nb in (l - 1, l + 1):
                if 1 <= nb <= N_PAIRS:
                    out += w * beta * gens[nb - 1]
    return out


def _expm_sector(H: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * w)) @ V.T


def noisy_step_propagator(step: PulseStep, model: EoModel | None = None,
                          alpha: float = 0.0, beta: float = 0.0) -> np.ndarray:
    """90 x 90 propagator of one step under charge noise and crosstalk.

    The exponential is taken per total-spin sector with ``numpy.linalg.eigh``.
    """
    model = model or default_model()
    H = step_generator(step, model, alpha, beta)
    s = SECTOR_SPLIT
    U = np.zeros((DIM, DIM), dtype=complex)
    U[:s, :s] = _expm_sector(H[:s, :s])
    U[s:, s:] = _expm_sector(H[s:, s:])
    return U


def noisy_columns(seq: PulseSequence, model: EoModel | None = None,
                  alpha: float = 0.0, beta: float = 0.0) -> np.ndarray:
    """Computational columns (90 x 24) of the noisy sequence propagator.

    Without crosstalk the step factors still commute, so the closed form is
    applied to the rescaled amplitudes; it agrees with the eigendecomposition
    to round-off.
    """
    model = model or default_model()
    cols = np.eye(DIM, dtype=complex)[:, model.comp_index]
    for step in seq.steps:
        if not step.active_pairs:
            continue
        if beta == 0:
            scaled = PulseStep(tuple((1.0 + alpha) * v for v in step.values), step.parity, p_max=np.inf)
            cols = apply_step(scaled, cols, model)
        else:
            cols = noisy_step_propagator(step, model, alpha, beta) @ cols
    return cols


def infidelity_at(seq: PulseSequence, target: TargetGate, model: EoModel | None = None,
                  alpha: float = 0.0, beta: float = 0.0) -> float:
    """d = 24 gate infidelity for fixed (deterministic) noise strengths."""
    model = model or default_model()
    cols = noisy_columns(seq, model, alpha, beta)
    return 1.0 - d24_fidelity(trace_overlap(cols, target), N_COMP)


# --- Monte Carlo ------------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloResult:
    mean_infidelity: float
    stderr: float
    samples: np.ndarray = field(repr=False)


def sample_strengths(kind: str, mean: float, config: NoiseConfig, grid_index: int = 0) -> np.ndarray:
    """``(samples, 2)`` array of ``(alpha, beta)`` draws.

    Each sample has its own generator seeded by ``(seed, grid_index, i)``, so
    a draw never depends on the worker layout and two sweeps with the same
    configuration see identical noise.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if mean < 0:
        raise ValueError("mean noise strength must be non-negative")
    means = {"charge": config.alpha_bar, "crosstalk": config.beta_bar}
    means[kind] = mean
    out = np.empty((config.samples, 2))
    for i in range(config.samples):
        rng = np.random.default_rng([config.seed, grid_index, i])
        z = rng.standard_normal(2)
        out[i, 0] = means["charge"] * (1.0 + config.relative_sigma * z[0])
        out[i, 1] = means["crosstalk"] * (1.0 + config.relative_sigma * z[1])
    return out


def monte_carlo_infidelity(seq: PulseSequence, model: EoModel | None, target: TargetGate,
                           kind: str, mean: float, config: NoiseConfig | None = None,
                           grid_index: int = 0) -> MonteCarloResult:
    """Average d = 24 infidelity over quasi-static noise realizations."""
    model = model or default_model()
    config = config or NoiseConfig()
    draws = sample_strengths(kind, mean, config, grid_index)

    def one(ab):
        return infidelity_at(seq, target, model, alpha=ab[0], beta=ab[1])

    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            vals = np.array(list(pool.map(one, draws)))
    else:
        vals = np.array([one(ab) for ab in draws])
    stderr = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return MonteCarloResult(float(vals.mean()), stderr, vals)


@dataclass(frozen=True)
class SweepRow:
    mean: float
    mean_infidelity: float
    stderr: float
    sample_count: int


@dataclass(frozen=True)
class NoiseSweepResult:
    kind: str
    rows: tuple[SweepRow, ...]
    label: str = ""

    @property
    def means(self) -> np.ndarray:
        return np.array([r.mean for r in self.rows])

    @property
    def infidelities(self) -> np.ndarray:
        return np.array([r.mean_infidelity for r in self.rows])

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in self.rows:
                writer.writerow([self.kind, repr(r.mean), r.sample_count,
                                 repr(r.mean_infidelity), repr(r.stderr)])


def log_grid(lo: float = 1e-8, hi: float = 1e-1, points: int = 8) -> np.ndarray:
    """Log-spaced strengths from ``lo`` to ``hi`` inclusive."""
    if not 0 < lo < hi or points < 2:
        raise ValueError("need 0 < lo < hi and at least two points")
    return np.logspace(np.log10(lo), np.log10(hi), points)


def noise_sweep(seq: PulseSequence, model: EoModel | None, target: TargetGate, kind: str,
                grid, config: NoiseConfig | None = None, label: str = "") -> NoiseSweepResult:
    """Monte Carlo infidelity at every strength of ``grid`` (strictly increasing)."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    config = config or NoiseConfig()
    rows = []
    for i, mean in enumerate(grid):
        res = monte_carlo_infidelity(seq, model, target, kind, float(mean), config, grid_index=i)
        rows.append(SweepRow(float(mean), res.mean_infidelity, res.stderr, config.samples))
    return NoiseSweepResult(kind, tuple(rows), label or seq.name)


def robustness_sweep(seq_a: PulseSequence, seq_b: PulseSequence, model: EoModel | None,
                     target: TargetGate, kind: str, grid, config: NoiseConfig | None = None
                     ) -> tuple[NoiseSweepResult, NoiseSweepResult]:
    """Paired sweeps of two sequences with common random numbers."""
    return (noise_sweep(seq_a, model, target, kind, grid, config),
            noise_sweep(seq_b, model, target, kind, grid, config))


def loglog_slope(strengths, infidelities) -> float:
    """Least-squares slope of log(infidelity) against log(strength)."""
    x = np.log(np.asarray(strengths, dtype=float))
    y = np.log(np.asarray(infidelities, dtype=float))
    return float(np.polyfit(x, y, 1)[0])
