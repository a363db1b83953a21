"""Monte Carlo over classical noise realizations.

Each realization of the white-noise field enters the evolution only through
its accumulated phase, because the noise Hamiltonians commute at different
times. For white noise with ``<B(t)B(t')> = (Gamma/mu^2) delta(t-t')`` the
phase ``mu * int_0^t B`` is Gaussian with variance ``Gamma t``; it is sampled
exactly. A small-step Euler path integrator is available for cross-checking.

Randomness is keyed by ``(seed, block)``: trajectories are grouped in blocks
of ``BLOCK_SIZE`` and block ``b`` draws from its own spawned stream, always
generating a full block. Trajectory ``k`` therefore sees the same draws for
any ``N > k`` and any number of workers, and per-block statistics are merged
in block order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np

from esdlab.channels import DephasingRates
from esdlab.qmat import as_matrix

BLOCK_SIZE = 4096
PATH_STEP = 1e-3  # Gamma * dt of the Euler path mode
Z_THRESHOLD = 5.0
ABS_TOL = 1e-12
STDERR_FLOOR = 1e-15

_UPPER = np.triu_indices(4, k=1)


@dataclass(frozen=True)
class StochasticConfig:
    """Monte Carlo settings.

    ``mu`` is the gyromagnetic ratio; it rescales the field but cancels from
    every phase statistic.
    """

    rates: DephasingRates
    trajectories: int
    seed: int = 0
    mu: float = 1.0
    mode: Literal["exact", "euler"] = "exact"
    workers: int = 1

    def __post_init__(self):
        if self.trajectories < 1:
            raise ValueError("need at least one trajectory")
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValueError("mu must be positive")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.mode not in ("exact", "euler"):
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def field_rates(self) -> tuple[float, ...]:
        r = self.rates
        return (r.gamma,) if r.model == "global" else (r.gamma_a, r.gamma_b)


def sample_phase(gamma: float, t: float, rng: np.random.Generator, mu: float = 1.0) -> float:
    """Accumulated phase ``mu * int_0^t B`` of one white-noise realization."""
    if gamma < 0 or t < 0:
        raise ValueError("gamma and t must be non-negative")
    if gamma == 0 or t == 0:
        return 0.0
    field_integral = rng.normal(0.0, math.sqrt(gamma * t) / mu)
    return mu * field_integral


def trajectory_unitary_global(phi: float) -> np.ndarray:
    """Evolution operator of one collective-noise realization, ``diag(e^{i phi}, 1, 1, e^{-i phi})``."""
    angles = _global_angles(np.array([[phi]], dtype=float))[0]
    return np.diag(np.exp(1j * angles))


def trajectory_unitary_local(phi_a: float, phi_b: float) -> np.ndarray:
    """Evolution operator of one realization of the two independent fields."""
    angles = _local_angles(np.array([[phi_a, phi_b]], dtype=float))[0]
    return np.diag(np.exp(1j * angles))


def _global_angles(phases: np.ndarray) -> np.ndarray:
    phi = phases[:, 0]
    zero = np.zeros_like(phi)
    return np.stack([phi, zero, zero, -phi], axis=1)


def _local_angles(phases: np.ndarray) -> np.ndarray:
    pa, pb = phases[:, 0], phases[:, 1]
    return 0.5 * np.stack([pa + pb, pa - pb, pb - pa, -(pa + pb)], axis=1)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def block_phases(cfg: StochasticConfig, t: float, block: int) -> np.ndarray:
    """Phases of all ``BLOCK_SIZE`` trajectories of one block, shape ``(BLOCK_SIZE, n_fields)``."""
    rates = np.array(cfg.field_rates)
    rng = _block_rng(cfg.seed, block)
    shape = (BLOCK_SIZE, rates.size)
    if cfg.mode == "exact":
        field = rng.standard_normal(shape) * (np.sqrt(rates * t) / cfg.mu)
    else:
        steps = max(1, math.ceil(rates.max() * t / PATH_STEP)) if t > 0 else 0
        dt = t / steps if steps else 0.0
        scale = np.sqrt(rates * dt) / cfg.mu
        field = np.zeros(shape)
        for _ in range(steps):
            field += rng.standard_normal(shape) * scale
    return cfg.mu * field


@dataclass(frozen=True)
class _BlockStats:
    n: int
    factor_sum: np.ndarray  # sum of e^{i(theta_i - theta_j)} over trajectories, per upper pair
    mean: np.ndarray        # mean of (re, im) of the trajectory terms, shape (2, 6)
    m2: np.ndarray          # sum of squared deviations, shape (2, 6)


def _block_stats(rho0: np.ndarray, t: float, cfg: StochasticConfig, block: int) -> _BlockStats:
    count = min(BLOCK_SIZE, cfg.trajectories - block * BLOCK_SIZE)
    phases = block_phases(cfg, t, block)[:count]
    angles = _global_angles(phases) if cfg.rates.model == "global" else _local_angles(phases)
    i, j = _UPPER
    factors = np.exp(1j * (angles[:, i] - angles[:, j]))
    terms = rho0[i, j] * factors
    parts = np.stack([terms.real, terms.imag])
    mean = parts.mean(axis=1)
    m2 = ((parts - mean[:, None, :]) ** 2).sum(axis=1)
    return _BlockStats(count, factors.sum(axis=0), mean, m2)


def _merge(a: _BlockStats, b: _BlockStats) -> _BlockStats:
    n = a.n + b.n
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.n / n)
    m2 = a.m2 + b.m2 + delta ** 2 * (a.n * b.n / n)
    return _BlockStats(n, a.factor_sum + b.factor_sum, mean, m2)


@dataclass(frozen=True, eq=False)
class EnsembleEstimate:
    """Sample mean of ``U rho0 U^H`` and standard errors of its real and imaginary parts."""

    mean: np.ndarray
    stderr_re: np.ndarray
    stderr_im: np.ndarray
    n: int


def ensemble_evolve(rho0, t: float, cfg: StochasticConfig) -> EnsembleEstimate:
    """Average ``U_k rho0 U_k^H`` over ``cfg.trajectories`` noise realizations.

    The mean of each coherence is ``rho0_ij`` times the averaged phase factor,
    so entries whose factor is identically one (populations, and the
    ``|+-><-+|`` coherence under collective noise) reproduce ``rho0`` exactly.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    m = as_matrix(rho0)
    n_blocks = -(-cfg.trajectories // BLOCK_SIZE)
    if cfg.workers == 1 or n_blocks == 1:
        stats = [_block_stats(m, t, cfg, b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            stats = list(pool.map(lambda b: _block_stats(m, t, cfg, b), range(n_blocks)))
    total = stats[0]
    for s in stats[1:]:
        total = _merge(total, s)

    n = total.n
    i, j = _UPPER
    mean = np.diag(np.diag(m).real).astype(complex)
    mean[i, j] = m[i, j] * (total.factor_sum / n)
    mean[j, i] = mean[i, j].conj()

    stderr = np.zeros((2, 4, 4))
    if n > 1:
        upper = np.sqrt(total.m2 / (n - 1)) / math.sqrt(n)
        stderr[:, i, j] = upper
        stderr[0, j, i] = upper[0]
        stderr[1, j, i] = upper[1]
    return EnsembleEstimate(mean, stderr[0], stderr[1], n)


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    """Elementwise agreement between a Monte Carlo estimate and a prediction."""

    estimate: np.ndarray
    predicted: np.ndarray
    stderr_re: np.ndarray
    stderr_im: np.ndarray
    z_re: np.ndarray
    z_im: np.ndarray
    threshold: float = Z_THRESHOLD

    @property
    def max_z(self) -> float:
        return float(max(self.z_re.max(), self.z_im.max()))

    @property
    def passed(self) -> bool:
        return self.max_z <= self.threshold


def _z_scores(diff: np.ndarray, stderr: np.ndarray) -> np.ndarray:
    absolute = stderr < STDERR_FLOOR
    z = np.abs(diff) / np.where(absolute, 1.0, stderr)
    return np.where(absolute, np.where(np.abs(diff) <= ABS_TOL, 0.0, np.inf), z)


def compare_to_channel(est: EnsembleEstimate, predicted) -> ComparisonReport:
    """z-scores of ``est`` against ``predicted``, real and imaginary parts separately.

    Entries with a standard error below 1e-15 are compared absolutely at 1e-12
    and score 0 or infinity.
    """
    p = as_matrix(predicted)
    diff = est.mean - p
    return ComparisonReport(
        est.mean, p, est.stderr_re, est.stderr_im,
        _z_scores(diff.real, est.stderr_re), _z_scores(diff.imag, est.stderr_im))
