"""Escape from the double well ``phi(x) = x^2 - 2x^3 + x^4`` under telegraph forcing.

The switch intervals are log-normal with ``sigma = 1``; lowering ``mu``
raises the switching frequency ``f_d = exp(-(mu + 1/2))`` and shrinks the
excursions around ``x = 0`` until the barrier at ``x = 0.5`` is never
reached within the horizon.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .exceptions import HorizonError, ParameterError
from .switching import DistributionSpec, child_seed, sample_until
from .sweep import SweepResult
from .trajectory import Trajectory

__all__ = [
    "DoubleWellConfig",
    "EscapeRecord",
    "Density",
    "potential",
    "potential_gradient",
    "potential_curvature",
    "simulate_double_well",
    "first_crossing_time",
    "Ensemble",
    "simulate_ensemble",
    "average_survival_time",
    "trajectory_density",
    "mu_sweep",
    "default_mus",
    "count_local_maxima",
    "is_bimodal",
    "DENSITY_RANGE",
]

DENSITY_RANGE = (-0.5, 1.5)


def potential(x):
    return x**2 - 2 * x**3 + x**4


def potential_gradient(x):
    return 2 * x - 6 * x**2 + 4 * x**3


def potential_curvature(x):
    return 2 - 12 * x + 12 * x**2


@dataclass(frozen=True)
class DoubleWellConfig:
    mu: float
    sigma: float = 1.0
    horizon: float = 120.0
    step: float = 1e-3
    barrier: float = 0.5
    n_realizations: int = 200
    seed: int = 0
    burn_in_fraction: float = 0.1

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ParameterError("mu", f"must be finite, got {self.mu!r}")
        for name in ("sigma", "horizon", "step"):
            if not getattr(self, name) > 0:
                raise ParameterError(name, f"must be > 0, got {getattr(self, name)!r}")
        if not 0.0 < self.barrier < 1.0:
            raise ParameterError("barrier", f"must lie strictly between the wells 0 and 1, got {self.barrier!r}")
        if int(self.n_realizations) < 1:
            raise ParameterError("n_realizations", f"must be >= 1, got {self.n_realizations!r}")
        if not 0.0 <= self.burn_in_fraction < 1.0:
            raise ParameterError("burn_in_fraction", f"must lie in [0, 1), got {self.burn_in_fraction!r}")

    @property
    def spec(self):
        return DistributionSpec.lognormal(self.mu, self.sigma)

    @property
    def frequency(self):
        """``1 / <d_k>`` of the interval law."""
        return math.exp(-(self.mu + self.sigma**2 / 2))

    def realization_seed(self, i):
        return child_seed(self.seed, i)


@dataclass(frozen=True)
class EscapeRecord:
    """First up-crossing of the barrier, or ``None`` if it never happened."""

    first_crossing_time: float | None
    seed: int

    def survival_time(self, horizon):
        return horizon if self.first_crossing_time is None else self.first_crossing_time


@dataclass(frozen=True)
class Density:
    edges: np.ndarray
    density: np.ndarray

    @property
    def centers(self):
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def widths(self):
        return np.diff(self.edges)

    def total_mass(self):
        return float(np.sum(self.density * self.widths))


def simulate_double_well(config, seq, x0=0.0):
    """Integrate ``x' = -phi'(x) + F(t)`` on ``[0, config.horizon]``.

    RK4 with at most ``config.step`` per step; steps are cut at every switch
    time so ``F`` never changes inside a step. Samples are the step ends, so
    the time grid is not uniform.
    """
    times = seq.times
    if times[-1] < config.horizon:
        raise HorizonError(
            f"switch sequence ends at t = {times[-1]!r} before the horizon {config.horizon!r}"
        )
    n_pieces = int(np.searchsorted(times, config.horizon, side="left"))
    cap = int(math.ceil(config.horizon / config.step)) + n_pieces + 2
    t_out = np.empty(cap)
    x_out = np.empty(cap)
    n = _kernels.double_well_rk4(times, float(config.horizon), float(config.step), float(x0), t_out, x_out)
    return Trajectory(t_out[:n], x_out[:n], {"config": config, "seed": seq.seed})


def first_crossing_time(traj, barrier):
    """Time of the first up-crossing of ``barrier``, linearly interpolated."""
    x = traj.states
    above = np.flatnonzero(x >= barrier)
    if above.size == 0:
        return None
    j = int(above[0])
    if j == 0:
        return float(traj.times[0])
    t0, t1 = traj.times[j - 1], traj.times[j]
    x0, x1 = x[j - 1], x[j]
    return float(t0 + (t1 - t0) * (barrier - x0) / (x1 - x0))


def _occupancy(traj, start, edges):
    t, x = traj.times, traj.states
    dt = np.diff(t)
    keep = t[:-1] >= start
    hist, _ = np.histogram(x[1:][keep], bins=edges, weights=dt[keep])
    return hist


@dataclass(frozen=True)
class Ensemble:
    config: DoubleWellConfig
    records: tuple
    density: Density

    def survival_times(self):
        return np.array([r.survival_time(self.config.horizon) for r in self.records])

    def average_survival_time(self):
        return float(np.mean(self.survival_times()))


def simulate_ensemble(config, bins=50, x_range=DENSITY_RANGE):
    """Run every realization once, collecting escape records and occupancy."""
    edges = np.linspace(x_range[0], x_range[1], int(bins) + 1)
    weight = np.zeros(int(bins))
    records = []
    start = config.burn_in_fraction * config.horizon
    for i in range(int(config.n_realizations)):
        seed = config.realization_seed(i)
        seq = sample_until(config.spec, config.horizon, seed)
        traj = simulate_double_well(config, seq)
        records.append(EscapeRecord(first_crossing_time(traj, config.barrier), seed))
        weight += _occupancy(traj, start, edges)
    density = weight / (weight.sum() * np.diff(edges))
    return Ensemble(config, tuple(records), Density(edges, density))


def average_survival_time(config):
    """Mean first-passage time over the barrier, capped at the horizon."""
    return simulate_ensemble(config).average_survival_time()


def trajectory_density(config, bins=50, x_range=DENSITY_RANGE):
    """Time-occupancy histogram of ``x`` after burn-in, pooled over realizations."""
    if int(bins) < 10:
        raise ParameterError("bins", f"must be >= 10, got {bins!r}")
    return simulate_ensemble(config, bins, x_range).density


def default_mus(n=20, low=-6.0, high=-0.5):
    return np.linspace(low, high, n)


def mu_sweep(mus=None, template=None, n_jobs=1, bins=50):
    """Rows ``(mu, f_d, AST, median_survival, escaped_fraction)``.

    ``metadata["mu_star"]`` is the largest ``mu`` whose AST equals the
    horizon (NaN if none). ``metadata["densities"]`` and
    ``metadata["survival_times"]`` map each ``mu`` to its :class:`Density`
    and to the per-realization survival times.
    """
    mus = default_mus() if mus is None else np.asarray(mus, dtype=float)
    template = template or DoubleWellConfig(mu=-6.0)
    configs = [replace(template, mu=float(m)) for m in mus]

    def point(cfg):
        return simulate_ensemble(cfg, bins)

    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            ensembles = list(pool.map(point, configs))
    else:
        ensembles = [point(c) for c in configs]

    rows = []
    densities, survival = {}, {}
    for cfg, ens in zip(configs, ensembles):
        s = ens.survival_times()
        survival[cfg.mu] = s
        escaped = sum(r.first_crossing_time is not None for r in ens.records)
        rows.append((cfg.mu, cfg.frequency, float(np.mean(s)), float(np.median(s)), escaped / s.size))
        densities[cfg.mu] = ens.density
    stable = [r[0] for r in rows if r[2] == template.horizon]
    meta = {
        "horizon": template.horizon,
        "step": template.step,
        "sigma": template.sigma,
        "n_realizations": template.n_realizations,
        "seed": template.seed,
        "mu_star": max(stable) if stable else float("nan"),
        "densities": densities,
        "survival_times": survival,
    }
    return SweepResult.from_rows(("mu", "f_d", "AST", "median_survival", "escaped_fraction"), rows, meta)


def count_local_maxima(density):
    """Number of strict peaks, treating a flat top as a single peak."""
    p = np.concatenate(([0.0], np.asarray(density, dtype=float), [0.0]))
    peaks = 0
    i = 1
    while i < p.size - 1:
        j = i
        while j + 1 < p.size - 1 and p[j + 1] == p[i]:
            j += 1
        if p[i] > 0 and p[i] > p[i - 1] and p[i] > p[j + 1]:
            peaks += 1
        i = j + 1
    return peaks


def is_bimodal(dens, barrier=0.5):
    """True when each side of the barrier bin holds a peak above the barrier bin."""
    b = int(np.searchsorted(dens.edges, barrier, side="right")) - 1
    p = dens.density
    left, right = p[:b], p[b + 1:]
    if left.size == 0 or right.size == 0:
        return False
    return bool(p[b] < min(left.max(), right.max()))
