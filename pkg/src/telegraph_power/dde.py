"""Deterministic Brownian motion from ``v' = -v + sin(2 pi beta v(t - 1))``.

The delay is fixed at 1 and the step must divide it, so every delayed node
lookup lands exactly on a stored grid value.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np

from . import _kernels
from .exceptions import ConfigurationError, ParameterError, UsageError
from .sweep import SweepResult
from .trajectory import Trajectory

__all__ = [
    "DdeConfig",
    "SignChangeStats",
    "integrate_dde",
    "sign_change_stats",
    "dde_upper_bound",
    "beta_sweep",
    "default_betas",
]

DELAY = 1.0

History = Union[float, Callable[[np.ndarray], np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DdeConfig:
    """Integration settings for one value of ``beta``.

    ``history`` is the initial function on ``[-1, 0]``: a constant, a
    vectorized callable, or an array of values on the ``1/step + 1`` grid
    nodes of ``[-1, 0]`` (interpolated with a cubic spline).
    """

    beta: float
    step: float = 1e-3
    horizon: float = 1e4
    history: History = 0.1
    burn_in_time: float = 1e3
    gamma: float = 1.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ParameterError("beta", f"must be > 0, got {self.beta!r}")
        if self.gamma != 1.0:
            raise ParameterError("gamma", f"only gamma = 1 is supported, got {self.gamma!r}")
        if not self.step > 0:
            raise ConfigurationError(f"step must be > 0, got {self.step!r}")
        m = round(DELAY / self.step)
        if m < 1 or abs(m * self.step - DELAY) > 1e-9 * DELAY:
            raise ConfigurationError(f"step {self.step!r} does not divide the delay {DELAY}")
        n = round(self.horizon / self.step)
        if abs(n * self.step - self.horizon) > 1e-9 * max(1.0, self.horizon):
            raise ConfigurationError(f"step {self.step!r} does not divide the horizon {self.horizon!r}")
        if not self.horizon > self.burn_in_time >= DELAY:
            raise ConfigurationError(
                f"need horizon > burn_in_time >= {DELAY}, got {self.horizon!r}, {self.burn_in_time!r}"
            )

    @property
    def nodes_per_delay(self):
        return round(DELAY / self.step)

    @property
    def n_steps(self):
        return round(self.horizon / self.step)

    def grid_step(self):
        """Step size consistent with the integer node count per delay."""
        return DELAY / self.nodes_per_delay


@dataclass(frozen=True)
class SignChangeStats:
    change_times: np.ndarray
    frequency: float
    window: float

    @property
    def count(self):
        return self.change_times.size


def _history_arrays(config):
    m = config.nodes_per_delay
    h = config.grid_step()
    nodes = -DELAY + h * np.arange(m + 1)
    mids = nodes[:-1] + h / 2
    hist = config.history
    if np.isscalar(hist):
        c = float(hist)
        return np.full(m + 1, c), np.zeros(m + 1), np.full(m, c)
    if callable(hist):
        eps = 1e-6
        v = np.asarray(hist(nodes), dtype=float)
        dv = (np.asarray(hist(nodes + eps), float) - np.asarray(hist(nodes - eps), float)) / (2 * eps)
        return v, dv, np.asarray(hist(mids), dtype=float)
    from scipy.interpolate import CubicSpline

    table = np.asarray(hist, dtype=float)
    if table.shape != (m + 1,):
        raise ConfigurationError(f"tabulated history needs {m + 1} node values, got {table.shape}")
    spline = CubicSpline(nodes, table)
    return table.copy(), spline(nodes, 1), spline(mids)


def integrate_dde(config):
    """Fixed-step RK4 solution on the uniform grid ``0, h, ..., T``.

    Returns
    -------
    Trajectory
        ``meta`` holds the configuration.
    """
    m, n = config.nodes_per_delay, config.n_steps
    h = config.grid_step()
    hv, hdv, hmid = _history_arrays(config)
    states = np.empty(n + 1)
    _kernels.dde_rk4(float(config.beta), 1.0, h, m, n, hv, hdv, hmid, states)
    times = h * np.arange(n + 1)
    return Trajectory(times, states, {"config": config})


def sign_change_stats(traj, burn_in_time):
    """Zero crossings of ``v`` after ``burn_in_time`` and their mean rate.

    A crossing is a sign flip between consecutive nonzero samples, dated by
    linear interpolation. When exact zeros sit between the two samples the
    flip is dated at the first zero node; touching zero without a flip is not
    a crossing. Every flip counts once.
    """
    t, v = traj.window(burn_in_time)
    if t.size == 0:
        raise UsageError(f"no samples after t = {burn_in_time!r}")
    start = max(float(burn_in_time), float(traj.times[0]))
    length = float(t[-1]) - start
    if length <= 0:
        raise UsageError("the post-burn-in window has zero length")

    nz = np.flatnonzero(v != 0)
    if nz.size < 2:
        return SignChangeStats(np.empty(0), 0.0, length)
    pos = v[nz] > 0
    j = np.flatnonzero(pos[1:] != pos[:-1])
    a, b = nz[j], nz[j + 1]
    adjacent = b == a + 1
    va, vb = v[a], v[b]
    with np.errstate(invalid="ignore", divide="ignore"):
        interp = t[a] + (t[b] - t[a]) * va / (va - vb)
    first_zero = t[np.minimum(a + 1, t.size - 1)]
    times = np.where(adjacent, interp, first_zero)
    return SignChangeStats(times, times.size / length, length)


def dde_upper_bound(traj, burn_in_time):
    """``max |v|`` over the post-burn-in window."""
    _, v = traj.window(burn_in_time)
    if v.size == 0:
        raise UsageError(f"no samples after t = {burn_in_time!r}")
    return float(np.max(np.abs(v)))


def default_betas(n=20, low=3.0, high=200.0):
    """``n`` log-spaced values strictly inside ``(low, high)``."""
    return np.geomspace(low, high, n + 2)[1:-1]


def _sweep_point(config):
    traj = integrate_dde(config)
    stats = sign_change_stats(traj, config.burn_in_time)
    return config.beta, stats.frequency, dde_upper_bound(traj, config.burn_in_time)


def beta_sweep(betas=None, template=None, n_jobs=1):
    """Rows ``(beta, f_d, K)`` over a grid of ``beta``.

    ``template`` supplies every setting except ``beta``. Points are
    independent; with ``n_jobs > 1`` they run on a thread pool (the compiled
    integrator releases the GIL) and are merged in grid order.
    """
    betas = default_betas() if betas is None else np.asarray(betas, dtype=float)
    template = template or DdeConfig(beta=1.0)
    configs = [replace(template, beta=float(b)) for b in betas]
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            rows = list(pool.map(_sweep_point, configs))
    else:
        rows = [_sweep_point(c) for c in configs]
    meta = {
        "step": template.step,
        "horizon": template.horizon,
        "burn_in_time": template.burn_in_time,
        "history": template.history if np.isscalar(template.history) else "custom",
    }
    return SweepResult.from_rows(("beta", "f_d", "K"), rows, meta)

