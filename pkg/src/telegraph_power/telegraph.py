"""Event-exact solution of ``v' = -v + F(t)`` under telegraph forcing.

Between switches ``F`` is constant, so the solution relaxes exponentially
toward ``+1`` or ``-1`` and the whole trajectory is fixed by its values at
the switch times. Nothing here steps an ODE.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exceptions import OutOfRangeError, ParameterError, UsageError
from .switching import DistributionSpec, SwitchSequence, sample_intervals
from .sweep import SweepResult

__all__ = [
    "TelegraphForce",
    "SwitchValues",
    "BoundEstimate",
    "force_at",
    "iterate_switch_values",
    "exact_solution_at",
    "upper_bound_estimate",
    "analytic_bound_constant",
    "estimate_bound",
    "constant_d_sweep",
    "DEFAULT_BURN_IN",
    "DEFAULT_EVENTS",
]

DEFAULT_BURN_IN = 0.5
DEFAULT_EVENTS = 10**6


def _require_unit_gamma(gamma):
    if gamma != 1.0:
        raise ParameterError("gamma", f"only gamma = 1 is supported, got {gamma!r}")


@dataclass(frozen=True)
class TelegraphForce:
    """``F = +1`` on ``[t_2k, t_2k+1)`` and ``-1`` on ``[t_2k+1, t_2k+2)``."""

    sequence: SwitchSequence
    initial_sign: int = 1

    def __post_init__(self):
        if self.initial_sign != 1:
            raise ParameterError("initial_sign", "the force always starts at +1")

    @classmethod
    def from_intervals(cls, intervals):
        return cls(SwitchSequence.from_intervals(intervals))

    @property
    def times(self):
        return self.sequence.times

    @property
    def intervals(self):
        return self.sequence.intervals


@dataclass(frozen=True)
class SwitchValues:
    """``values[k] = v(t_k)`` for the force that produced them."""

    values: np.ndarray
    gamma: float = 1.0
    v0: float = 0.0

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class BoundEstimate:
    k_f: float
    burn_in_fraction: float
    n_events: int


def _locate(force, t):
    t = np.asarray(t, dtype=float)
    times = force.times
    if np.any(t < 0) or np.any(t >= times[-1]):
        raise OutOfRangeError(
            f"t must lie in [0, {times[-1]!r}); generate more intervals to go further"
        )
    return t, np.searchsorted(times, t, side="right") - 1


def force_at(force, t):
    """Value of ``F`` at ``t`` (scalar or array)."""
    t, k = _locate(force, t)
    f = np.where(k % 2 == 0, 1, -1)
    return int(f) if f.ndim == 0 else f


def iterate_switch_values(force, gamma=1.0, v0=0.0):
    """Switch values from the closed-form recursion.

    ``v_{2k+1} = 1 + (v_{2k} - 1) exp(-d_{2k})`` and
    ``v_{2k+2} = -1 + (v_{2k+1} + 1) exp(-d_{2k+1})``, starting at ``v_0 = 0``.
    """
    _require_unit_gamma(gamma)
    if v0 != 0.0:
        raise ParameterError("v0", "the initial value is fixed at 0")
    d = force.intervals
    out = np.empty(d.size + 1)
    _kernels.switch_values(d, 0.0, out)
    out.setflags(write=False)
    return SwitchValues(out, gamma=1.0, v0=0.0)


def exact_solution_at(force, values, t):
    """Evaluate the piecewise-exponential solution at ``t`` (scalar or array)."""
    t, k = _locate(force, t)
    target = np.where(k % 2 == 0, 1.0, -1.0)
    v = target + (values.values[k] - target) * np.exp(-(t - force.times[k]))
    return float(v) if v.ndim == 0 else v


def upper_bound_estimate(values, burn_in_fraction=DEFAULT_BURN_IN):
    """Tail maximum of ``|v_k|`` as an estimate of ``K_F``.

    Only indices ``k > burn_in_fraction * len(values)`` are used. Since the
    solution is monotone between switches, its supremum over continuous time
    is attained at a switch time.
    """
    if not 0.0 <= burn_in_fraction < 1.0:
        raise ParameterError("burn_in_fraction", f"must lie in [0, 1), got {burn_in_fraction!r}")
    v = values.values if isinstance(values, SwitchValues) else np.asarray(values, dtype=float)
    if v.size == 0:
        raise UsageError("no switch values")
    start = int(np.floor(burn_in_fraction * v.size)) + 1
    tail = v[start:]
    if tail.size == 0:
        raise UsageError("every switch value falls inside the burn-in window")
    return BoundEstimate(float(np.max(np.abs(tail))), float(burn_in_fraction), int(tail.size))


def analytic_bound_constant(d):
    """``K_F = (1 - e^{-d}) / (1 + e^{-d})`` for constant intervals, as ``tanh(d / 2)``."""
    d_arr = np.asarray(d, dtype=float)
    if np.any(~(d_arr > 0)):
        raise ParameterError("d", f"must be > 0, got {d!r}")
    k = np.tanh(d_arr / 2)
    return float(k) if k.ndim == 0 else k


def estimate_bound(spec, n_events, seed, burn_in_fraction=DEFAULT_BURN_IN):
    """Sample a sequence from ``spec`` and return ``(sequence, BoundEstimate)``."""
    seq = sample_intervals(spec, n_events, seed)
    values = iterate_switch_values(TelegraphForce(seq))
    return seq, upper_bound_estimate(values, burn_in_fraction)


def constant_d_sweep(frequencies, n_events=10**5, burn_in_fraction=DEFAULT_BURN_IN):
    """``K_F`` against ``f_d = 1/d`` for constant intervals.

    Each row carries the closed form and the tail maximum of the simulated
    recursion as a cross-check.
    """
    f = np.asarray(frequencies, dtype=float)
    if f.size == 0 or np.any(~(f > 0)):
        raise ParameterError("frequencies", "must be a non-empty list of positive values")
    rows = []
    for fd in f:
        d = 1.0 / fd
        _, est = estimate_bound(DistributionSpec.constant(d), n_events, 0, burn_in_fraction)
        rows.append((fd, analytic_bound_constant(d), est.k_f))
    return SweepResult.from_rows(
        ("f_d", "K_analytic", "K_simulated"),
        rows,
        {"family": "constant", "n_events": int(n_events), "burn_in_fraction": burn_in_fraction},
    )
