"""Random switch-interval sequences for the telegraph force.

Every interval law is sampled with NumPy's ``Generator`` on a ``PCG64`` bit
generator seeded by a single unsigned 64-bit integer, so a ``(spec, count,
seed)`` triple always reproduces the same intervals bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, NamedTuple

import numpy as np

from .exceptions import InfeasibleError, ParameterError, UsageError

__all__ = [
    "Family",
    "DistributionSpec",
    "SwitchSequence",
    "Moments",
    "sample_intervals",
    "sample_until",
    "theoretical_moments",
    "spec_for_target",
    "empirical_frequency",
    "child_seed",
]

UINT64_MAX = 2**64 - 1


class Family(str, Enum):
    CONSTANT = "constant"
    EXPONENTIAL = "exponential"
    GAMMA = "gamma"
    BETA = "beta"
    LOGNORMAL = "lognormal"


# parameter names per family, in constructor order
_PARAM_NAMES = {
    Family.CONSTANT: ("d",),
    Family.EXPONENTIAL: ("lam",),
    Family.GAMMA: ("alpha", "beta"),
    Family.BETA: ("alpha", "beta"),
    Family.LOGNORMAL: ("mu", "sigma"),
}
_UNRESTRICTED = {(Family.LOGNORMAL, "mu")}


@dataclass(frozen=True)
class DistributionSpec:
    """Parameterized law of the switch intervals ``d_k``.

    Parameters are keyed by name: ``d`` (constant), ``lam`` (exponential
    rate), ``alpha``/``beta`` (gamma shape/rate, beta shapes) and
    ``mu``/``sigma`` (log-normal). Use the classmethod constructors rather
    than building the mapping by hand.
    """

    family: Family
    params: Mapping[str, float]

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        names = _PARAM_NAMES[family]
        if set(self.params) != set(names):
            raise ParameterError(
                "params", f"{family.value} expects {names}, got {tuple(self.params)}"
            )
        clean = {}
        for name in names:
            value = float(self.params[name])
            if not math.isfinite(value):
                raise ParameterError(name, f"must be finite, got {value!r}")
            if (family, name) not in _UNRESTRICTED and value <= 0:
                raise ParameterError(name, f"must be > 0, got {value!r}")
            clean[name] = value
        object.__setattr__(self, "params", clean)

    @classmethod
    def constant(cls, d):
        return cls(Family.CONSTANT, {"d": d})

    @classmethod
    def exponential(cls, lam):
        return cls(Family.EXPONENTIAL, {"lam": lam})

    @classmethod
    def gamma(cls, alpha, beta):
        """Gamma law with shape ``alpha`` and *rate* ``beta``."""
        return cls(Family.GAMMA, {"alpha": alpha, "beta": beta})

    @classmethod
    def beta(cls, alpha, beta):
        return cls(Family.BETA, {"alpha": alpha, "beta": beta})

    @classmethod
    def lognormal(cls, mu, sigma):
        return cls(Family.LOGNORMAL, {"mu": mu, "sigma": sigma})

    def __getitem__(self, name):
        return self.params[name]

    def describe(self):
        body = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{self.family.value}({body})"


@dataclass(frozen=True)
class SwitchSequence:
    """Realized intervals ``d_k`` and switch times ``t_k`` (``t_0 = 0``).

    ``times`` has one more entry than ``intervals``; ``times[k + 1]`` is
    ``times[k] + intervals[k]`` computed by sequential accumulation. An
    interval below the rounding resolution of ``times[k]`` leaves the time
    unchanged; the interval itself is kept exactly as drawn.
    """

    intervals: np.ndarray
    times: np.ndarray
    seed: int
    spec: DistributionSpec | None = field(default=None, repr=False)

    @classmethod
    def from_intervals(cls, intervals, spec=None, seed=0):
        d = np.ascontiguousarray(intervals, dtype=np.float64)
        if d.ndim != 1 or d.size == 0:
            raise UsageError("intervals must be a non-empty 1-D array")
        if not np.all(d > 0):
            raise ParameterError("intervals", "every interval must be > 0")
        times = np.empty(d.size + 1)
        times[0] = 0.0
        # add.accumulate is strictly sequential, so t_{k+1} == t_k + d_k bitwise
        np.add.accumulate(d, out=times[1:])
        d.setflags(write=False)
        times.setflags(write=False)
        return cls(intervals=d, times=times, seed=int(seed), spec=spec)

    def __len__(self):
        return self.intervals.size

    @property
    def horizon(self):
        return float(self.times[-1])


class Moments(NamedTuple):
    mean: float
    variance: float
    cv: float


def _check_seed(seed):
    seed = int(seed)
    if not 0 <= seed <= UINT64_MAX:
        raise ParameterError("seed", f"must be an unsigned 64-bit integer, got {seed}")
    return seed


def child_seed(master, *key):
    """Derive an independent 64-bit seed for grid point ``key`` of a sweep.

    Uses ``SeedSequence(master, spawn_key=key)``; the result depends only on
    the master seed and the key, so extending a grid leaves existing points
    untouched.
    """
    ss = np.random.SeedSequence(_check_seed(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _draw(rng, spec, n):
    p = spec.params
    fam = spec.family
    if fam is Family.CONSTANT:
        return np.full(n, p["d"])
    if fam is Family.EXPONENTIAL:
        return rng.exponential(1.0 / p["lam"], n)
    if fam is Family.GAMMA:
        return rng.gamma(p["alpha"], 1.0 / p["beta"], n)
    if fam is Family.BETA:
        return rng.beta(p["alpha"], p["beta"], n)
    if fam is Family.LOGNORMAL:
        return rng.lognormal(p["mu"], p["sigma"], n)
    raise AssertionError(fam)


def _positive_draws(rng, spec, n):
    d = _draw(rng, spec, n)
    # floating point can return exact zeros for small shape parameters
    bad = np.flatnonzero(d <= 0)
    while bad.size:
        d[bad] = _draw(rng, spec, bad.size)
        bad = bad[d[bad] <= 0]
    return d


def sample_intervals(spec, count, seed):
    """Draw ``count`` i.i.d. intervals from ``spec``.

    Parameters
    ----------
    spec : DistributionSpec
    count : int
        Number of intervals, at least 1.
    seed : int
        Unsigned 64-bit seed of the ``PCG64`` generator.

    Returns
    -------
    SwitchSequence
    """
    count = int(count)
    if count < 1:
        raise ParameterError("count", f"must be >= 1, got {count}")
    seed = _check_seed(seed)
    rng = np.random.Generator(np.random.PCG64(seed))
    return SwitchSequence.from_intervals(_positive_draws(rng, spec, count), spec=spec, seed=seed)


def sample_until(spec, horizon, seed, min_count=16):
    """Draw intervals until the switch times reach ``horizon``.

    The count is grown geometrically and the whole sequence redrawn from the
    same seed, so the result is a deterministic function of ``(spec, seed)``.
    """
    if horizon <= 0:
        raise ParameterError("horizon", f"must be > 0, got {horizon}")
    mean = theoretical_moments(spec).mean
    count = max(int(min_count), int(1.25 * horizon / mean) + 16)
    while True:
        seq = sample_intervals(spec, count, seed)
        if seq.times[-1] >= horizon:
            return seq
        count *= 2


def theoretical_moments(spec):
    """Closed-form mean, variance and coefficient of variation of ``spec``."""
    p = spec.params
    fam = spec.family
    if fam is Family.CONSTANT:
        return Moments(p["d"], 0.0, 0.0)
    if fam is Family.EXPONENTIAL:
        lam = p["lam"]
        return Moments(1.0 / lam, 1.0 / lam**2, 1.0)
    if fam is Family.GAMMA:
        a, b = p["alpha"], p["beta"]
        return Moments(a / b, a / b**2, 1.0 / math.sqrt(a))
    if fam is Family.BETA:
        a, b = p["alpha"], p["beta"]
        s = a + b
        return Moments(a / s, a * b / (s * s * (s + 1.0)), math.sqrt(b / (a * (s + 1.0))))
    if fam is Family.LOGNORMAL:
        mu, s2 = p["mu"], p["sigma"] ** 2
        g = math.expm1(s2)
        return Moments(math.exp(mu + s2 / 2), g * math.exp(2 * mu + s2), math.sqrt(g))
    raise AssertionError(fam)


def spec_for_target(family, cv, mean):
    """Return the spec of ``family`` with the given mean and CV.

    Raises
    ------
    InfeasibleError
        If the family cannot attain ``(cv, mean)``, e.g. a beta law with
        ``cv >= sqrt((1 - mean) / mean)``.
    """
    family = Family(family)
    cv, mean = float(cv), float(mean)
    if not math.isfinite(mean) or mean <= 0:
        raise ParameterError("mean", f"must be > 0, got {mean!r}")
    if not math.isfinite(cv) or cv < 0:
        raise ParameterError("cv", f"must be >= 0, got {cv!r}")

    if family is Family.CONSTANT:
        if cv != 0:
            raise InfeasibleError(f"constant law has cv = 0, requested {cv}")
        return DistributionSpec.constant(mean)
    if family is Family.EXPONENTIAL:
        if abs(cv - 1.0) > 1e-12:
            raise InfeasibleError(f"exponential law has cv = 1, requested {cv}")
        return DistributionSpec.exponential(1.0 / mean)
    if cv == 0:
        raise InfeasibleError(f"{family.value} law requires cv > 0")
    if family is Family.GAMMA:
        alpha = 1.0 / cv**2
        return DistributionSpec.gamma(alpha, alpha / mean)
    if family is Family.BETA:
        if mean >= 1:
            raise InfeasibleError(f"beta law requires mean < 1, requested {mean}")
        bound = math.sqrt((1.0 - mean) / mean)
        if cv >= bound:
            raise InfeasibleError(
                f"beta law with mean {mean} requires cv < {bound:.6g}, requested {cv}"
            )
        total = (1.0 - mean) / (mean * cv**2) - 1.0
        return DistributionSpec.beta(mean * total, (1.0 - mean) * total)
    if family is Family.LOGNORMAL:
        s2 = math.log1p(cv**2)
        return DistributionSpec.lognormal(math.log(mean) - s2 / 2, math.sqrt(s2))
    raise AssertionError(family)


def empirical_frequency(seq):
    """Switching frequency ``1 / mean(d_k)`` of a sequence or interval array."""
    d = seq.intervals if isinstance(seq, SwitchSequence) else np.asarray(seq, dtype=float)
    if d.size == 0:
        raise UsageError("cannot compute a frequency from an empty sequence")
    return 1.0 / float(np.mean(d))
