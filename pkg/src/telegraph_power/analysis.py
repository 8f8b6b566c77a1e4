"""Power-law fits in log-log space and the distribution / CV sweeps built on them."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .exceptions import InfeasibleError, ParameterError, UsageError
from .switching import (
    DistributionSpec,
    Family,
    child_seed,
    empirical_frequency,
    spec_for_target,
)
from .sweep import SweepResult
from .telegraph import DEFAULT_BURN_IN, DEFAULT_EVENTS, estimate_bound

__all__ = [
    "PowerLawRegressor",
    "PowerLawFit",
    "fit_power_law",
    "fit_sweep",
    "FIT_MIN_FREQUENCY",
    "R2_FLAG",
    "DISTRIBUTION_SWEEPS",
    "distribution_sweep",
    "CvFit",
    "cv_sweep",
    "cv_slope_table",
    "DEFAULT_CVS",
    "DdeScaling",
    "dde_scaling",
]

FIT_MIN_FREQUENCY = 10.0
R2_FLAG = 0.98


class PowerLawRegressor(RegressorMixin, BaseEstimator):
    """Least-squares line through ``(log10 x, log10 y)``.

    Parameters
    ----------
    min_x : float, optional
        Samples with ``x < min_x`` are ignored by ``fit``.

    Attributes
    ----------
    slope_ : float
    log_intercept_ : float
        ``log10`` of the prefactor, so ``y ~ 10**log_intercept_ * x**slope_``.
    r_squared_ : float
        Coefficient of determination of the log-log fit.
    n_points_ : int
    x_range_ : tuple of float
    """

    def __init__(self, min_x=None):
        self.min_x = min_x

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_samples=1, y_numeric=True)
        if X.shape[1] != 1:
            raise UsageError(f"expected a single feature, got {X.shape[1]}")
        x = X[:, 0]
        if np.any(x <= 0) or np.any(y <= 0):
            raise ParameterError("points", "power-law fits need strictly positive x and y")
        if self.min_x is not None:
            keep = x >= self.min_x
            x, y = x[keep], y[keep]
        if x.size < 3:
            raise UsageError(f"need at least 3 points for a fit, got {x.size}")
        lx, ly = np.log10(x), np.log10(y)
        cx, cy = lx - lx.mean(), ly - ly.mean()
        sxx = float(cx @ cx)
        if sxx == 0:
            raise UsageError("all x values coincide")
        slope = float(cx @ cy) / sxx
        resid = cy - slope * cx
        ss_tot = float(cy @ cy)
        ss_res = float(resid @ resid)
        r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
        self.slope_ = slope
        self.log_intercept_ = float(ly.mean() - slope * lx.mean())
        self.r_squared_ = min(1.0, max(0.0, r2))
        self.n_points_ = int(x.size)
        self.x_range_ = (float(x.min()), float(x.max()))
        return self

    def predict(self, X):
        check_is_fitted(self)
        X = check_array(X)
        return 10.0**self.log_intercept_ * X[:, 0] ** self.slope_

    def score(self, X, y, sample_weight=None):
        """R^2 of ``log10 y`` against the fitted line (not of ``y`` itself)."""
        check_is_fitted(self)
        X, y = check_X_y(X, y)
        ly = np.log10(y)
        pred = self.log_intercept_ + self.slope_ * np.log10(X[:, 0])
        from sklearn.metrics import r2_score

        return r2_score(ly, pred, sample_weight=sample_weight)

    def to_fit(self):
        check_is_fitted(self)
        return PowerLawFit(self.slope_, self.log_intercept_, self.r_squared_, self.n_points_, self.x_range_)


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    log_intercept: float
    r_squared: float
    n_points: int
    f_range: tuple

    @property
    def prefactor(self):
        return 10.0**self.log_intercept

    @property
    def flagged(self):
        """Goodness-of-fit warning; the fit is kept either way."""
        return self.r_squared < R2_FLAG


def fit_power_law(points, k=None, min_frequency=None):
    """Fit ``K ~ c f^slope`` by ordinary least squares on ``log10``.

    ``points`` is either a sequence of ``(f, K)`` pairs or, when ``k`` is
    given, the array of ``f`` values.
    """
    if k is None:
        arr = np.asarray(points, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise UsageError("points must be a sequence of (f, K) pairs")
        f, k = arr[:, 0], arr[:, 1]
    else:
        f, k = np.asarray(points, dtype=float), np.asarray(k, dtype=float)
    if f.size < 3:
        raise UsageError(f"need at least 3 points for a fit, got {f.size}")
    return PowerLawRegressor(min_x=min_frequency).fit(f.reshape(-1, 1), k).to_fit()


def fit_sweep(sweep, x="f_d", y="K_F", min_frequency=FIT_MIN_FREQUENCY):
    """Fit two columns of a sweep, skipping NaN rows."""
    xs, ys = sweep[x], sweep[y]
    ok = np.isfinite(xs) & np.isfinite(ys)
    return fit_power_law(xs[ok], ys[ok], min_frequency=min_frequency)


def _log_interior(lo, hi, n):
    return np.geomspace(lo, hi, n + 2)[1:-1]


@dataclass(frozen=True)
class _SweepDef:
    family: Family
    parameter: str
    fixed: dict
    low: float
    high: float
    log_spaced: bool

    def grid(self, n):
        if self.log_spaced:
            return _log_interior(self.low, self.high, n)
        return np.linspace(self.low, self.high, n + 2)[1:-1]

    def spec(self, value, fixed=None):
        params = dict(self.fixed if fixed is None else fixed)
        params[self.parameter] = float(value)
        return DistributionSpec(self.family, params)


DISTRIBUTION_SWEEPS = {
    Family.EXPONENTIAL: _SweepDef(Family.EXPONENTIAL, "lam", {}, 1.0, 1000.0, True),
    Family.GAMMA: _SweepDef(Family.GAMMA, "beta", {"alpha": 2.0}, 1.0, 1000.0, True),
    Family.BETA: _SweepDef(Family.BETA, "beta", {"alpha": 2.0}, 1.0, 1000.0, True),
    Family.LOGNORMAL: _SweepDef(Family.LOGNORMAL, "mu", {"sigma": 1.0}, -10.0, -0.5, False),
}


def _estimate_point(args):
    spec, n_events, seed, burn_in = args
    seq, est = estimate_bound(spec, n_events, seed, burn_in)
    return empirical_frequency(seq), est.k_f


def _run_points(jobs, n_jobs):
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            return list(pool.map(_estimate_point, jobs))
    return [_estimate_point(j) for j in jobs]


def distribution_sweep(family, grid=None, n_events=DEFAULT_EVENTS, seed=0, fixed=None,
                       n_points=30, burn_in_fraction=DEFAULT_BURN_IN, n_jobs=1):
    """Rows ``(parameter, f_d, K_F)`` over one parameter of an interval law.

    Default grids: exponential ``lam`` and gamma/beta ``beta`` (with
    ``alpha = 2``) log-spaced in ``(1, 1000)``, log-normal ``mu``
    (``sigma = 1``) evenly spaced in ``(-10, -0.5)``. Grid point ``i`` uses seed ``child_seed(seed, i)``.
    ``f_d`` is the empirical frequency of the realized sequence.
    """
    family = Family(family)
    if family not in DISTRIBUTION_SWEEPS:
        raise ParameterError("family", f"no sweep defined for {family.value}")
    sdef = DISTRIBUTION_SWEEPS[family]
    grid = sdef.grid(n_points) if grid is None else np.asarray(grid, dtype=float)
    jobs = [
        (sdef.spec(value, fixed), int(n_events), child_seed(seed, i), burn_in_fraction)
        for i, value in enumerate(grid)
    ]
    results = _run_points(jobs, n_jobs)
    rows = [(value, f, k) for value, (f, k) in zip(grid, results)]
    meta = {
        "family": family.value,
        "parameter": sdef.parameter,
        "fixed": dict(sdef.fixed if fixed is None else fixed),
        "n_events": int(n_events),
        "seed": int(seed),
        "burn_in_fraction": burn_in_fraction,
    }
    return SweepResult.from_rows((sdef.parameter, "f_d", "K_F"), rows, meta)


DEFAULT_CVS = (0.01, 2.0, 4.0, 6.0, 8.0, 10.0)


@dataclass(frozen=True)
class CvFit:
    """Fit of ``K_F`` against ``f_d`` at one coefficient of variation.

    ``fit`` is ``None`` when fewer than three grid points were feasible;
    ``infeasible`` lists the target frequencies that could not be realized.
    """

    cv: float
    fit: PowerLawFit | None
    sweep: SweepResult
    infeasible: tuple


def cv_sweep(family, cvs=DEFAULT_CVS, frequencies=None, n_events=DEFAULT_EVENTS, seed=0,
             burn_in_fraction=DEFAULT_BURN_IN, min_frequency=FIT_MIN_FREQUENCY, n_jobs=1):
    """Slope of the power law as a function of the interval CV.

    For each CV the mean interval is pinned to ``1 / f`` at every target
    frequency ``f`` (30 log-spaced values in ``[10, 1000]`` by default), so
    frequency and CV vary independently. Point ``(i, j)`` uses seed
    ``child_seed(seed, i, j)``.
    """
    family = Family(family)
    if family not in (Family.GAMMA, Family.BETA, Family.LOGNORMAL):
        raise ParameterError("family", f"cv sweeps need gamma, beta or lognormal, got {family.value}")
    freqs = np.geomspace(10.0, 1000.0, 30) if frequencies is None else np.asarray(frequencies, dtype=float)
    out = []
    for i, cv in enumerate(cvs):
        jobs, targets, infeasible = [], [], []
        for j, f in enumerate(freqs):
            try:
                spec = spec_for_target(family, cv, 1.0 / f)
            except InfeasibleError:
                infeasible.append(float(f))
                continue
            jobs.append((spec, int(n_events), child_seed(seed, i, j), burn_in_fraction))
            targets.append(f)
        results = _run_points(jobs, n_jobs)
        rows = [(f_target, f, k) for f_target, (f, k) in zip(targets, results)]
        rows += [(f_target, np.nan, np.nan) for f_target in infeasible]
        sweep = SweepResult.from_rows(
            ("f_target", "f_d", "K_F"),
            rows,
            {"family": family.value, "cv": float(cv), "n_events": int(n_events), "seed": int(seed)},
        )
        fit = None
        if len(targets) >= 3:
            try:
                fit = fit_sweep(sweep, min_frequency=min_frequency)
            except UsageError:
                fit = None
        out.append(CvFit(float(cv), fit, sweep, tuple(infeasible)))
    return out


def cv_slope_table(family, fits):
    """One row per CV: ``(cv, slope, log_intercept, r_squared, n_points, n_infeasible)``."""
    rows = []
    for c in fits:
        if c.fit is None:
            rows.append((c.cv, np.nan, np.nan, np.nan, 0, len(c.infeasible)))
        else:
            f = c.fit
            rows.append((c.cv, f.slope, f.log_intercept, f.r_squared, f.n_points, len(c.infeasible)))
    return SweepResult.from_rows(
        ("cv", "slope", "log_intercept", "r_squared", "n_points", "n_infeasible"),
        rows,
        {"family": Family(family).value},
    )


@dataclass(frozen=True)
class DdeScaling:
    """Fits over a ``beta`` sweep.

    ``half_power_prefactor`` is ``c`` in ``f_d = c * beta**0.5`` with the
    exponent held at one half (least squares in log space).
    """

    frequency_vs_beta: PowerLawFit
    bound_vs_frequency: PowerLawFit
    bound_vs_beta: PowerLawFit
    half_power_prefactor: float


def dde_scaling(sweep):
    beta, f, k = sweep["beta"], sweep["f_d"], sweep["K"]
    return DdeScaling(
        fit_power_law(beta, f),
        fit_power_law(f, k),
        fit_power_law(beta, k),
        float(np.exp(np.mean(np.log(f / np.sqrt(beta))))),
    )
