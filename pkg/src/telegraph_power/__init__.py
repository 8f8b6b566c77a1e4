"""Amplitude bounds of a damped system under random telegraph forcing.

Switching at frequency ``f_d`` bounds the response of ``v' = -v + F(t)``
by ``K_F``, which falls off as a power of ``f_d`` whose exponent depends
on the law of the switch intervals.
"""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    ConfigurationError,
    HorizonError,
    InfeasibleError,
    OutOfRangeError,
    ParameterError,
    TelegraphError,
    UsageError,
)
from .switching import (  # noqa: E402
    DistributionSpec,
    Family,
    SwitchSequence,
    child_seed,
    empirical_frequency,
    sample_intervals,
    spec_for_target,
    theoretical_moments,
)
from .sweep import SweepResult  # noqa: E402
from .telegraph import (  # noqa: E402
    TelegraphForce,
    analytic_bound_constant,
    constant_d_sweep,
    exact_solution_at,
    force_at,
    iterate_switch_values,
    upper_bound_estimate,
)
from .analysis import PowerLawFit, PowerLawRegressor, fit_power_law  # noqa: E402
