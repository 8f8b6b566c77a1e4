"""Sampled scalar trajectories."""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import UsageError


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped samples of a scalar state.

    ``meta`` echoes the configuration that produced the samples.
    """

    times: np.ndarray
    states: np.ndarray
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.times.shape != self.states.shape or self.times.ndim != 1:
            raise UsageError("times and states must be 1-D arrays of equal length")

    def __len__(self):
        return self.states.size

    def window(self, start):
        """Samples with ``t >= start``."""
        i = int(np.searchsorted(self.times, start, side="left"))
        return self.times[i:], self.states[i:]
