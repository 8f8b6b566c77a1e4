"""Tabular sweep results and their CSV form."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .exceptions import UsageError

__all__ = ["SweepResult", "format_number"]


def format_number(x):
    """Fixed 17-significant-digit rendering used in every CSV."""
    return "%.17g" % x


@dataclass(frozen=True)
class SweepResult:
    """Rows of a parameter sweep, sorted by the first (swept) column.

    Attributes
    ----------
    columns : tuple of str
        Column names; ``columns[0]`` is the swept parameter.
    data : ndarray of shape (n_rows, n_columns)
    metadata : dict
        Free-form provenance (family, fixed parameters, seeds, ...).
    """

    columns: tuple
    data: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, ndmin=2)
        if data.size == 0:
            data = data.reshape(0, len(self.columns))
        if data.shape[1] != len(self.columns):
            raise UsageError(f"{data.shape[1]} data columns for {len(self.columns)} names")
        order = np.argsort(data[:, 0], kind="stable")
        data = data[order]
        data.setflags(write=False)
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "data", data)

    @classmethod
    def from_rows(cls, columns, rows, metadata=None):
        rows = list(rows)
        data = np.array(rows, dtype=np.float64) if rows else np.empty((0, len(columns)))
        return cls(tuple(columns), data, dict(metadata or {}))

    def __len__(self):
        return self.data.shape[0]

    def __getitem__(self, name):
        try:
            return self.data[:, self.columns.index(name)]
        except ValueError:
            raise KeyError(name) from None

    @property
    def parameter(self):
        return self.columns[0]

    def to_csv(self, path=None):
        """Render as comma-separated text with one header row.

        Writes to ``path`` when given; always returns the text.
        """
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for row in self.data:
            buf.write(",".join(format_number(x) for x in row) + "\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text
