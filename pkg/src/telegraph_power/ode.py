"""Generic fixed-step RK4 for right-hand sides that jump at known times.

Slow, pure Python and deliberately unspecialized: it is the independent
reference that the closed-form and compiled paths are checked against.
"""

import math

import numpy as np


def rk4_piecewise(rhs, y0, breakpoints, max_step):
    """Integrate ``y' = rhs(t, y, k)`` across ``breakpoints``.

    ``k`` is the index of the piece ``[breakpoints[k], breakpoints[k+1])``
    being integrated, so a right-hand side that is discontinuous at the
    breakpoints is always evaluated on the correct side. Each piece is cut
    into ``ceil(length / max_step)`` equal steps.

    Returns
    -------
    ndarray
        ``y`` at every breakpoint, ``out[0] == y0``.
    """
    b = np.asarray(breakpoints, dtype=float)
    out = np.empty(b.size)
    y = float(y0)
    out[0] = y
    for k in range(b.size - 1):
        t, end = b[k], b[k + 1]
        n = max(1, math.ceil((end - t) / max_step))
        dt = (end - t) / n
        for i in range(n):
            s = t + i * dt
            k1 = rhs(s, y, k)
            k2 = rhs(s + dt / 2, y + dt / 2 * k1, k)
            k3 = rhs(s + dt / 2, y + dt / 2 * k2, k)
            k4 = rhs(s + dt, y + dt * k3, k)
            y += dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        out[k + 1] = y
    return out
