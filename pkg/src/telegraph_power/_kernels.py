"""Compiled inner loops. All kernels release the GIL."""

import math

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def switch_values(intervals, v0, out):
    """``out[k + 1] = s_k + (out[k] - s_k) * exp(-d_k)`` with ``s_k = (-1)**k``.

    Evaluated as ``v + (s - v) * (1 - exp(-d))`` with ``expm1`` so tiny
    intervals do not lose digits.
    """
    v = v0
    out[0] = v
    for k in range(intervals.shape[0]):
        s = 1.0 if k % 2 == 0 else -1.0
        v = v + (s - v) * -math.expm1(-intervals[k])
        out[k + 1] = v
    return out


@numba.njit(cache=True, nogil=True)
def dde_rk4(beta, gamma, h, m, n, hist_v, hist_dv, hist_mid, out):
    """RK4 on ``v' = -gamma v + sin(2 pi beta v(t - 1))`` with ``h = 1/m``.

    ``hist_v``/``hist_dv`` hold the initial function and its derivative on the
    ``m + 1`` nodes of ``[-1, 0]``; ``hist_mid`` holds it at the ``m``
    midpoints. Delayed node values are read from a ring buffer of the last
    ``m + 1`` nodes. The delayed midpoint needed by the two middle stages is
    the quintic Hermite interpolant of the bracketing nodes, built from
    ``v``, ``v'`` and ``v''`` which the equation gives in closed form.
    """
    w = 2.0 * math.pi * beta
    r = m + 1
    vr = np.empty(r)
    dr = np.empty(r)
    gr = np.empty(r)
    gm = np.empty(m)
    for j in range(r):
        vr[j] = hist_v[j]
        dr[j] = hist_dv[j]
        gr[j] = math.sin(w * hist_v[j])
    for j in range(m):
        gm[j] = math.sin(w * hist_mid[j])

    v = hist_v[m]
    out[0] = v
    d0 = -gamma * v + gr[0]
    dd0 = -gamma * d0 + math.cos(w * vr[0]) * w * dr[0]
    # v' jumps at t = 0 in general, so v'' jumps at t = 1
    d_right0 = d0
    for i in range(n):
        s0 = i % r
        s1 = (i + 1) % r
        if i == m:
            dd0 = -gamma * d0 + math.cos(w * vr[s0]) * w * d_right0
        g1 = gr[s0]
        g2 = gm[i % m]
        g4 = gr[s1]
        k1 = -gamma * v + g1
        k2 = -gamma * (v + 0.5 * h * k1) + g2
        k3 = -gamma * (v + 0.5 * h * k2) + g2
        k4 = -gamma * (v + h * k3) + g4
        vn = v + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        d1 = -gamma * vn + g4
        dd1 = -gamma * d1 + math.cos(w * vr[s1]) * w * dr[s1]
        vm = 0.5 * (v + vn) + 5.0 * h * (d0 - d1) / 32.0 + h * h * (dd0 + dd1) / 64.0
        # node i + m + 1 takes the ring slot of node i, which is no longer needed
        vr[s0] = vn
        dr[s0] = d1
        gr[s0] = math.sin(w * vn)
        gm[i % m] = math.sin(w * vm)
        v = vn
        d0 = d1
        dd0 = dd1
        out[i + 1] = v
    return out


@numba.njit(cache=True, nogil=True, inline="always")
def _well_rhs(x, f):
    return -(2.0 * x - 6.0 * x * x + 4.0 * x * x * x) + f


@numba.njit(cache=True, nogil=True)
def double_well_rk4(switch_times, horizon, h, x0, t_out, x_out):
    """Switch-aligned RK4 for ``x' = -phi'(x) + F(t)`` on ``[0, horizon]``.

    Each inter-switch interval is split into ``ceil(len / h)`` equal steps so
    ``F`` is constant inside every step. Writes step-end samples (starting
    with ``t = 0``) and returns how many were written.
    """
    x = x0
    t_out[0] = 0.0
    x_out[0] = x
    j = 1
    k = 0
    nk = switch_times.shape[0] - 1
    while k < nk and switch_times[k] < horizon:
        a = switch_times[k]
        b = min(switch_times[k + 1], horizon)
        f = 1.0 if k % 2 == 0 else -1.0
        steps = max(1, int(math.ceil((b - a) / h)))
        dt = (b - a) / steps
        for i in range(steps):
            k1 = _well_rhs(x, f)
            k2 = _well_rhs(x + 0.5 * dt * k1, f)
            k3 = _well_rhs(x + 0.5 * dt * k2, f)
            k4 = _well_rhs(x + dt * k3, f)
            x = x + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            t_out[j] = a + (i + 1) * dt if i + 1 < steps else b
            x_out[j] = x
            j += 1
        k += 1
    return j
