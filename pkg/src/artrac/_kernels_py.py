"""Pure-Python implementations of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable.  Every
function here has an identically named, identically behaving counterpart in
``_kernels.pyx``.
"""

from __future__ import annotations

import math

import numpy as np


def two_body(v12, alpha12, alpha34, gamma, gamma_dot, l1, l2):
    """Vectorized closed-form hauler solve; returns ``(v34, omega1, omega2, den)``."""
    v12 = np.asarray(v12, dtype=float)
    alpha12 = np.asarray(alpha12, dtype=float)
    alpha34 = np.asarray(alpha34, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    gamma_dot = np.asarray(gamma_dot, dtype=float)
    den = l1 * np.cos(alpha34 - gamma) + l2 * np.cos(alpha34)
    v34 = ((l2 * np.cos(gamma + alpha12) + l1 * np.cos(alpha12)) * v12
           + l1 * l2 * np.sin(gamma) * gamma_dot) / den
    turn = np.sin(gamma + alpha12 - alpha34) * v12
    omega1 = (turn + l2 * np.cos(alpha34) * gamma_dot) / den
    omega2 = (turn - l1 * np.cos(gamma - alpha34) * gamma_dot) / den
    return v34, omega1, omega2, den


def integrate_truth(gamma, dt, v12, l1, l2, k_alpha, x0=0.0, y0=0.0, theta0=0.0):
    """Forward-Euler integration of the hauler along a sampled steering trace.

    ``gamma_dot[k]`` is the backward difference of ``gamma``, i.e. the exact
    derivative of the piecewise-linear steering trace over ``(t[k-1], t[k]]``.
    Slip angles follow ``alpha = -k_alpha * Omega0 * v0`` where ``Omega0``
    and ``v0`` are the slip-free yaw rate and axle speed.

    Returns ``(gamma_dot, alpha12, alpha34, v34, omega1, omega2, x, y, theta,
    min_abs_den)``.
    """
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.shape[0]
    out = np.empty((9, n))
    gdot, a12, a34, v34, om1, om2, xs, ys, th = out
    x, y, theta = float(x0), float(y0), float(theta0)
    prev = gamma[0] if n else 0.0
    min_den = math.inf
    cos, sin = math.cos, math.sin
    for k in range(n):
        g = float(gamma[k])
        gd = (g - prev) / dt if k else 0.0
        prev = g
        cg, sg = cos(g), sin(g)
        den0 = l2 + l1 * cg
        om1_0 = (sg * v12 + l2 * gd) / den0
        v34_0 = ((l2 * cg + l1) * v12 + l1 * l2 * sg * gd) / den0
        alpha_f = -k_alpha * om1_0 * v12
        alpha_r = -k_alpha * (om1_0 - gd) * v34_0
        den = l1 * cos(alpha_r - g) + l2 * cos(alpha_r)
        if abs(den) < min_den:
            min_den = abs(den)
        turn = sin(g + alpha_f - alpha_r) * v12
        o1 = (turn + l2 * cos(alpha_r) * gd) / den
        if k:
            # explicit Euler with the previous sample's rates
            x += dt * v12 * cos(th[k - 1] + a12[k - 1])
            y += dt * v12 * sin(th[k - 1] + a12[k - 1])
            theta += dt * om1[k - 1]
        gdot[k] = gd
        a12[k] = alpha_f
        a34[k] = alpha_r
        v34[k] = ((l2 * cos(g + alpha_f) + l1 * cos(alpha_f)) * v12 + l1 * l2 * sg * gd) / den
        om1[k] = o1
        om2[k] = (turn - l1 * cos(g - alpha_r) * gd) / den
        xs[k] = x
        ys[k] = y
        th[k] = theta
    return gdot, a12, a34, v34, om1, om2, xs, ys, th, min_den


def moving_average(x, window):
    """Causal mean over the last ``window`` samples; warm-up uses what exists."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    out = np.empty(n)
    for k in range(n):
        lo = k - window + 1 if k >= window else 0
        acc = 0.0
        for j in range(lo, k + 1):
            acc += x[j]
        out[k] = acc / (k + 1 - lo)
    return out
