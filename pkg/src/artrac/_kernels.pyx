# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.  Mirrors ``_kernels_py`` function for function."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs, INFINITY

cnp.import_array()


def two_body(double[::1] v12, double[::1] alpha12, double[::1] alpha34, double[::1] gamma,
             double[::1] gamma_dot, double l1, double l2):
    cdef Py_ssize_t n = v12.shape[0], k
    cdef cnp.ndarray[double, ndim=1] v34 = np.empty(n), om1 = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] om2 = np.empty(n), den = np.empty(n)
    cdef double g, a, b, d, turn, v, gd
    for k in range(n):
        g = gamma[k]
        a = alpha12[k]
        b = alpha34[k]
        v = v12[k]
        gd = gamma_dot[k]
        d = l1 * cos(b - g) + l2 * cos(b)
        den[k] = d
        v34[k] = ((l2 * cos(g + a) + l1 * cos(a)) * v + l1 * l2 * sin(g) * gd) / d
        turn = sin(g + a - b) * v
        om1[k] = (turn + l2 * cos(b) * gd) / d
        om2[k] = (turn - l1 * cos(g - b) * gd) / d
    return v34, om1, om2, den


def integrate_truth(gamma_in, double dt, double v12, double l1, double l2, double k_alpha,
                    double x0=0.0, double y0=0.0, double theta0=0.0):
    cdef cnp.ndarray[double, ndim=1] gamma = np.ascontiguousarray(gamma_in, dtype=float)
    cdef Py_ssize_t n = gamma.shape[0], k
    cdef cnp.ndarray[double, ndim=2] out = np.empty((9, n))
    cdef double[:, ::1] o = out
    cdef double x = x0, y = y0, theta = theta0
    cdef double prev = gamma[0] if n else 0.0
    cdef double min_den = INFINITY
    cdef double g, gd, cg, sg, den0, om1_0, v34_0, alpha_f, alpha_r, den, turn, o1
    for k in range(n):
        g = gamma[k]
        gd = (g - prev) / dt if k else 0.0
        prev = g
        cg = cos(g)
        sg = sin(g)
        den0 = l2 + l1 * cg
        om1_0 = (sg * v12 + l2 * gd) / den0
        v34_0 = ((l2 * cg + l1) * v12 + l1 * l2 * sg * gd) / den0
        alpha_f = -k_alpha * om1_0 * v12
        alpha_r = -k_alpha * (om1_0 - gd) * v34_0
        den = l1 * cos(alpha_r - g) + l2 * cos(alpha_r)
        if fabs(den) < min_den:
            min_den = fabs(den)
        turn = sin(g + alpha_f - alpha_r) * v12
        o1 = (turn + l2 * cos(alpha_r) * gd) / den
        if k:
            x += dt * v12 * cos(o[8, k - 1] + o[1, k - 1])
            y += dt * v12 * sin(o[8, k - 1] + o[1, k - 1])
            theta += dt * o[4, k - 1]
        o[0, k] = gd
        o[1, k] = alpha_f
        o[2, k] = alpha_r
        o[3, k] = ((l2 * cos(g + alpha_f) + l1 * cos(alpha_f)) * v12 + l1 * l2 * sg * gd) / den
        o[4, k] = o1
        o[5, k] = (turn - l1 * cos(g - alpha_r) * gd) / den
        o[6, k] = x
        o[7, k] = y
        o[8, k] = theta
    return (out[0], out[1], out[2], out[3], out[4], out[5], out[6], out[7], out[8], min_den)


def moving_average(x_in, Py_ssize_t window):
    cdef cnp.ndarray[double, ndim=1] x = np.ascontiguousarray(x_in, dtype=float)
    cdef Py_ssize_t n = x.shape[0], k, j, lo
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
    cdef double acc
    for k in range(n):
        lo = k - window + 1 if k >= window else 0
        acc = 0.0
        for j in range(lo, k + 1):
            acc += x[j]
        out[k] = acc / (k + 1 - lo)
    return out
