# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled leaf evaluation kernels; semantics mirror _pure.py exactly."""

from libc.math cimport M_PI, cos, exp, fmod, sin

import numpy as np

LANE = "compiled"


cdef inline double _tri_mod(double t) noexcept:
    cdef double r = fmod(t, 2.0)
    if r < 0.0:
        r += 2.0
    return r


def _prep(ts):
    arr = np.ascontiguousarray(np.asarray(ts, dtype=np.float64))
    return arr, arr.reshape(-1), np.empty(arr.size, dtype=np.float64)


def sawtooth_eval(ts, double amp):
    arr, flat, out = _prep(ts)
    cdef double[::1] t = flat
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double r
    for i in range(t.shape[0]):
        r = _tri_mod(t[i])
        o[i] = amp * r if r <= 1.0 else amp * (2.0 - r)
    return out.reshape(arr.shape)


def sawtooth_slope(ts, double amp):
    arr, flat, out = _prep(ts)
    cdef double[::1] t = flat
    cdef double[::1] o = out
    cdef Py_ssize_t i
    for i in range(t.shape[0]):
        o[i] = amp if _tri_mod(t[i]) < 1.0 else -amp
    return out.reshape(arr.shape)


def sine_eval(ts, double amp):
    arr, flat, out = _prep(ts)
    cdef double[::1] t = flat
    cdef double[::1] o = out
    cdef Py_ssize_t i
    for i in range(t.shape[0]):
        o[i] = amp * sin(t[i])
    return out.reshape(arr.shape)


def sine_slope(ts, double amp):
    arr, flat, out = _prep(ts)
    cdef double[::1] t = flat
    cdef double[::1] o = out
    cdef Py_ssize_t i
    for i in range(t.shape[0]):
        o[i] = amp * cos(t[i])
    return out.reshape(arr.shape)


def sine_curvature(ts, double amp):
    arr, flat, out = _prep(ts)
    cdef double[::1] t = flat
    cdef double[::1] o = out
    cdef Py_ssize_t i
    for i in range(t.shape[0]):
        o[i] = -amp * sin(t[i])
    return out.reshape(arr.shape)


cdef inline Py_ssize_t _bisect_right(const double[::1] a, double v) noexcept:
    cdef Py_ssize_t lo = 0, hi = a.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if v < a[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


def pwl_eval(ts, breaks_in, knot_vals_in, slopes_in):
    arr, flat, out = _prep(ts)
    breaks_arr = np.ascontiguousarray(breaks_in, dtype=np.float64)
    knots_arr = np.ascontiguousarray(knot_vals_in, dtype=np.float64)
    slopes_arr = np.ascontiguousarray(slopes_in, dtype=np.float64)
    cdef double[::1] t = flat
    cdef double[::1] o = out
    cdef double[::1] breaks = breaks_arr
    cdef double[::1] knots = knots_arr
    cdef double[::1] slopes = slopes_arr
    cdef Py_ssize_t i, j, left
    if breaks.shape[0] == 0:
        for i in range(t.shape[0]):
            o[i] = slopes[0] * t[i]
        return out.reshape(arr.shape)
    for i in range(t.shape[0]):
        j = _bisect_right(breaks, t[i])
        left = j - 1 if j > 0 else 0
        o[i] = knots[left] + slopes[j] * (t[i] - breaks[left])
    return out.reshape(arr.shape)


def pwl_slope(ts, breaks_in, slopes_in):
    arr, flat, out = _prep(ts)
    breaks_arr = np.ascontiguousarray(breaks_in, dtype=np.float64)
    slopes_arr = np.ascontiguousarray(slopes_in, dtype=np.float64)
    cdef double[::1] t = flat
    cdef double[::1] o = out
    cdef double[::1] breaks = breaks_arr
    cdef double[::1] slopes = slopes_arr
    cdef Py_ssize_t i
    if breaks.shape[0] == 0:
        for i in range(t.shape[0]):
            o[i] = slopes[0]
        return out.reshape(arr.shape)
    for i in range(t.shape[0]):
        o[i] = slopes[_bisect_right(breaks, t[i])]
    return out.reshape(arr.shape)


def weier_eval(ts, double alpha, int nu, int terms):
    arr, flat, out = _prep(ts)
    cdef double[::1] t = flat
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef int k
    cdef double acc, coef, coef_sum, scale
    for i in range(t.shape[0]):
        acc = 0.0
        coef = 1.0
        coef_sum = 0.0
        scale = M_PI
        for k in range(terms + 1):
            acc += coef * sin(scale * t[i]) / scale
            coef_sum += coef
            coef *= alpha
            scale *= nu
        o[i] = acc / (2.0 * coef_sum)
    return out.reshape(arr.shape)


def weier_slope(ts, double alpha, int nu, int terms):
    arr, flat, out = _prep(ts)
    cdef double[::1] t = flat
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef int k
    cdef double acc, coef, coef_sum, scale
    for i in range(t.shape[0]):
        acc = 0.0
        coef = 1.0
        coef_sum = 0.0
        scale = M_PI
        for k in range(terms + 1):
            acc += coef * cos(scale * t[i])
            coef_sum += coef
            coef *= alpha
            scale *= nu
        o[i] = acc / (2.0 * coef_sum)
    return out.reshape(arr.shape)


def bump_raw(ss):
    arr, flat, out = _prep(ss)
    cdef double[::1] s = flat
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double w
    for i in range(s.shape[0]):
        w = s[i]
        if w > -1.0 and w < 1.0:
            o[i] = exp(1.0 / (w * w - 1.0))
        else:
            o[i] = 0.0
    return out.reshape(arr.shape)


def bump_raw_prime(ss):
    arr, flat, out = _prep(ss)
    cdef double[::1] s = flat
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double w, denom
    for i in range(s.shape[0]):
        w = s[i]
        if w > -1.0 and w < 1.0:
            denom = w * w - 1.0
            o[i] = exp(1.0 / denom) * (-2.0 * w / (denom * denom))
        else:
            o[i] = 0.0
    return out.reshape(arr.shape)
