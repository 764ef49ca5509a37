"""Numpy implementations of the leaf evaluation kernels.

This is the fallback lane: identical signatures and semantics to the
compiled lane in ``_fast.pyx``.  Every function is total (no NaN); where a
derivative is undefined on a measure-zero set the one-sided value is
returned and the caller masks kink neighborhoods.
"""

import numpy as np

LANE = "pure"


def sawtooth_eval(ts, amp):
    r = np.mod(ts, 2.0)
    return amp * np.where(r <= 1.0, r, 2.0 - r)


def sawtooth_slope(ts, amp):
    r = np.mod(ts, 2.0)
    return np.where(r < 1.0, amp, -amp)


def sine_eval(ts, amp):
    return amp * np.sin(ts)


def sine_slope(ts, amp):
    return amp * np.cos(ts)


def sine_curvature(ts, amp):
    return -amp * np.sin(ts)


def pwl_eval(ts, breaks, knot_vals, slopes):
    ts = np.asarray(ts)
    if len(breaks) == 0:
        return slopes[0] * ts
    j = np.searchsorted(breaks, ts, side="right")
    left = np.maximum(j - 1, 0)
    return knot_vals[left] + slopes[j] * (ts - breaks[left])


def pwl_slope(ts, breaks, slopes):
    ts = np.asarray(ts)
    if len(breaks) == 0:
        return np.full(ts.shape, slopes[0])
    j = np.searchsorted(breaks, ts, side="right")
    return slopes[j]


def weier_eval(ts, alpha, nu, terms):
    ts = np.asarray(ts)
    acc = np.zeros(ts.shape)
    coef_sum = 0.0
    coef = 1.0
    scale = np.pi
    for _ in range(terms + 1):
        acc += coef * np.sin(scale * ts) / scale
        coef_sum += coef
        coef *= alpha
        scale *= nu
    return acc / (2.0 * coef_sum)


def weier_slope(ts, alpha, nu, terms):
    ts = np.asarray(ts)
    acc = np.zeros(ts.shape)
    coef_sum = 0.0
    coef = 1.0
    scale = np.pi
    for _ in range(terms + 1):
        acc += coef * np.cos(scale * ts)
        coef_sum += coef
        coef *= alpha
        scale *= nu
    return acc / (2.0 * coef_sum)


def bump_raw(ss):
    """exp(1/(s^2-1)) inside |s|<1, zero outside (unnormalized bump)."""
    ss = np.asarray(ss)
    out = np.zeros(ss.shape)
    inside = np.abs(ss) < 1.0
    w = ss[inside]
    out[inside] = np.exp(1.0 / (w * w - 1.0))
    return out


def bump_raw_prime(ss):
    """Derivative of the unnormalized bump: -2s/(s^2-1)^2 * exp(1/(s^2-1))."""
    ss = np.asarray(ss)
    out = np.zeros(ss.shape)
    inside = np.abs(ss) < 1.0
    w = ss[inside]
    denom = w * w - 1.0
    out[inside] = np.exp(1.0 / denom) * (-2.0 * w / (denom * denom))
    return out
