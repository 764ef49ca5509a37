"""Scalar Lipschitz profiles with slope bound < 1, and their mollification.

Every profile certifies a Lipschitz bound strictly below 1 at construction
(the whole solution family needs the gradient to stay inside the open
segment).  Kink sets are declared analytically by each family, never
detected numerically.

Evaluation is array-oriented: ``value``/``slope_raw``/``curvature_raw``
accept scalars or numpy arrays and broadcast.  ``slope_raw`` and
``curvature_raw`` are total functions that return the one-sided value on
the measure-zero kink set; the pointwise ``derivative``/``second_derivative``
wrappers return None within KINK_TOL of a kink.
"""

from __future__ import annotations

import functools

import numpy as np

from . import _kernels
from .errors import CertificateMismatch, LipschitzViolation, QuadratureFailure

# scalar distance below which a parameter counts as sitting on a kink
KINK_TOL = 1e-12

# default total node budget for the mollification quadrature; 16-point
# Gauss-Legendre panels, so 160 => 10 base panels, the smallest count that
# pushes the bump mass self-test below 1e-10
DEFAULT_QUAD_POINTS = 160

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _kern():
    return _kernels.kernels


def _as_batch(t):
    """Return (1-d float array, was_scalar flag) for scalar-or-array input."""
    arr = np.asarray(t, dtype=float)
    if arr.ndim == 0:
        return arr.reshape(1), True
    return arr.reshape(-1), arr.ndim > 1  # n-d inputs come back flattened


def _unbatch(vals, t):
    arr = np.asarray(t)
    if arr.ndim == 0:
        return float(vals[0])
    return vals.reshape(arr.shape)


class Profile:
    """Base class: a scalar function with certified slope bound < 1."""

    #: one of "C2", "C0,1", "truncated-series"
    smoothness: str
    lip_bound: float

    def __init__(self, lip_bound: float, smoothness: str, unchecked: bool = False):
        if not unchecked and not lip_bound < 1.0:
            raise LipschitzViolation(
                f"profile slope bound {lip_bound} is not < 1"
            )
        self.lip_bound = float(lip_bound)
        self.smoothness = smoothness
        self.unchecked = bool(unchecked)

    # -- array evaluation (implemented by families) --------------------
    def _value(self, ts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _slope(self, ts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _curvature(self, ts: np.ndarray) -> np.ndarray | None:
        """Second derivative where it exists a.e.; None if unsupported."""
        return None

    # -- public surface -------------------------------------------------
    def value(self, t):
        ts, _ = _as_batch(t)
        return _unbatch(self._value(ts), t)

    def slope_raw(self, t):
        ts, _ = _as_batch(t)
        return _unbatch(self._slope(ts), t)

    def curvature_raw(self, t):
        ts, _ = _as_batch(t)
        vals = self._curvature(ts)
        if vals is None:
            return None
        return _unbatch(vals, t)

    def kinks(self, lo: float, hi: float) -> np.ndarray:
        """Kink positions inside the closed interval [lo, hi], ascending."""
        return np.empty(0)

    def kink_distance(self, t):
        """Distance from t (scalar or array) to the nearest kink (inf if none)."""
        ts, _ = _as_batch(t)
        span = float(np.max(np.abs(ts))) + 2.0
        ks = self.kinks(-span, span)
        if ks.size == 0:
            dist = np.full(ts.shape, np.inf)
        else:
            dist = np.min(np.abs(ts[:, None] - ks[None, :]), axis=1)
        return _unbatch(dist, t)

    def derivative(self, t: float):
        """Pointwise derivative, or None on the kink set."""
        if self.kink_distance(float(t)) <= KINK_TOL:
            return None
        return float(self.slope_raw(float(t)))

    def second_derivative(self, t: float):
        """Pointwise second derivative, or None where unavailable."""
        if self.kink_distance(float(t)) <= KINK_TOL:
            return None
        val = self.curvature_raw(float(t))
        return None if val is None else float(val)

    def one_sided_slopes(self, t: float) -> tuple[float, float]:
        """(left, right) slopes at t; equal away from kinks."""
        s = float(self.slope_raw(float(t)))
        return s, s

    @property
    def supports_second_order(self) -> bool:
        return self._curvature(np.zeros(1)) is not None

    def describe(self) -> dict:
        """JSON-ready family description (mirrors the scenario schema)."""
        raise NotImplementedError


class Sawtooth(Profile):
    """amplitude*|t| on [-1, 1], extended 2-periodically; kinks at integers."""

    def __init__(self, amplitude: float):
        if not amplitude > 0:
            raise ValueError("sawtooth amplitude must be positive")
        super().__init__(lip_bound=amplitude, smoothness="C0,1")
        self.amplitude = float(amplitude)

    def _value(self, ts):
        return _kern().sawtooth_eval(ts, self.amplitude)

    def _slope(self, ts):
        return _kern().sawtooth_slope(ts, self.amplitude)

    def _curvature(self, ts):
        return np.zeros(ts.shape)

    def kinks(self, lo, hi):
        return np.arange(np.ceil(lo), np.floor(hi) + 1)

    def one_sided_slopes(self, t):
        k = round(t)
        if abs(t - k) > KINK_TOL:
            s = float(self.slope_raw(float(t)))
            return s, s
        if k % 2 == 0:  # trough: local minimum of |.| pattern
            return -self.amplitude, self.amplitude
        return self.amplitude, -self.amplitude

    def describe(self):
        return {"kind": "sawtooth", "amplitude": self.amplitude}


class ScaledSine(Profile):
    """amplitude*sin(t); smooth, slope bound = amplitude."""

    def __init__(self, amplitude: float):
        if amplitude < 0:
            raise ValueError("sine amplitude must be nonnegative")
        super().__init__(lip_bound=amplitude, smoothness="C2")
        self.amplitude = float(amplitude)

    def _value(self, ts):
        return _kern().sine_eval(ts, self.amplitude)

    def _slope(self, ts):
        return _kern().sine_slope(ts, self.amplitude)

    def _curvature(self, ts):
        return _kern().sine_curvature(ts, self.amplitude)

    def describe(self):
        return {"kind": "scaled_sine", "amplitude": self.amplitude}


class PiecewiseLinear(Profile):
    """Continuous piecewise-linear profile anchored at f(0) = 0.

    ``slopes`` has one more entry than ``breakpoints``; slope i applies
    left of breakpoint i, the last slope right of the final breakpoint.
    ``unchecked`` skips the Lipschitz gate and exists solely for negative
    controls.
    """

    def __init__(self, breakpoints, slopes, unchecked: bool = False):
        breaks = np.asarray(breakpoints, dtype=float).reshape(-1)
        slopes = np.asarray(slopes, dtype=float).reshape(-1)
        if slopes.size != breaks.size + 1:
            raise ValueError("need len(slopes) == len(breakpoints) + 1")
        if breaks.size > 1 and not np.all(np.diff(breaks) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        lip = float(np.max(np.abs(slopes)))
        kink_mask = (
            np.abs(np.diff(slopes)) > 0 if breaks.size else np.zeros(0, bool)
        )
        smooth = "C2" if not np.any(kink_mask) else "C0,1"
        super().__init__(lip_bound=lip, smoothness=smooth, unchecked=unchecked)
        self.breakpoints = breaks
        self.slopes = slopes
        self._kinks = breaks[kink_mask]
        # knot values with f(0) = 0: integrate slopes from the first knot,
        # then shift by the (pre-shift) value at 0
        if breaks.size:
            rel = np.concatenate(
                ([0.0], np.cumsum(slopes[1:-1] * np.diff(breaks)))
            ) if breaks.size > 1 else np.zeros(1)
            self.knot_values = rel
            self.knot_values = rel - float(
                _kern().pwl_eval(np.zeros(1), breaks, rel, slopes)[0]
            )
        else:
            self.knot_values = np.zeros(0)

    def _value(self, ts):
        return _kern().pwl_eval(ts, self.breakpoints, self.knot_values, self.slopes)

    def _slope(self, ts):
        return _kern().pwl_slope(ts, self.breakpoints, self.slopes)

    def _curvature(self, ts):
        return np.zeros(ts.shape)

    def kinks(self, lo, hi):
        ks = self._kinks
        return ks[(ks >= lo) & (ks <= hi)]

    def one_sided_slopes(self, t):
        if self._kinks.size and np.min(np.abs(self._kinks - t)) <= KINK_TOL:
            i = int(np.argmin(np.abs(self.breakpoints - t)))
            return float(self.slopes[i]), float(self.slopes[i + 1])
        s = float(self.slope_raw(float(t)))
        return s, s

    def describe(self):
        return {
            "kind": "piecewise_linear",
            "breakpoints": self.breakpoints.tolist(),
            "slopes": self.slopes.tolist(),
        }


class WeierstrassPrimitive(Profile):
    """Term-wise antiderivative of a truncated Weierstrass cosine series.

    f(t) = (1/(2M)) * sum_{k=0}^{terms} a^k sin(nu^k pi t)/(nu^k pi) with
    M = sum a^k, so f' is the normalized cosine series with |f'| <= 1/2 and
    f'(0) = 1/2 exactly.  The truncation is formally smooth but its
    curvature grows like (a*nu)^terms, so second-order checks are disabled
    (smoothness tag "truncated-series").
    """

    def __init__(self, alpha: float, nu: int, terms: int):
        if not 0.0 < alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if nu < 3 or nu % 2 == 0 or nu != int(nu):
            raise ValueError("nu must be an odd integer >= 3")
        if not alpha * nu > 1.0:
            raise ValueError("need alpha * nu > 1")
        if terms < 1:
            raise ValueError("need at least one series term")
        super().__init__(lip_bound=0.5, smoothness="truncated-series")
        self.alpha = float(alpha)
        self.nu = int(nu)
        self.terms = int(terms)

    def _value(self, ts):
        return _kern().weier_eval(ts, self.alpha, self.nu, self.terms)

    def _slope(self, ts):
        return _kern().weier_slope(ts, self.alpha, self.nu, self.terms)

    def _curvature(self, ts):
        return None  # disabled: truncation curvature is not certifiable

    def describe(self):
        return {
            "kind": "weierstrass",
            "alpha": self.alpha,
            "nu": self.nu,
            "terms": self.terms,
        }


@functools.cache
def _bump_normalization() -> float:
    """1 / integral of exp(1/(s^2-1)) over [-1,1], to ~1e-12.

    No closed form exists; refine composite Gauss-Legendre panels until the
    value stops moving.
    """
    kern = _kernels.kernels
    prev = None
    panels = 8
    while panels <= 4096:
        edges = np.linspace(-1.0, 1.0, panels + 1)
        mids = 0.5 * (edges[1:] + edges[:-1])
        halfs = 0.5 * np.diff(edges)
        ys = mids[:, None] + halfs[:, None] * _GL_NODES
        total = float(np.sum(halfs[:, None] * _GL_WEIGHTS * kern.bump_raw(ys)))
        if prev is not None and abs(total - prev) < 5e-15:
            return 1.0 / total
        prev = total
        panels *= 2
    raise QuadratureFailure("bump normalization did not converge")


class Mollifier:
    """The standard compactly supported bump, scaled to [-epsilon, epsilon]."""

    def __init__(self, epsilon: float):
        if not epsilon > 0:
            raise ValueError("mollifier width must be positive")
        self.epsilon = float(epsilon)
        self.normalization = _bump_normalization()

    def value(self, ys):
        ys = np.asarray(ys, dtype=float)
        eps = self.epsilon
        return (self.normalization / eps) * _kern().bump_raw(ys / eps)

    def derivative(self, ys):
        ys = np.asarray(ys, dtype=float)
        eps = self.epsilon
        return (self.normalization / eps**2) * _kern().bump_raw_prime(ys / eps)


def _panel_rule(ts, eps, kink_positions, base_panels):
    """Quadrature nodes/weights in y for each window [-eps, eps] around ts.

    Uniform base panels are further split wherever the shifted integrand
    y -> f(t - y) has a kink, i.e. at y = t - k.  Windows with fewer kinks
    get zero-width padding panels (weight 0), which keeps everything one
    rectangular array.  Returns (Y, W) of shape (len(ts), panels, 16).
    """
    ts = np.asarray(ts, dtype=float).reshape(-1)
    n = ts.size
    base = np.linspace(-eps, eps, base_panels + 1)
    ks = np.asarray(kink_positions, dtype=float)
    if ks.size:
        i0 = np.searchsorted(ks, ts - eps, side="right")
        i1 = np.searchsorted(ks, ts + eps, side="left")
        width = int(np.max(i1 - i0)) if n else 0
    else:
        width = 0
    edges = np.broadcast_to(base, (n, base_panels + 1))
    if width:
        cols = i0[:, None] + np.arange(width)[None, :]
        valid = cols < i1[:, None]
        gathered = ks[np.minimum(cols, ks.size - 1)]
        extra = np.where(valid, ts[:, None] - gathered, eps)
        edges = np.concatenate([edges, extra], axis=1)
        edges = np.sort(edges, axis=1)
    mids = 0.5 * (edges[:, 1:] + edges[:, :-1])
    halfs = 0.5 * (edges[:, 1:] - edges[:, :-1])
    Y = mids[:, :, None] + halfs[:, :, None] * _GL_NODES
    W = halfs[:, :, None] * _GL_WEIGHTS
    return Y, W


class MollifiedProfile(Profile):
    """Convolution f * eta_eps computed by kink-split Gauss-Legendre panels.

    Each evaluation normalizes by the quadrature mass of the bump over the
    same panels, so the result is a true convex average of inner samples:
    the slope bound and the eps-uniform distance bound hold to rounding,
    not merely to quadrature accuracy.
    """

    def __init__(self, inner: Profile, mollifier: Mollifier,
                 quad_points: int = DEFAULT_QUAD_POINTS):
        if quad_points < 32:
            raise ValueError("need quad_points >= 32")
        super().__init__(lip_bound=inner.lip_bound, smoothness="C2")
        self.inner = inner
        self.mollifier = mollifier
        self.base_panels = max(2, quad_points // 16)
        self._self_test()

    def _self_test(self):
        """Bump mass on the base rule must reproduce 1 to 1e-10."""
        eps = self.mollifier.epsilon
        Y, W = _panel_rule(np.zeros(1), eps, np.empty(0), self.base_panels)
        mass = float(np.sum(W * self.mollifier.value(Y)))
        if abs(mass - 1.0) > 1e-10:
            raise QuadratureFailure(
                f"mollifier mass {mass!r} misses 1 beyond 1e-10 with "
                f"{self.base_panels * 16} quadrature points"
            )

    def _window_kinks(self, ts):
        eps = self.mollifier.epsilon
        lo = float(np.min(ts)) - eps
        hi = float(np.max(ts)) + eps
        return self.inner.kinks(lo, hi)

    def _convolve(self, ts, inner_fn, weight_fn):
        eps = self.mollifier.epsilon
        Y, W = _panel_rule(ts, eps, self._window_kinks(ts), self.base_panels)
        shifted = ts.reshape(-1, 1, 1) - Y
        mass = np.sum(W * self.mollifier.value(Y), axis=(1, 2))
        num = np.sum(W * inner_fn(shifted) * weight_fn(Y), axis=(1, 2))
        return num / mass

    def _value(self, ts):
        return self._convolve(ts, self.inner._value, self.mollifier.value)

    def _slope(self, ts):
        # f' * eta: panel splitting keeps nodes off the inner kink set
        return self._convolve(ts, self.inner._slope, self.mollifier.value)

    def _curvature(self, ts):
        # integration by parts: (f * eta)'' = f' * eta'
        return self._convolve(ts, self.inner._slope, self.mollifier.derivative)

    def describe(self):
        return {
            "kind": "mollified",
            "inner": self.inner.describe(),
            "epsilon": self.mollifier.epsilon,
            "quad_points": self.base_panels * 16,
        }


def mollify(profile: Profile, mollifier: Mollifier,
            quad_points: int = DEFAULT_QUAD_POINTS) -> MollifiedProfile:
    """Smooth approximant f * eta_eps with non-increased slope bound."""
    return MollifiedProfile(profile, mollifier, quad_points)


def sup_distance(f: Profile, g: Profile, interval, samples: int) -> float:
    """Max of |f - g| over a uniform sample of the closed interval."""
    if samples < 2:
        raise ValueError("need samples >= 2")
    lo, hi = interval
    ts = np.linspace(lo, hi, samples)
    return float(np.max(np.abs(f.value(ts) - g.value(ts))))


def certify_lip(f: Profile, interval, samples: int,
                quotient_step: float = 1e-6) -> float:
    """Measured slope bound: sampled |f'| plus difference quotients at kinks.

    Raises CertificateMismatch when the measurement exceeds the declared
    bound by more than 1e-12 (a construction bug, not a data error).
    """
    if samples < 2:
        raise ValueError("need samples >= 2")
    lo, hi = interval
    ts = np.linspace(lo, hi, samples)
    defined = f.kink_distance(ts) > KINK_TOL
    measured = float(np.max(np.abs(f.slope_raw(ts[defined])))) if np.any(defined) else 0.0
    h = quotient_step
    for k in f.kinks(lo, hi):
        fk = f.value(k)
        for side in (-1.0, 1.0):
            q = abs(f.value(k + side * h) - fk) / h
            measured = max(measured, float(q))
    if measured > f.lip_bound + 1e-12:
        raise CertificateMismatch(
            f"measured slope bound {measured} exceeds declared {f.lip_bound}"
        )
    return measured


def build_profile(spec: dict) -> Profile:
    """Construct a profile from its JSON description (see scenario schema)."""
    from .scenario import check_keys  # late import: scenario owns schema tooling

    kind = spec.get("kind")
    if kind == "sawtooth":
        check_keys(spec, {"kind", "amplitude"}, context="sawtooth profile")
        return Sawtooth(spec["amplitude"])
    if kind == "scaled_sine":
        check_keys(spec, {"kind", "amplitude"}, context="scaled_sine profile")
        return ScaledSine(spec["amplitude"])
    if kind == "piecewise_linear":
        check_keys(
            spec,
            {"kind", "breakpoints", "slopes"},
            optional={"unchecked"},
            context="piecewise_linear profile",
        )
        return PiecewiseLinear(
            spec["breakpoints"], spec["slopes"],
            unchecked=bool(spec.get("unchecked", False)),
        )
    if kind == "weierstrass":
        check_keys(
            spec, {"kind", "alpha", "nu", "terms"}, context="weierstrass profile"
        )
        return WeierstrassPrimitive(spec["alpha"], spec["nu"], spec["terms"])
    if kind == "mollified":
        check_keys(
            spec,
            {"kind", "inner", "epsilon"},
            optional={"quad_points"},
            context="mollified profile",
        )
        inner = build_profile(spec["inner"])
        return mollify(
            inner,
            Mollifier(spec["epsilon"]),
            quad_points=int(spec.get("quad_points", DEFAULT_QUAD_POINTS)),
        )
    raise ValueError(f"unknown profile kind {kind!r}")
