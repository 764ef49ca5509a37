"""The explicit solution u(x) = m.x + f(d.x) and its analytic derivatives.

With m the segment midpoint and d the half-difference, the gradient is
Du = m + f'(d.x) d (a strict convex combination of the endpoints whenever
|f'| < 1) and the Hessian is the rank-one matrix f''(d.x) d (x) d.  The
gradient is undefined exactly on the kink hyperplanes {x : d.x = t_k}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Grid, Segment, Tolerances, as_vector, convex_coordinate
from .errors import CertificateMismatch, LipschitzViolation
from .profile import KINK_TOL, Profile


@dataclass(frozen=True)
class GradientRangeCertificate:
    """Aggregated evidence that Du stays delta-inside the open segment."""

    delta: float
    lambda_min: float
    lambda_max: float
    worst_line_residual: float
    sample_count: int

    @property
    def passed(self) -> bool:
        return (
            self.lambda_min >= self.delta - 1e-12
            and self.lambda_max <= 1.0 - self.delta + 1e-12
            and self.worst_line_residual <= 1e-10
        )


class SingularSolution:
    """Composite of a segment and a profile; immutable, evaluations pure."""

    def __init__(self, seg: Segment, profile: Profile, unchecked: bool = False):
        if not unchecked and not profile.lip_bound < 1.0:
            raise LipschitzViolation(
                f"profile slope bound {profile.lip_bound} is not < 1"
            )
        self.seg = seg
        self.profile = profile
        self.midpoint = seg.midpoint
        self.half_difference = seg.half_difference

    @property
    def dim(self) -> int:
        return self.seg.dim

    # -- parameterization ------------------------------------------------
    def scalar_parameter(self, points) -> np.ndarray:
        """d.x for one point (n,) or many (N, n)."""
        return np.asarray(points, dtype=float) @ self.half_difference

    def kink_mask(self, points) -> np.ndarray:
        """True where the gradient is defined (d.x off the kink set)."""
        t = np.atleast_1d(self.scalar_parameter(points))
        return np.atleast_1d(self.profile.kink_distance(t)) > KINK_TOL

    # -- pointwise spec surface -------------------------------------------
    def value(self, x) -> float:
        x = as_vector(x, dim=self.dim)
        return float(self.midpoint @ x + self.profile.value(self.scalar_parameter(x)))

    def gradient(self, x):
        """Du(x) = m + f'(d.x) d, or None exactly on the kink locus."""
        x = as_vector(x, dim=self.dim)
        slope = self.profile.derivative(float(self.scalar_parameter(x)))
        if slope is None:
            return None
        return self.midpoint + slope * self.half_difference

    def hessian(self, x):
        """f''(d.x) d (x) d, or None where f'' is unavailable."""
        x = as_vector(x, dim=self.dim)
        curv = self.profile.second_derivative(float(self.scalar_parameter(x)))
        if curv is None:
            return None
        d = self.half_difference
        return curv * np.outer(d, d)

    # -- batched evaluation ------------------------------------------------
    def value_many(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return points @ self.midpoint + self.profile.value(self.scalar_parameter(points))

    def gradient_many(self, points) -> tuple[np.ndarray, np.ndarray]:
        """(gradients (N, n), defined mask (N,)); undefined rows hold NaN."""
        points = np.asarray(points, dtype=float)
        t = self.scalar_parameter(points)
        defined = self.kink_mask(points)
        slopes = np.asarray(self.profile.slope_raw(t), dtype=float)
        grads = self.midpoint + slopes[:, None] * self.half_difference
        grads[~defined] = np.nan
        return grads, defined

    def curvature_many(self, points):
        """f''(d.x) per point (NaN off the defined mask), or None."""
        points = np.asarray(points, dtype=float)
        t = self.scalar_parameter(points)
        curv = self.profile.curvature_raw(t)
        if curv is None:
            return None
        curv = np.asarray(curv, dtype=float).copy()
        curv[~self.kink_mask(points)] = np.nan
        return curv

    # -- certificates -------------------------------------------------------
    def gradient_range_certificate(
        self, grid: Grid, tol: Tolerances = Tolerances()
    ) -> GradientRangeCertificate:
        """Lemma-level gradient range check over every non-kink grid point.

        Cross-checks the projection coefficient against the closed form
        (1 - f'(d.x))/2 to 1e-12 before aggregating.
        """
        points = grid.points()
        grads, defined = self.gradient_many(points)
        t = self.scalar_parameter(points)[defined]
        G = grads[defined]
        if G.shape[0] == 0:
            raise ValueError("grid contains no points with defined gradient")
        ab = self.seg.a - self.seg.b
        lam = (G - self.seg.b) @ ab / (ab @ ab)
        feet = self.seg.b + lam[:, None] * ab
        residuals = np.linalg.norm(G - feet, axis=1)
        expected = 0.5 - 0.5 * np.asarray(self.profile.slope_raw(t), dtype=float)
        drift = float(np.max(np.abs(lam - expected)))
        if drift > 1e-12:
            raise CertificateMismatch(
                f"projection coefficient deviates from (1 - f')/2 by {drift:.3e}"
            )
        return GradientRangeCertificate(
            delta=(1.0 - self.profile.lip_bound) / 2.0,
            lambda_min=float(np.min(lam)),
            lambda_max=float(np.max(lam)),
            worst_line_residual=float(np.max(residuals)),
            sample_count=int(G.shape[0]),
        )

    def kink_hyperplanes(self, grid: Grid) -> list[float]:
        """Kink levels t_k whose hyperplanes {d.x = t_k} meet the grid box.

        The reachable range of d.x over the box comes from interval
        arithmetic on the axis extents.
        """
        center = float(self.half_difference @ grid.origin)
        spread = float(np.abs(self.half_difference) @ grid.extents)
        ks = self.profile.kinks(center - spread, center + spread)
        return [float(k) for k in ks]

    def point_on_kink(self, t_k: float) -> np.ndarray:
        """Deterministic representative of {x : d.x = t_k} (closest to 0)."""
        d = self.half_difference
        return (t_k / float(d @ d)) * d
