"""Dimension-generic vectors, the flat segment, sampling grids, tolerances.

Vectors are plain float64 numpy arrays of length n >= 2, validated once at
the construction boundary by :func:`as_vector`; everything downstream is
pure array arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSegment


def as_vector(coords, dim: int | None = None) -> np.ndarray:
    """Validate and return a point of R^n as a float64 array.

    Rejects non-finite entries and n < 2; if ``dim`` is given the length
    must match it.
    """
    v = np.asarray(coords, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if v.size < 2:
        raise ValueError(f"vectors must have length >= 2, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    if dim is not None and v.size != dim:
        raise ValueError(f"expected dimension {dim}, got {v.size}")
    return v


@dataclass(frozen=True)
class Segment:
    """Nondegenerate straight segment [a, b] in R^n.

    The midpoint and half-difference are always recomputed from the
    endpoints, so they can never go stale.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", as_vector(self.a))
        object.__setattr__(self, "b", as_vector(self.b, dim=self.a.size))
        if np.linalg.norm(self.b - self.a) == 0.0:
            raise DegenerateSegment("segment endpoints coincide")

    @property
    def dim(self) -> int:
        return self.a.size

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.b + self.a)

    @property
    def half_difference(self) -> np.ndarray:
        return 0.5 * (self.b - self.a)

    @property
    def direction(self) -> np.ndarray:
        """b - a (unnormalized)."""
        return self.b - self.a

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.b - self.a))

    def swapped(self) -> "Segment":
        return Segment(self.b.copy(), self.a.copy())


def convex_coordinate(q, seg: Segment) -> tuple[float, float]:
    """Coefficient lam with q ~ lam*a + (1-lam)*b, plus distance to the line.

    lam comes from orthogonal projection onto the segment direction, so it
    is robust when q sits slightly off the line.  lam is not clamped; the
    caller interprets values outside [0, 1].
    """
    q = as_vector(q, dim=seg.dim)
    ab = seg.a - seg.b
    lam = float(np.dot(q - seg.b, ab) / np.dot(ab, ab))
    foot = seg.b + lam * ab
    residual = float(np.linalg.norm(q - foot))
    return lam, residual


def project_to_segment(q, seg: Segment) -> tuple[np.ndarray, float]:
    """Closest point of the closed segment to q, and the distance to it."""
    q = as_vector(q, dim=seg.dim)
    lam, _ = convex_coordinate(q, seg)
    lam = min(1.0, max(0.0, lam))
    proj = seg.b + lam * (seg.a - seg.b)
    return proj, float(np.linalg.norm(q - proj))


@dataclass(frozen=True)
class Grid:
    """Uniform tensor-product sampling grid, row-major over axes in order.

    ``extents`` are per-axis half-widths around ``origin``; axis i carries
    ``counts[i]`` points including both endpoints.
    """

    origin: np.ndarray
    extents: np.ndarray
    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "origin", as_vector(self.origin))
        ext = np.asarray(self.extents, dtype=float)
        if ext.shape != self.origin.shape:
            raise ValueError("extents must match origin dimension")
        if not np.all(ext > 0):
            raise ValueError("extents must be strictly positive")
        object.__setattr__(self, "extents", ext)
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != self.origin.size:
            raise ValueError("counts must match origin dimension")
        if any(c < 2 for c in counts):
            raise ValueError("counts must all be >= 2")
        object.__setattr__(self, "counts", counts)

    @property
    def dim(self) -> int:
        return self.origin.size

    @property
    def total_points(self) -> int:
        return int(np.prod(self.counts))

    def axes(self) -> list[np.ndarray]:
        return [
            np.linspace(o - e, o + e, c)
            for o, e, c in zip(self.origin, self.extents, self.counts)
        ]

    def points(self) -> np.ndarray:
        """All grid points as a (total_points, dim) array, row-major."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.dim)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.origin - self.extents, self.origin + self.extents


@dataclass(frozen=True)
class Tolerances:
    """Shared tolerance policy; every field is strictly positive."""

    exact_zero: float = 1e-10
    fd_rel: float = 1e-6
    flatness: float = 1e-9
    jet_margin: float = 1e-8

    def __post_init__(self):
        for name in ("exact_zero", "fd_rel", "flatness", "jet_margin"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name} must be strictly positive")
