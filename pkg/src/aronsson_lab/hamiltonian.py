"""C1 Hamiltonians with analytic gradients and the flat-segment gate.

The only structural hypothesis the solution family needs is that H is
constant along the declared segment; :func:`validate_flat_segment` turns
that hypothesis into a sampled certificate (values and tangential
derivatives along the open segment).

All models evaluate pointwise (length-n vector) or batched ((N, n) array);
gradients match the input shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Segment, Tolerances, as_vector
from .errors import FlatnessViolation

DEFAULT_FD_STEP = 1e-5  # near cube root of machine epsilon, scaled


def _as_points(p, dim):
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 1:
        if arr.size != dim:
            raise ValueError(f"expected dimension {dim}, got {arr.size}")
        return arr.reshape(1, dim), True
    if arr.ndim == 2 and arr.shape[1] == dim:
        return arr, False
    raise ValueError(f"expected (n,) or (N, n) with n={dim}, got {arr.shape}")


class HamiltonianModel:
    """Base class; subclasses implement batched _value/_gradient."""

    kind: str
    dim: int

    def _value(self, P: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _gradient(self, P: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def value(self, p):
        P, single = _as_points(p, self.dim)
        vals = self._value(P)
        return float(vals[0]) if single else vals

    def gradient(self, p):
        P, single = _as_points(p, self.dim)
        grads = self._gradient(P)
        return grads[0] if single else grads

    def describe(self) -> dict:
        raise NotImplementedError


class SegmentDistanceSquared(HamiltonianModel):
    """H(p) = scale * dist(p, [a,b])^2.

    Squared distance to a convex set is C1 everywhere (plain distance is
    not C1 on the set itself); the gradient 2*scale*(p - proj(p)) vanishes
    on the segment.
    """

    kind = "seg_dist_sq"

    def __init__(self, seg: Segment, scale: float = 1.0):
        if not scale > 0:
            raise ValueError("scale must be positive")
        self.seg = seg
        self.scale = float(scale)
        self.dim = seg.dim

    def _projection(self, P):
        ab = self.seg.a - self.seg.b
        lam = (P - self.seg.b) @ ab / (ab @ ab)
        lam = np.clip(lam, 0.0, 1.0)
        return self.seg.b + lam[:, None] * ab

    def _value(self, P):
        diff = P - self._projection(P)
        return self.scale * np.sum(diff * diff, axis=1)

    def _gradient(self, P):
        return 2.0 * self.scale * (P - self._projection(P))

    def describe(self):
        return {"kind": "seg_dist_sq", "scale": self.scale}


class LinearOrthogonal(HamiltonianModel):
    """H(p) = w.p + offset with w perpendicular to the segment direction.

    Constant along any segment parallel to b - a, with constant nonzero
    gradient w: the nondegenerate perpendicularity case.
    """

    kind = "linear_orthogonal"

    def __init__(self, seg: Segment, w, offset: float = 0.0):
        w = as_vector(w, dim=seg.dim)
        tang = float(np.dot(w, seg.direction))
        scale = max(1.0, float(np.linalg.norm(w)) * seg.length)
        if abs(tang) > 1e-12 * scale:
            raise ValueError(
                f"w must be orthogonal to the segment direction; w.(b-a) = {tang}"
            )
        self.seg = seg
        self.w = w
        self.offset = float(offset)
        self.dim = seg.dim

    def _value(self, P):
        return P @ self.w + self.offset

    def _gradient(self, P):
        return np.broadcast_to(self.w, P.shape).copy()

    def describe(self):
        return {"kind": "linear_orthogonal", "w": self.w.tolist(), "offset": self.offset}


class Quadratic(HamiltonianModel):
    """H(p) = |p|^2 / 2: strictly level-convex, so it has no flat segment.

    Ships as the negative control; the associated equation is the
    infinity-Laplacian.
    """

    kind = "quadratic"

    def __init__(self, dim: int):
        self.dim = int(dim)

    def _value(self, P):
        return 0.5 * np.sum(P * P, axis=1)

    def _gradient(self, P):
        return P.copy()

    def describe(self):
        return {"kind": "quadratic"}


class SumHamiltonian(HamiltonianModel):
    """Pointwise sum; value and gradient are the sums of the parts."""

    kind = "sum"

    def __init__(self, terms):
        terms = list(terms)
        if not terms:
            raise ValueError("sum needs at least one term")
        dims = {t.dim for t in terms}
        if len(dims) != 1:
            raise ValueError("sum terms must share one dimension")
        self.terms = terms
        self.dim = dims.pop()

    def _value(self, P):
        out = self.terms[0]._value(P)
        for t in self.terms[1:]:
            out = out + t._value(P)
        return out

    def _gradient(self, P):
        out = self.terms[0]._gradient(P)
        for t in self.terms[1:]:
            out = out + t._gradient(P)
        return out

    def describe(self):
        return {"kind": "sum", "terms": [t.describe() for t in self.terms]}


def fd_gradient(ham: HamiltonianModel, p, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central-difference gradient: the independent oracle for H_p."""
    if not h > 0:
        raise ValueError("step must be positive")
    p = as_vector(p, dim=ham.dim)
    out = np.zeros_like(p)
    for i in range(p.size):
        e = np.zeros_like(p)
        e[i] = h
        out[i] = (ham.value(p + e) - ham.value(p - e)) / (2.0 * h)
    return out


@dataclass(frozen=True)
class FlatnessCertificate:
    """Sampled evidence that H is constant along the open segment."""

    segment: Segment
    level_c: float
    max_value_residual: float
    max_derivative_residual: float
    sample_count: int
    endpoint_values: tuple[float, float]  # H(a), H(b); informational only

    @property
    def passed(self) -> bool:
        return True  # violations raise instead of returning


def validate_flat_segment(
    ham: HamiltonianModel,
    seg: Segment,
    samples: int = 99,
    tol: Tolerances = Tolerances(),
) -> FlatnessCertificate:
    """Check H(t*b + (1-t)*a) = c and (b-a).H_p = 0 on the open segment.

    Samples t_i = i/(samples+1); the level c is pinned to H(midpoint).
    Raises FlatnessViolation (with the worst t) when either residual
    exceeds tol.flatness.
    """
    if samples < 3:
        raise ValueError("need samples >= 3")
    t = np.arange(1, samples + 1) / (samples + 1)
    Q = t[:, None] * seg.b + (1.0 - t)[:, None] * seg.a
    c = ham.value(seg.midpoint)
    value_res = np.abs(ham.value(Q) - c)
    deriv_res = np.abs(ham.gradient(Q) @ seg.direction)
    iv, id_ = int(np.argmax(value_res)), int(np.argmax(deriv_res))
    max_v, max_d = float(value_res[iv]), float(deriv_res[id_])
    if max_v > tol.flatness or max_d > tol.flatness:
        # report the value residual when it violates on its own; the
        # derivative residual is its consequence
        if max_v > tol.flatness:
            worst_t, worst_res = float(t[iv]), max_v
        else:
            worst_t, worst_res = float(t[id_]), max_d
        raise FlatnessViolation(
            f"H is not flat along the segment: value residual {max_v:.3e}, "
            f"derivative residual {max_d:.3e} (tolerance {tol.flatness:.1e}, "
            f"worst t = {worst_t})",
            worst_t=worst_t,
            residual=worst_res,
        )
    return FlatnessCertificate(
        segment=seg,
        level_c=float(c),
        max_value_residual=max_v,
        max_derivative_residual=max_d,
        sample_count=samples,
        endpoint_values=(ham.value(seg.a), ham.value(seg.b)),
    )


def build_hamiltonian(spec: dict, seg: Segment) -> HamiltonianModel:
    """Construct a model from its JSON description (segment supplied once)."""
    from .scenario import check_keys

    kind = spec.get("kind")
    if kind == "seg_dist_sq":
        check_keys(spec, {"kind"}, optional={"scale"}, context="seg_dist_sq")
        return SegmentDistanceSquared(seg, scale=float(spec.get("scale", 1.0)))
    if kind == "linear_orthogonal":
        check_keys(spec, {"kind", "w"}, optional={"offset"}, context="linear_orthogonal")
        return LinearOrthogonal(seg, spec["w"], offset=float(spec.get("offset", 0.0)))
    if kind == "quadratic":
        check_keys(spec, {"kind"}, context="quadratic")
        return Quadratic(seg.dim)
    if kind == "sum":
        check_keys(spec, {"kind", "terms"}, context="sum")
        return SumHamiltonian(build_hamiltonian(t, seg) for t in spec["terms"])
    raise ValueError(f"unknown hamiltonian kind {kind!r}")
