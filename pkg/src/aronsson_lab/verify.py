"""Verification operators for the singular solution family.

Two independent routes to the Aronsson operator are kept side by side:

* the analytic factorized form  A[u] = (1/4) f''(d.x) * beta^2  with
  beta = (b-a) . H_p(Du(x)), which is exactly the mechanism that makes the
  construction work (beta vanishes when H is flat along the segment), and
* a pure finite-difference route that only sees u through point values.

The jet checker operationalizes the viscosity conditions at kink points by
sampling quadratic test functions: candidate gradients interpolate the two
one-sided slopes, candidate Hessians live in the plane spanned by the
segment direction and one orthogonal direction, and touching is verified
numerically on a small ball.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .core import Grid, Segment, Tolerances
from .errors import KinkProximity, NotOnKink
from .hamiltonian import HamiltonianModel
from .profile import KINK_TOL, Mollifier, Profile, certify_lip, mollify
from .solution import SingularSolution

DEFAULT_FD_ARONSSON_STEP = 1e-3
DEFAULT_EQ4_STEP = 1e-3


# --------------------------------------------------------------------------
# pointwise residual operators
# --------------------------------------------------------------------------

def perpendicularity_residual(ham: HamiltonianModel, sol: SingularSolution, x):
    """|(b-a) . H_p(Du(x))|, or None on the kink locus."""
    du = sol.gradient(x)
    if du is None:
        return None
    return float(abs(np.dot(sol.seg.direction, ham.gradient(du))))


def eikonal_residual(ham: HamiltonianModel, sol: SingularSolution, x, c: float):
    """|H(Du(x)) - c| against the flatness level c, or None at kinks."""
    du = sol.gradient(x)
    if du is None:
        return None
    return float(abs(ham.value(du) - c))


@dataclass
class AronssonEvaluation:
    """One point of the factorized operator; fd side filled on demand."""

    x: np.ndarray
    beta: float | None
    fpp: float | None
    residual_analytic: float | None
    residual_fd: float | None = None


def aronsson_analytic(ham: HamiltonianModel, sol: SingularSolution, x) -> AronssonEvaluation:
    """Factorized operator value (1/4) f'' beta^2 at one point.

    beta is computed whenever Du is defined; the curvature factor (and so
    the residual) only where the profile supports second derivatives.
    """
    x = np.asarray(x, dtype=float)
    du = sol.gradient(x)
    if du is None:
        return AronssonEvaluation(x=x, beta=None, fpp=None, residual_analytic=None)
    beta = float(np.dot(sol.seg.direction, ham.gradient(du)))
    fpp = sol.profile.second_derivative(float(sol.scalar_parameter(x)))
    residual = None if fpp is None else 0.25 * fpp * beta * beta
    return AronssonEvaluation(x=x, beta=beta, fpp=fpp, residual_analytic=residual)


# --------------------------------------------------------------------------
# batched sweeps (used by the runner; same math as the pointwise ops)
# --------------------------------------------------------------------------

def beta_sweep(ham, sol, points):
    """((b-a) . H_p(Du) per point, defined mask); NaN rows where undefined."""
    grads, defined = sol.gradient_many(points)
    beta = ham.gradient(grads) @ sol.seg.direction
    beta = np.where(defined, beta, np.nan)
    return beta, defined


def residual_sweep(ham, sol, points):
    """Vectorized perpendicularity / eikonal / analytic residuals.

    Returns a dict of (N,) arrays (NaN where undefined) plus the mask.
    The eikonal column is |H(Du) - c| with c provided by the caller later;
    here we return the raw H(Du) values so one sweep serves any level.
    """
    grads, defined = sol.gradient_many(points)
    hp = ham.gradient(grads)
    beta = hp @ sol.seg.direction
    h_of_du = ham.value(grads)
    curv = sol.curvature_many(points)
    out = {
        "defined": defined,
        "beta": np.where(defined, beta, np.nan),
        "perpendicularity": np.where(defined, np.abs(beta), np.nan),
        "h_of_du": np.where(defined, h_of_du, np.nan),
    }
    if curv is not None:
        out["aronsson_analytic"] = np.where(defined, 0.25 * curv * beta * beta, np.nan)
    return out


def fd_hessian_field(u_many, points, h):
    """Second central differences of a batched scalar field at (N, n) points."""
    points = np.asarray(points, dtype=float)
    N, n = points.shape
    u0 = u_many(points)
    H = np.zeros((N, n, n))
    shifts = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        shifts.append(e)
    for i in range(n):
        up = u_many(points + shifts[i])
        dn = u_many(points - shifts[i])
        H[:, i, i] = (up - 2.0 * u0 + dn) / (h * h)
        for j in range(i + 1, n):
            pp = u_many(points + shifts[i] + shifts[j])
            pm = u_many(points + shifts[i] - shifts[j])
            mp = u_many(points - shifts[i] + shifts[j])
            mm = u_many(points - shifts[i] - shifts[j])
            val = (pp - pm - mp + mm) / (4.0 * h * h)
            H[:, i, j] = H[:, j, i] = val
    return H


def fd_gradient_field(u_many, points, h):
    """Central differences of a batched scalar field at (N, n) points."""
    points = np.asarray(points, dtype=float)
    N, n = points.shape
    G = np.zeros((N, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        G[:, i] = (u_many(points + e) - u_many(points - e)) / (2.0 * h)
    return G


def aronsson_fd_sweep(ham, u_many, points, h):
    """FD-only operator D^2u : H_p(Du) (x) H_p(Du) at (N, n) points."""
    G = fd_gradient_field(u_many, points, h)
    Hp = ham.gradient(G)
    Hess = fd_hessian_field(u_many, points, h)
    return np.einsum("nij,ni,nj->n", Hess, Hp, Hp)


def kink_clearance(sol: SingularSolution, points) -> np.ndarray:
    """Euclidean distance from each point to the kink hyperplane locus."""
    points = np.asarray(points, dtype=float)
    single = points.ndim == 1
    t = np.atleast_1d(sol.scalar_parameter(points))
    dist_t = np.atleast_1d(sol.profile.kink_distance(t))
    out = dist_t / float(np.linalg.norm(sol.half_difference))
    return out[0] if single else out


def aronsson_fd(ham: HamiltonianModel, u_field, x, h: float,
                clearance=None) -> float:
    """Pointwise FD operator value; the independent oracle.

    ``u_field`` sees only point batches, never analytic derivatives.
    ``clearance``: optional callable giving the distance to the kink locus;
    a stencil within 2h of it raises KinkProximity.
    """
    if not h > 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    if clearance is not None and clearance(x) <= 2.0 * h:
        raise KinkProximity(
            f"point within 2h = {2 * h} of the kink locus; FD stencil would straddle it"
        )
    return float(aronsson_fd_sweep(ham, u_field, x.reshape(1, -1), h)[0])


def eq4_identity_sweep(ham, sol, points, h):
    """|A[u] - H_p(Du) . grad_fd(H(Du))| at (N, n) points (all off-kink)."""
    points = np.asarray(points, dtype=float)
    N, n = points.shape

    def h_of_du(P):
        grads, defined = sol.gradient_many(P)
        if not np.all(defined):
            raise KinkProximity("H(Du) stencil hit the kink locus")
        return ham.value(grads)

    g = fd_gradient_field(h_of_du, points, h)
    grads, defined = sol.gradient_many(points)
    if not np.all(defined):
        raise KinkProximity("eq4 identity evaluated on the kink locus")
    hp = ham.gradient(grads)
    curv = sol.curvature_many(points)
    if curv is None:
        raise ValueError("eq4 identity needs a profile with second derivatives")
    beta = hp @ sol.seg.direction
    analytic = 0.25 * curv * beta * beta
    return np.abs(analytic - np.sum(hp * g, axis=1))


def identity_eq4_residual(ham: HamiltonianModel, sol: SingularSolution, x,
                          h: float = DEFAULT_EQ4_STEP) -> float:
    """Pointwise chain-rule identity residual; KinkProximity within 2h."""
    x = np.asarray(x, dtype=float)
    if kink_clearance(sol, x) <= 2.0 * h:
        raise KinkProximity(f"point within 2h = {2 * h} of the kink locus")
    return float(eq4_identity_sweep(ham, sol, x.reshape(1, -1), h)[0])


# --------------------------------------------------------------------------
# mollification suite
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MollificationRow:
    epsilon: float
    sup_distance: float
    lip: float
    max_residual: float
    sup_bound: float  # lip(f) * epsilon


@dataclass(frozen=True)
class MollificationTable:
    rows: tuple[MollificationRow, ...]
    lip_bound: float
    residual_tol: float

    @property
    def passed(self) -> bool:
        sups = [r.sup_distance for r in self.rows]
        decreasing = all(a > b for a, b in zip(sups, sups[1:]))
        return decreasing and all(
            r.sup_distance <= r.sup_bound + 1e-12
            and r.lip <= self.lip_bound + 1e-8
            and r.max_residual <= self.residual_tol
            for r in self.rows
        )


def mollification_suite(
    ham: HamiltonianModel,
    seg: Segment,
    profile: Profile,
    epsilons,
    grid: Grid,
    tol: Tolerances = Tolerances(),
    lip_samples: int = 2001,
) -> MollificationTable:
    """Smooth-approximant table: convergence, slope bounds, exact residuals.

    For each epsilon (strictly decreasing) the smooth member u_eps must stay
    within lip(f)*eps of u on the grid, keep the slope bound, and satisfy
    the factorized operator to tol.exact_zero.
    """
    epsilons = [float(e) for e in epsilons]
    if any(a <= b for a, b in zip(epsilons, epsilons[1:])):
        raise ValueError("epsilons must be strictly decreasing")
    points = grid.points()
    base_sol = SingularSolution(seg, profile, unchecked=True)
    u_base = base_sol.value_many(points)
    t_vals = base_sol.scalar_parameter(points)
    t_lo, t_hi = float(np.min(t_vals)), float(np.max(t_vals))
    rows = []
    for eps in epsilons:
        f_eps = mollify(profile, Mollifier(eps))
        sol_eps = SingularSolution(seg, f_eps)
        sup = float(np.max(np.abs(sol_eps.value_many(points) - u_base)))
        lip_meas = certify_lip(f_eps, (t_lo - eps, t_hi + eps), lip_samples)
        sweep = residual_sweep(ham, sol_eps, points)
        max_res = float(np.max(np.abs(sweep["aronsson_analytic"])))
        rows.append(
            MollificationRow(
                epsilon=eps,
                sup_distance=sup,
                lip=lip_meas,
                max_residual=max_res,
                sup_bound=profile.lip_bound * eps,
            )
        )
    return MollificationTable(
        rows=tuple(rows), lip_bound=profile.lip_bound, residual_tol=tol.exact_zero
    )


# --------------------------------------------------------------------------
# structured report
# --------------------------------------------------------------------------

@dataclass
class VerificationReport:
    """Pass/fail record of every enabled check plus the field arrays.

    ``payload`` is the JSON-ready content with a stable key order (the
    serialization is byte-deterministic for a fixed scenario and seed);
    ``fields`` holds the per-gridpoint arrays for the CSV/plot dumps.
    """

    payload: dict
    grid: Grid | None
    fields: dict
    status: str  # "pass" | "check-failed" | "hypothesis-failed"

    @property
    def overall_pass(self) -> bool:
        return bool(self.payload.get("overall_pass", False))

    def to_json(self) -> str:
        return json.dumps(self.payload, indent=2, allow_nan=False) + "\n"


# --------------------------------------------------------------------------
# viscosity jet check at kink points
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class JetSampler:
    """Deterministic sampling plan for candidate jets and touching tests.

    Curvature pairs live on an n_curvatures^2 grid in the plane spanned by
    the segment direction and one orthogonal direction; touching is tested
    on rings so that both axes of that plane are sampled exactly.
    """

    n_gradients: int = 21
    n_curvatures: int = 21
    curvature_max: float = 5.0
    radius: float = 1e-2
    n_rings: int = 5
    n_angles: int = 40

    @property
    def n_surface(self) -> int:
        return self.n_rings * self.n_angles


@dataclass
class JetCheckResult:
    """Outcome of the sampled semijet test at one kink point."""

    x0: np.ndarray
    kink_t: float
    tested_jets: int
    upper_admitted: int
    lower_admitted: int
    worst_sub_violation: float
    worst_super_violation: float
    sub_vacuous: bool
    super_vacuous: bool
    witnesses: list
    elapsed_seconds: float
    # raw sampling arrays, for tests and diagnostics (not serialized)
    gradient_values: np.ndarray = field(repr=False, default=None)
    curvature_values: np.ndarray = field(repr=False, default=None)
    upper_ok: np.ndarray = field(repr=False, default=None)
    lower_ok: np.ndarray = field(repr=False, default=None)
    jet_operator: np.ndarray = field(repr=False, default=None)

    def passed(self, margin: float) -> bool:
        return (
            self.worst_sub_violation <= margin
            and self.worst_super_violation <= margin
        )


def _orthogonal_unit(direction: np.ndarray) -> np.ndarray:
    """Deterministic unit vector orthogonal to ``direction``."""
    vhat = direction / np.linalg.norm(direction)
    k = int(np.argmin(np.abs(vhat)))
    e = np.zeros_like(vhat)
    e[k] = 1.0
    q = e - float(e @ vhat) * vhat
    return q / np.linalg.norm(q)


def viscosity_jet_check(
    ham: HamiltonianModel,
    sol: SingularSolution,
    x0,
    sampler: JetSampler = JetSampler(),
    tol: Tolerances = Tolerances(),
) -> JetCheckResult:
    """Sampled sub/supersolution test at a kink point x0.

    Candidate gradients interpolate the one-sided slopes at the kink;
    candidate Hessians are c1 * vhat(x)vhat + c2 * q(x)q.  A candidate is
    upper-touching when phi >= u - margin on the sampled ball (then the
    subsolution side needs A(p, X) >= -margin) and lower-touching when
    phi <= u + margin (then A(p, X) <= margin).  Violations are reported as
    max(0, -A) and max(0, +A) over the admitted jets of each side.
    """
    start = time.perf_counter()
    x0 = np.asarray(x0, dtype=float)
    t0 = float(sol.scalar_parameter(x0))
    span = max(1.0, abs(t0) + 1.0)
    ks = sol.profile.kinks(t0 - span, t0 + span)
    if ks.size == 0 or np.min(np.abs(ks - t0)) > KINK_TOL:
        raise NotOnKink(f"d.x = {t0} is not a declared kink of the profile")
    t_k = float(ks[np.argmin(np.abs(ks - t0))])

    margin = tol.jet_margin
    seg = sol.seg
    direction = seg.direction
    norm_dir = float(np.linalg.norm(direction))
    vhat = direction / norm_dir
    q = _orthogonal_unit(direction)

    left, right = sol.profile.one_sided_slopes(t_k)
    s_lo, s_hi = min(left, right), max(left, right)
    s_vals = np.linspace(s_lo, s_hi, sampler.n_gradients)
    c_vals = np.linspace(-sampler.curvature_max, sampler.curvature_max,
                         sampler.n_curvatures)

    # touching samples on rings in the (vhat, q) plane
    radii = sampler.radius * (np.arange(1, sampler.n_rings + 1) / sampler.n_rings)
    angles = 2.0 * np.pi * np.arange(sampler.n_angles) / sampler.n_angles
    rr, aa = np.meshgrid(radii, angles, indexing="ij")
    xi = (rr * np.cos(aa)).reshape(-1, 1) * vhat + (rr * np.sin(aa)).reshape(-1, 1) * q

    u0 = sol.value(x0)
    du = sol.value_many(x0 + xi) - u0
    alpha = xi @ direction
    gamma = xi @ q
    base = xi @ sol.midpoint - du
    lin = 0.5 * alpha
    curv_d = 0.5 * (alpha / norm_dir) ** 2
    curv_q = 0.5 * gamma**2

    # phi - u over (gradient, c1, c2, sample)
    F = (
        base[None, None, None, :]
        + s_vals[:, None, None, None] * lin[None, None, None, :]
        + c_vals[None, :, None, None] * curv_d[None, None, None, :]
        + c_vals[None, None, :, None] * curv_q[None, None, None, :]
    )
    upper_ok = F.min(axis=3) >= -margin
    lower_ok = F.max(axis=3) <= margin

    # operator value A(p, X) = X : H_p(p) (x) H_p(p)
    p_cands = sol.midpoint[None, :] + 0.5 * s_vals[:, None] * direction[None, :]
    v = ham.gradient(p_cands)
    comp_d = (v @ vhat) ** 2
    comp_q = (v @ q) ** 2
    A = (
        c_vals[None, :, None] * comp_d[:, None, None]
        + c_vals[None, None, :] * comp_q[:, None, None]
    )

    sub_viol = np.where(upper_ok, np.maximum(0.0, -A), 0.0)
    super_viol = np.where(lower_ok, np.maximum(0.0, A), 0.0)
    worst_sub = float(sub_viol.max()) if upper_ok.any() else 0.0
    worst_super = float(super_viol.max()) if lower_ok.any() else 0.0

    witnesses = []

    def _jet(j, k, l):
        X = c_vals[k] * np.outer(vhat, vhat) + c_vals[l] * np.outer(q, q)
        return p_cands[j], X

    def _record(idx, side):
        j, k, l = (int(i) for i in idx)
        p, X = _jet(j, k, l)
        witnesses.append(
            {
                "p": p.tolist(),
                "X": X.tolist(),
                "side": side,
                "A": float(A[j, k, l]),
            }
        )

    for idx in np.argwhere(sub_viol > margin)[:25]:
        _record(idx, "upper-touching (subsolution violation)")
    for idx in np.argwhere(super_viol > margin)[:25]:
        _record(idx, "lower-touching (supersolution violation)")
    if upper_ok.any():
        masked = np.where(upper_ok, A, np.inf)
        _record(np.unravel_index(np.argmin(masked), A.shape), "upper-touching (extremal)")
    if lower_ok.any():
        masked = np.where(lower_ok, A, -np.inf)
        _record(np.unravel_index(np.argmax(masked), A.shape), "lower-touching (extremal)")

    return JetCheckResult(
        x0=x0,
        kink_t=t_k,
        tested_jets=int(A.size),
        upper_admitted=int(upper_ok.sum()),
        lower_admitted=int(lower_ok.sum()),
        worst_sub_violation=worst_sub,
        worst_super_violation=worst_super,
        sub_vacuous=not bool(upper_ok.any()),
        super_vacuous=not bool(lower_ok.any()),
        witnesses=witnesses,
        elapsed_seconds=time.perf_counter() - start,
        gradient_values=s_vals,
        curvature_values=c_vals,
        upper_ok=upper_ok,
        lower_ok=lower_ok,
        jet_operator=A,
    )
