"""Singular viscosity solutions of the Aronsson equation, plus the
numerical certificates that justify them.

The construction: given a Hamiltonian that is constant along a segment
[a, b] and any scalar profile f with slope bound below 1, the function
u(x) = (b+a)/2 . x + f((b-a)/2 . x) solves the Aronsson equation in the
viscosity sense.  This package builds such solutions and verifies every
structural claim numerically: gradient range, perpendicularity, the
factorized operator cancellation, eikonal levels, mollified convergence,
and sampled semijet conditions at kink points.
"""

from ._kernels import lane_name as kernel_lane
from .core import Grid, Segment, Tolerances, convex_coordinate, project_to_segment
from .errors import (
    AronssonLabError,
    CertificateMismatch,
    DegenerateSegment,
    DimensionMismatch,
    FlatnessViolation,
    KinkProximity,
    LipschitzViolation,
    NotOnKink,
    ParseError,
    QuadratureFailure,
    SchemaError,
)
from .hamiltonian import (
    FlatnessCertificate,
    HamiltonianModel,
    LinearOrthogonal,
    Quadratic,
    SegmentDistanceSquared,
    SumHamiltonian,
    fd_gradient,
    validate_flat_segment,
)
from .profile import (
    Mollifier,
    MollifiedProfile,
    PiecewiseLinear,
    Profile,
    Sawtooth,
    ScaledSine,
    WeierstrassPrimitive,
    certify_lip,
    mollify,
    sup_distance,
)
from .scenario import Scenario, build_scenario, load_scenario
from .solution import GradientRangeCertificate, SingularSolution
from .verify import (
    AronssonEvaluation,
    JetCheckResult,
    JetSampler,
    MollificationTable,
    VerificationReport,
    aronsson_analytic,
    aronsson_fd,
    eikonal_residual,
    identity_eq4_residual,
    kink_clearance,
    mollification_suite,
    perpendicularity_residual,
    viscosity_jet_check,
)

__version__ = "0.1.0"

__all__ = [
    "AronssonEvaluation",
    "AronssonLabError",
    "CertificateMismatch",
    "DegenerateSegment",
    "DimensionMismatch",
    "FlatnessCertificate",
    "FlatnessViolation",
    "GradientRangeCertificate",
    "Grid",
    "HamiltonianModel",
    "JetCheckResult",
    "JetSampler",
    "KinkProximity",
    "LinearOrthogonal",
    "LipschitzViolation",
    "MollificationTable",
    "MollifiedProfile",
    "Mollifier",
    "NotOnKink",
    "ParseError",
    "PiecewiseLinear",
    "Profile",
    "Quadratic",
    "QuadratureFailure",
    "Sawtooth",
    "ScaledSine",
    "Scenario",
    "SchemaError",
    "Segment",
    "SegmentDistanceSquared",
    "SingularSolution",
    "SumHamiltonian",
    "Tolerances",
    "VerificationReport",
    "WeierstrassPrimitive",
    "aronsson_analytic",
    "aronsson_fd",
    "build_scenario",
    "certify_lip",
    "convex_coordinate",
    "eikonal_residual",
    "fd_gradient",
    "identity_eq4_residual",
    "kernel_lane",
    "kink_clearance",
    "load_scenario",
    "mollification_suite",
    "mollify",
    "perpendicularity_residual",
    "project_to_segment",
    "sup_distance",
    "validate_flat_segment",
    "viscosity_jet_check",
]
