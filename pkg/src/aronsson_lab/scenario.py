"""Scenario ingestion: strict JSON schema -> constructed model objects.

A scenario bundles one segment, one Hamiltonian, one profile, a sampling
grid, and the list of enabled checks.  All cross-field invariants (shared
dimension, orthogonality of a linear Hamiltonian's direction, kink levels
for the jet check) are validated here, at load time.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Grid, Segment, Tolerances
from .errors import DimensionMismatch, ParseError, SchemaError
from .hamiltonian import HamiltonianModel, build_hamiltonian
from .profile import KINK_TOL, Profile, build_profile
from .verify import JetSampler

CHECK_NAMES = (
    "flatness",
    "gradient_range",
    "perpendicularity",
    "eikonal",
    "aronsson_analytic",
    "aronsson_fd",
    "eq4_identity",
    "mollification",
    "jets",
)

DEFAULT_CHECKS = (
    "flatness",
    "gradient_range",
    "perpendicularity",
    "eikonal",
    "aronsson_analytic",
)


def check_keys(obj: dict, required: set, optional: set = frozenset(),
               context: str = "object") -> None:
    """Reject missing required keys and unknown extra keys."""
    if not isinstance(obj, dict):
        raise SchemaError(f"{context}: expected a JSON object, got {type(obj).__name__}")
    keys = set(obj)
    missing = required - keys
    extra = keys - required - set(optional)
    if missing:
        raise SchemaError(f"{context}: missing keys {sorted(missing)}")
    if extra:
        raise SchemaError(f"{context}: unknown keys {sorted(extra)}")


@dataclass(frozen=True)
class Scenario:
    name: str
    dimension: int
    segment: Segment
    hamiltonian: HamiltonianModel
    profile: Profile
    grid: Grid
    epsilons: tuple[float, ...]
    tolerances: Tolerances
    checks: tuple[str, ...]
    jet_kinks: tuple[float, ...] | None
    jet_sampler: JetSampler
    raw: dict  # verbatim echo of the scenario file, for the report


def _vector_field(obj, key, dim, context):
    try:
        v = np.asarray(obj[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{context}: {key} is not a numeric array") from exc
    if v.ndim != 1 or v.size != dim:
        raise DimensionMismatch(
            f"{context}: {key} has length {v.size}, expected {dim}"
        )
    return v


def build_scenario(data: dict) -> Scenario:
    """Validate a parsed scenario dict and construct its model objects."""
    check_keys(
        data,
        {"name", "dimension", "segment", "hamiltonian", "profile", "grid"},
        optional={"epsilons", "tolerances", "checks", "jet_kinks", "jet_sampler"},
        context="scenario",
    )
    name = data["name"]
    if not isinstance(name, str) or not name:
        raise SchemaError("scenario: name must be a nonempty string")
    dim = data["dimension"]
    if not isinstance(dim, int) or dim < 2:
        raise SchemaError("scenario: dimension must be an integer >= 2")

    check_keys(data["segment"], {"a", "b"}, context="segment")
    a = _vector_field(data["segment"], "a", dim, "segment")
    b = _vector_field(data["segment"], "b", dim, "segment")
    segment = Segment(a, b)

    try:
        hamiltonian = build_hamiltonian(data["hamiltonian"], segment)
    except ValueError as exc:
        raise SchemaError(f"hamiltonian: {exc}") from exc
    try:
        profile = build_profile(data["profile"])
    except ValueError as exc:
        raise SchemaError(f"profile: {exc}") from exc

    check_keys(data["grid"], {"origin", "extents", "counts"}, context="grid")
    origin = _vector_field(data["grid"], "origin", dim, "grid")
    extents = _vector_field(data["grid"], "extents", dim, "grid")
    counts = data["grid"]["counts"]
    if (
        not isinstance(counts, list)
        or len(counts) != dim
        or not all(isinstance(c, int) for c in counts)
    ):
        raise DimensionMismatch(f"grid: counts must be {dim} integers")
    try:
        grid = Grid(origin, extents, tuple(counts))
    except ValueError as exc:
        raise SchemaError(f"grid: {exc}") from exc

    epsilons = tuple(float(e) for e in data.get("epsilons", []))

    tol_spec = data.get("tolerances", {})
    check_keys(
        tol_spec, set(), optional={"exact_zero", "fd_rel", "flatness", "jet_margin"},
        context="tolerances",
    )
    try:
        tolerances = dataclasses.replace(Tolerances(), **tol_spec)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"tolerances: {exc}") from exc

    checks = tuple(data.get("checks", DEFAULT_CHECKS))
    unknown = [c for c in checks if c not in CHECK_NAMES]
    if unknown:
        raise SchemaError(f"checks: unknown check names {unknown}")
    if len(set(checks)) != len(checks):
        raise SchemaError("checks: duplicate check names")
    if "eikonal" in checks and "flatness" not in checks:
        raise SchemaError("checks: eikonal needs the flatness level, enable flatness")
    if "mollification" in checks and not epsilons:
        raise SchemaError("checks: mollification enabled but epsilons is empty")

    jet_kinks = None
    if "jet_kinks" in data:
        if "jets" not in checks:
            raise SchemaError("jet_kinks given but the jets check is not enabled")
        jet_kinks = tuple(float(t) for t in data["jet_kinks"])
        for t_k in jet_kinks:
            if profile.kink_distance(t_k) > KINK_TOL:
                raise SchemaError(f"jet_kinks: {t_k} is not a kink of the profile")

    sampler_spec = data.get("jet_sampler", {})
    check_keys(
        sampler_spec,
        set(),
        optional={f.name for f in dataclasses.fields(JetSampler)},
        context="jet_sampler",
    )
    try:
        jet_sampler = JetSampler(**sampler_spec)
    except TypeError as exc:
        raise SchemaError(f"jet_sampler: {exc}") from exc

    return Scenario(
        name=name,
        dimension=dim,
        segment=segment,
        hamiltonian=hamiltonian,
        profile=profile,
        grid=grid,
        epsilons=epsilons,
        tolerances=tolerances,
        checks=checks,
        jet_kinks=jet_kinks,
        jet_sampler=jet_sampler,
        raw=data,
    )


def load_scenario(path) -> Scenario:
    """Load and fully validate a scenario file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return build_scenario(data)
