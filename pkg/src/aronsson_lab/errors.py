"""Exception hierarchy shared across the package."""


class AronssonLabError(Exception):
    """Base class for every error raised by this package."""


class DegenerateSegment(AronssonLabError):
    """Segment endpoints coincide; the construction needs |b - a| > 0."""


class LipschitzViolation(AronssonLabError):
    """Profile construction with a certified slope bound >= 1."""


class FlatnessViolation(AronssonLabError):
    """The Hamiltonian is not constant along the declared segment.

    Carries the worst offending interior parameter and its residual.
    """

    def __init__(self, message, worst_t, residual):
        super().__init__(message)
        self.worst_t = worst_t
        self.residual = residual


class QuadratureFailure(AronssonLabError):
    """Mollifier mass self-test missed 1 beyond tolerance at the chosen rule."""


class CertificateMismatch(AronssonLabError):
    """Measured slope bound exceeds the profile's declared Lipschitz bound."""


class KinkProximity(AronssonLabError):
    """A finite-difference stencil would straddle the kink locus."""


class NotOnKink(AronssonLabError):
    """Jet check requested at a point not on the kink locus."""


class ParseError(AronssonLabError):
    """Scenario file is not valid JSON."""


class SchemaError(AronssonLabError):
    """Scenario JSON is well-formed but violates the schema."""


class DimensionMismatch(SchemaError):
    """Cross-field dimension inconsistency in a scenario."""
