import numpy as np
import pytest

from aronsson_lab import (
    FlatnessViolation,
    LinearOrthogonal,
    Quadratic,
    Segment,
    SegmentDistanceSquared,
    SumHamiltonian,
    Tolerances,
    fd_gradient,
    validate_flat_segment,
)


@pytest.fixture
def seg():
    return Segment([-1.0, 0.0], [1.0, 0.0])


def _families(seg):
    return {
        "seg_dist_sq": SegmentDistanceSquared(seg, 1.0),
        "linear_orthogonal": LinearOrthogonal(seg, [0.0, 1.0]),
        "quadratic": Quadratic(2),
        "sum": SumHamiltonian(
            [SegmentDistanceSquared(seg, 1.0), LinearOrthogonal(seg, [0.0, 1.0])]
        ),
    }


class TestFdGradientOracle:
    def test_linear_exact(self, seg):
        H = LinearOrthogonal(seg, [0.0, 1.0], offset=3.0)
        g = fd_gradient(H, [0.3, -2.0], h=1e-5)
        assert np.allclose(g, [0.0, 1.0], atol=1e-11)

    def test_quadratic_near_exact(self):
        H = Quadratic(2)
        g = fd_gradient(H, [1.0, 2.0], h=1e-5)
        assert np.max(np.abs(g - [1.0, 2.0])) <= 1e-9

    def test_seg_dist_sq_off_segment(self, seg):
        H = SegmentDistanceSquared(seg, 1.0)
        g = fd_gradient(H, [0.0, 1.0], h=1e-5)
        assert np.allclose(g, [0.0, 2.0], atol=1e-9)

    def test_positive_step_required(self, seg):
        with pytest.raises(ValueError):
            fd_gradient(Quadratic(2), [0.0, 0.0], h=0.0)


class TestGradientAgainstOracle:
    @pytest.mark.parametrize("name", ["seg_dist_sq", "linear_orthogonal", "quadratic", "sum"])
    def test_analytic_matches_fd(self, seg, name):
        H = _families(seg)[name]
        rng = np.random.default_rng(42)
        tol = Tolerances()
        for _ in range(100):
            p = rng.uniform(-3, 3, size=2)
            g = H.gradient(p)
            g_fd = fd_gradient(H, p, h=1e-5)
            bound = max(1e-7, tol.fd_rel * float(np.linalg.norm(g)))
            assert np.max(np.abs(g - g_fd)) <= bound

    def test_gradient_vanishes_on_segment(self, seg):
        H = SegmentDistanceSquared(seg, 2.5)
        for lam in np.linspace(0.0, 1.0, 17):
            q = lam * seg.a + (1.0 - lam) * seg.b
            assert np.allclose(H.gradient(q), 0.0, atol=1e-15)

    def test_sum_is_exact_sum(self, seg):
        parts = [SegmentDistanceSquared(seg, 1.0), LinearOrthogonal(seg, [0.0, 1.0], 0.5)]
        H = SumHamiltonian(parts)
        rng = np.random.default_rng(1)
        P = rng.uniform(-3, 3, size=(40, 2))
        v = parts[0].value(P) + parts[1].value(P)
        g = parts[0].gradient(P) + parts[1].gradient(P)
        assert np.array_equal(H.value(P), v)
        assert np.array_equal(H.gradient(P), g)


class TestLinearOrthogonal:
    def test_rejects_nonorthogonal_w(self, seg):
        with pytest.raises(ValueError):
            LinearOrthogonal(seg, [1.0, 0.0])

    def test_batch_matches_pointwise(self, seg):
        H = LinearOrthogonal(seg, [0.0, 2.0], offset=-1.0)
        P = np.array([[0.0, 0.0], [1.0, 3.0]])
        assert np.allclose(H.value(P), [H.value(P[0]), H.value(P[1])])


class TestValidateFlatSegment:
    def test_seg_dist_sq_flat_on_own_segment(self, seg):
        cert = validate_flat_segment(SegmentDistanceSquared(seg, 1.0), seg, samples=99)
        assert cert.level_c == 0.0
        # zero up to rounding of the projection arithmetic
        assert cert.max_value_residual <= 1e-30
        assert cert.max_derivative_residual <= 1e-15
        assert cert.sample_count == 99
        assert cert.passed

    def test_linear_orthogonal_flat(self, seg):
        cert = validate_flat_segment(LinearOrthogonal(seg, [0.0, 1.0]), seg, samples=99)
        assert cert.level_c == 0.0
        assert cert.max_value_residual <= 1e-15

    def test_quadratic_violates_with_expected_worst_residual(self, seg):
        # 99 samples: t = 0.01..0.99, worst at t=0.99 where p1 = 0.98 and
        # the value residual is 0.5 * 0.98^2 = 0.4802
        with pytest.raises(FlatnessViolation) as err:
            validate_flat_segment(Quadratic(2), seg, samples=99)
        assert err.value.residual == pytest.approx(0.4802, abs=1e-12)
        assert err.value.worst_t in (pytest.approx(0.01), pytest.approx(0.99))

    def test_no_flat_segment_for_quadratic_between_unequal_norms(self):
        # strictly level-convex H: any segment joining points of different
        # norms fails (the necessity direction, as a negative control)
        rng = np.random.default_rng(9)
        for _ in range(10):
            a = rng.uniform(-2, 2, size=2)
            b = rng.uniform(-2, 2, size=2)
            if abs(np.linalg.norm(a) - np.linalg.norm(b)) < 1e-3:
                continue
            with pytest.raises(FlatnessViolation):
                validate_flat_segment(Quadratic(2), Segment(a, b), samples=33)

    def test_sum_flat_with_nonzero_gradient(self, seg):
        H = SumHamiltonian(
            [SegmentDistanceSquared(seg, 1.0), LinearOrthogonal(seg, [0.0, 1.0])]
        )
        cert = validate_flat_segment(H, seg, samples=99)
        assert cert.level_c == 0.0
        # gradient on the segment is w, nonzero but perpendicular
        assert np.allclose(H.gradient(seg.midpoint), [0.0, 1.0])

    def test_minimum_samples(self, seg):
        with pytest.raises(ValueError):
            validate_flat_segment(Quadratic(2), seg, samples=2)
