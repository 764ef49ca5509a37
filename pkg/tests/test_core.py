import numpy as np
import pytest

from aronsson_lab import (
    DegenerateSegment,
    Grid,
    Segment,
    Tolerances,
    convex_coordinate,
    project_to_segment,
)


@pytest.fixture
def seg():
    return Segment([-1.0, 0.0], [1.0, 0.0])


class TestSegment:
    def test_midpoint_and_half_difference(self, seg):
        assert np.allclose(seg.midpoint, [0.0, 0.0])
        assert np.allclose(seg.half_difference, [1.0, 0.0])
        assert seg.length == 2.0

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateSegment):
            Segment([1.0, 2.0], [1.0, 2.0])

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            Segment([np.nan, 0.0], [1.0, 0.0])
        with pytest.raises(ValueError):
            Segment([np.inf, 0.0], [1.0, 0.0])

    def test_dimension_floor(self):
        with pytest.raises(ValueError):
            Segment([0.0], [1.0])

    def test_mismatched_dims(self):
        with pytest.raises(ValueError):
            Segment([0.0, 0.0], [1.0, 0.0, 0.0])


class TestConvexCoordinate:
    def test_endpoint_identity(self, seg):
        lam, res = convex_coordinate(seg.a, seg)
        assert lam == pytest.approx(1.0, abs=1e-14)
        assert res == pytest.approx(0.0, abs=1e-14)

    def test_midpoint_symmetry(self, seg):
        lam, res = convex_coordinate(seg.midpoint, seg)
        assert lam == pytest.approx(0.5, abs=1e-14)
        assert res == pytest.approx(0.0, abs=1e-14)

    def test_hand_solved_quarter(self, seg):
        # lam*(-1) + (1-lam)*1 = 0.5  =>  lam = 0.25
        lam, res = convex_coordinate([0.5, 0.0], seg)
        assert lam == pytest.approx(0.25, abs=1e-14)
        assert res == pytest.approx(0.0, abs=1e-14)

    def test_residual_matches_distance_to_line(self, seg):
        rng = np.random.default_rng(7)
        for _ in range(50):
            q = rng.uniform(-3, 3, size=2)
            lam, res = convex_coordinate(q, seg)
            foot = lam * seg.a + (1.0 - lam) * seg.b
            assert abs(np.linalg.norm(q - foot) - res) <= 1e-12

    def test_swap_invariance(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            a, b = rng.uniform(-2, 2, size=(2, 3))
            if np.linalg.norm(a - b) < 1e-6:
                continue
            seg = Segment(a, b)
            q = rng.uniform(-3, 3, size=3)
            lam, res = convex_coordinate(q, seg)
            lam_s, res_s = convex_coordinate(q, seg.swapped())
            assert lam_s == pytest.approx(1.0 - lam, abs=1e-12)
            assert res_s == pytest.approx(res, abs=1e-12)


def _projection_oracle(q, seg, n=200001):
    """Dense scan of |q - (lam a + (1-lam) b)| over lam in [0, 1]."""
    lam = np.linspace(0.0, 1.0, n)
    pts = lam[:, None] * seg.a + (1.0 - lam)[:, None] * seg.b
    d = np.linalg.norm(pts - q, axis=1)
    i = int(np.argmin(d))
    return pts[i], d[i]


class TestProjectToSegment:
    def test_on_segment_fixed_point(self, seg):
        proj, dist = project_to_segment([0.25, 0.0], seg)
        assert np.allclose(proj, [0.25, 0.0])
        assert dist == 0.0

    def test_perpendicular_foot(self, seg):
        proj, dist = project_to_segment([0.0, 1.0], seg)
        oracle_p, oracle_d = _projection_oracle(np.array([0.0, 1.0]), seg)
        assert np.allclose(proj, [0.0, 0.0], atol=1e-14)
        assert dist == pytest.approx(1.0, abs=1e-14)
        assert dist == pytest.approx(oracle_d, abs=1e-9)
        assert np.allclose(proj, oracle_p, atol=1e-5)

    def test_clamped_endpoint(self, seg):
        proj, dist = project_to_segment([2.0, 0.0], seg)
        _, oracle_d = _projection_oracle(np.array([2.0, 0.0]), seg)
        assert np.allclose(proj, [1.0, 0.0], atol=1e-14)
        assert dist == pytest.approx(1.0, abs=1e-14)
        assert dist == pytest.approx(oracle_d, abs=1e-9)

    def test_zero_distance_iff_on_segment(self, seg):
        rng = np.random.default_rng(3)
        for _ in range(100):
            q = rng.uniform(-2, 2, size=2)
            lam, res = convex_coordinate(q, seg)
            _, dist = project_to_segment(q, seg)
            on_segment = 0.0 <= lam <= 1.0 and res <= 1e-12
            assert (dist <= 1e-12) == on_segment

    def test_swap_invariance(self, seg):
        rng = np.random.default_rng(5)
        for _ in range(50):
            q = rng.uniform(-3, 3, size=2)
            p1, d1 = project_to_segment(q, seg)
            p2, d2 = project_to_segment(q, seg.swapped())
            assert np.allclose(p1, p2, atol=1e-12)
            assert d1 == pytest.approx(d2, abs=1e-12)


class TestGrid:
    def test_point_count_and_order(self):
        g = Grid([0.0, 0.0], [1.0, 2.0], (3, 2))
        pts = g.points()
        assert pts.shape == (6, 2)
        assert g.total_points == 6
        # row-major: second axis fastest
        assert np.allclose(pts[0], [-1.0, -2.0])
        assert np.allclose(pts[1], [-1.0, 2.0])
        assert np.allclose(pts[2], [0.0, -2.0])
        assert np.allclose(pts[-1], [1.0, 2.0])

    def test_bounding_box(self):
        g = Grid([1.0, -1.0], [0.5, 2.0], (2, 2))
        lo, hi = g.bounding_box()
        assert np.allclose(lo, [0.5, -3.0])
        assert np.allclose(hi, [1.5, 1.0])

    def test_counts_floor(self):
        with pytest.raises(ValueError):
            Grid([0.0, 0.0], [1.0, 1.0], (1, 3))

    def test_positive_extents(self):
        with pytest.raises(ValueError):
            Grid([0.0, 0.0], [1.0, 0.0], (3, 3))


class TestTolerances:
    def test_defaults(self):
        tol = Tolerances()
        assert tol.exact_zero == 1e-10
        assert tol.fd_rel == 1e-6
        assert tol.flatness == 1e-9
        assert tol.jet_margin == 1e-8

    @pytest.mark.parametrize("field", ["exact_zero", "fd_rel", "flatness", "jet_margin"])
    def test_positive_required(self, field):
        with pytest.raises(ValueError):
            Tolerances(**{field: 0.0})
