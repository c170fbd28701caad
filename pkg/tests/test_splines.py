import numpy as np
import pytest

from fsbeam.splines import (
    KnotVector,
    NurbsCurve,
    SplineDomainError,
    basis_derivatives,
    curve_derivatives,
    elevate_degree,
    find_span,
    insert_knot,
    make_circular_arc,
    make_line,
    refine_uniform,
)

RNG = np.random.default_rng(20240341)


def uniform_cubic_knots(n_el=4):
    interior = np.linspace(0.0, 1.0, n_el + 1)[1:-1]
    vals = np.concatenate([np.zeros(4), interior, np.ones(4)])
    return KnotVector(vals, 3)


def quarter_circle(radius=1.0):
    return make_circular_arc(
        center=(0.0, 0.0, 0.0),
        start_dir=(1.0, 0.0, 0.0),
        sweep_dir=(0.0, 1.0, 0.0),
        radius=radius,
        angle=np.pi / 2.0,
    )


def wavy_space_curve():
    """Generic non-planar cubic test curve with nontrivial weights."""
    kv = uniform_cubic_knots(3)
    pts = np.array(
        [
            [0.0, 0.0, 0.0],
            [1.0, 0.6, 0.2],
            [2.0, 0.9, -0.4],
            [3.1, 0.2, 0.5],
            [4.0, -0.5, 0.1],
            [5.0, 0.0, -0.3],
        ]
    )
    w = np.array([1.0, 0.9, 1.2, 1.0, 1.1, 1.0])
    return NurbsCurve(kv, pts, w)


class TestFindSpan:
    def test_left_end_maps_to_first_span(self):
        kv = uniform_cubic_knots(4)
        assert find_span(kv, 0.0) == 3

    def test_right_end_maps_to_last_span(self):
        kv = uniform_cubic_knots(4)
        n = kv.n_basis
        assert find_span(kv, 1.0) == n - 1

    def test_mid_knot_on_simple_vector(self):
        kv = KnotVector(np.array([0, 0, 0, 0, 0.5, 1, 1, 1, 1.0]), 3)
        # u = 0.5 lies in the span [0.5, 1)
        assert find_span(kv, 0.5) == 4
        # brute-force scan oracle over the nonempty spans
        for u in RNG.uniform(0.0, 1.0, 40):
            i = find_span(kv, u)
            assert kv.values[i] <= u < kv.values[i + 1] or (u == 1.0 and i == kv.n_basis - 1)

    def test_outside_domain_raises(self):
        kv = uniform_cubic_knots(2)
        with pytest.raises(SplineDomainError):
            find_span(kv, -0.01)
        with pytest.raises(SplineDomainError):
            find_span(kv, 1.01)


class TestBasisDerivatives:
    def test_linear_hat_functions(self):
        kv = KnotVector(np.array([0.0, 0.0, 1.0, 1.0]), 1)
        crv = NurbsCurve(kv, np.array([[0.0, 0, 0], [1.0, 0, 0]]), np.ones(2))
        _, R = basis_derivatives(crv, 0.5, 1)
        np.testing.assert_allclose(R[0], [0.5, 0.5], atol=1e-15)

    @pytest.mark.parametrize("curve_factory", [quarter_circle, wavy_space_curve])
    def test_partition_of_unity_and_derivative_sums(self, curve_factory):
        crv = curve_factory()
        for u in RNG.uniform(0.0, 1.0, 25):
            _, R = basis_derivatives(crv, u, 3)
            assert abs(R[0].sum() - 1.0) < 1e-13
            for m in range(1, 4):
                assert abs(R[m].sum()) < 1e-13 * max(1.0, np.abs(R[m]).max())

    def test_third_derivative_matches_fd_of_second(self):
        crv = quarter_circle()
        h = 1e-6
        for u in [0.2, 0.47, 0.8]:
            _, R = basis_derivatives(crv, u, 3)
            _, Rp = basis_derivatives(crv, u + h, 2)
            _, Rm = basis_derivatives(crv, u - h, 2)
            fd = (Rp[2] - Rm[2]) / (2 * h)
            np.testing.assert_allclose(R[3], fd, rtol=1e-6, atol=1e-6 * np.abs(R[3]).max())


class TestCurveDerivatives:
    def test_straight_line_higher_derivatives_vanish(self):
        crv = make_line((0, 0, 0), (2.0, 1.0, 0.5), degree=3)
        for u in RNG.uniform(0.0, 1.0, 10):
            d = curve_derivatives(crv, u, 3)
            np.testing.assert_allclose(d[2], 0.0, atol=1e-12)
            np.testing.assert_allclose(d[3], 0.0, atol=1e-12)

    def test_quarter_circle_radius_exact(self):
        R = 2.5
        crv = quarter_circle(R)
        for u in RNG.uniform(0.0, 1.0, 50):
            r = curve_derivatives(crv, u, 0)[0]
            assert abs(np.linalg.norm(r) - R) < 1e-12 * R

    @pytest.mark.parametrize("curve_factory", [quarter_circle, wavy_space_curve])
    def test_derivatives_match_nested_finite_differences(self, curve_factory):
        crv = curve_factory()
        h = 1e-6
        for u in [0.15, 0.5, 0.83]:
            d = curve_derivatives(crv, u, 3)
            for m in range(1, 4):
                dp = curve_derivatives(crv, u + h, m - 1)[m - 1]
                dm = curve_derivatives(crv, u - h, m - 1)[m - 1]
                fd = (dp - dm) / (2 * h)
                scale = max(np.linalg.norm(d[m]), 1.0)
                assert np.linalg.norm(d[m] - fd) < 1e-6 * scale

    def test_first_derivative_tight_fd(self):
        crv = wavy_space_curve()
        h = 1e-5
        for u in RNG.uniform(0.05, 0.95, 10):
            d = curve_derivatives(crv, u, 1)
            fd = (curve_derivatives(crv, u + h, 0)[0] - curve_derivatives(crv, u - h, 0)[0]) / (2 * h)
            assert np.linalg.norm(d[1] - fd) < 1e-8 * max(1.0, np.linalg.norm(d[1]))


class TestRefinement:
    def test_refine_by_one_is_identity(self):
        crv = quarter_circle()
        out = refine_uniform(crv, 1)
        np.testing.assert_array_equal(out.points, crv.points)
        np.testing.assert_array_equal(out.knots.values, crv.knots.values)

    @pytest.mark.parametrize("n_el", [2, 5, 8])
    def test_refined_curve_evaluates_identically(self, n_el):
        crv = wavy_space_curve()
        fine = refine_uniform(crv, n_el)
        tol = 1e-12 * crv.diameter()
        for u in RNG.uniform(0.0, 1.0, 50):
            r0 = curve_derivatives(crv, u, 0)[0]
            r1 = curve_derivatives(fine, u, 0)[0]
            assert np.linalg.norm(r0 - r1) < tol

    def test_single_insertion_geometry_preserved(self):
        crv = quarter_circle()
        out = insert_knot(crv, 0.37)
        tol = 1e-12 * crv.diameter()
        for u in RNG.uniform(0.0, 1.0, 30):
            assert np.linalg.norm(
                curve_derivatives(crv, u, 0)[0] - curve_derivatives(out, u, 0)[0]
            ) < tol

    def test_refinement_keeps_maximal_continuity(self):
        crv = elevate_degree(quarter_circle(), 4)
        fine = refine_uniform(crv, 6)
        vals, counts = np.unique(fine.knots.values, return_counts=True)
        assert np.all(counts[1:-1] == 1)  # C^{p-1} at interior breakpoints


class TestDegreeElevation:
    @pytest.mark.parametrize("p_new", [3, 4, 5])
    def test_elevated_bezier_matches_original(self, p_new):
        crv = quarter_circle(3.0)
        out = elevate_degree(crv, p_new)
        assert out.degree == p_new
        tol = 1e-12 * crv.diameter()
        for u in RNG.uniform(0.0, 1.0, 50):
            assert np.linalg.norm(
                curve_derivatives(crv, u, 0)[0] - curve_derivatives(out, u, 0)[0]
            ) < tol

    def test_elevation_of_refined_curve(self):
        crv = refine_uniform(wavy_space_curve(), 4)
        out = elevate_degree(crv, 5)
        tol = 1e-11 * crv.diameter()
        for u in RNG.uniform(0.0, 1.0, 50):
            assert np.linalg.norm(
                curve_derivatives(crv, u, 0)[0] - curve_derivatives(out, u, 0)[0]
            ) < tol

    def test_elevate_then_refine_pipeline(self):
        crv = elevate_degree(quarter_circle(), 5)
        fine = refine_uniform(crv, 8)
        assert fine.degree == 5
        assert len(fine.knots.spans()) == 8
        tol = 1e-12 * crv.diameter()
        for u in RNG.uniform(0.0, 1.0, 20):
            assert np.linalg.norm(
                curve_derivatives(crv, u, 0)[0] - curve_derivatives(fine, u, 0)[0]
            ) < tol

    def test_same_degree_identity(self):
        crv = quarter_circle()
        assert elevate_degree(crv, 2) is crv


class TestValidation:
    def test_knot_vector_must_be_clamped(self):
        with pytest.raises(ValueError):
            KnotVector(np.array([0.0, 0, 0.5, 1, 1.0]), 2)

    def test_weights_positive(self):
        kv = KnotVector(np.array([0.0, 0, 0, 1, 1, 1.0]), 2)
        with pytest.raises(ValueError):
            NurbsCurve(kv, np.zeros((3, 3)), np.array([1.0, -0.5, 1.0]))

    def test_control_point_count(self):
        kv = KnotVector(np.array([0.0, 0, 0, 1, 1, 1.0]), 2)
        with pytest.raises(ValueError):
            NurbsCurve(kv, np.zeros((4, 3)), np.ones(4))

    def test_order_above_three_rejected(self):
        crv = quarter_circle()
        with pytest.raises(SplineDomainError):
            basis_derivatives(crv, 0.5, 4)
