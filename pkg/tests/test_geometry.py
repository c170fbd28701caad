import numpy as np
import pytest

from fsbeam.geometry import (
    GeometryError,
    IllDefinedFrameError,
    christoffel,
    circle_section,
    equidistant_metric,
    frame_at,
    frame_batch,
    rectangle_section,
    section_constants,
)
from fsbeam.splines import curve_derivatives, elevate_degree, make_circular_arc, refine_uniform

RNG = np.random.default_rng(7741)


def circle_arc(R=2.0, angle=np.pi / 2):
    return make_circular_arc((0, 0, 0), (1, 0, 0), (0, 1, 0), R, angle)


def helix_derivs(a, c, s):
    """Arc-length derivatives of the circular helix (a cos, a sin, c*t)."""
    w = 1.0 / np.sqrt(a * a + c * c)
    t = s * w
    r = np.array([a * np.cos(t), a * np.sin(t), c * t])
    d1 = np.array([-a * np.sin(t), a * np.cos(t), c]) * w
    d2 = np.array([-a * np.cos(t), -a * np.sin(t), 0.0]) * w**2
    d3 = np.array([a * np.sin(t), -a * np.cos(t), 0.0]) * w**3
    return np.stack([r, d1, d2, d3])


def frame_from_curve(crv, u, theta=0.0, theta_1=0.0):
    return frame_at(curve_derivatives(crv, u, 3), theta, theta_1)


class TestFrameBasics:
    def test_planar_circle_curvature_torsion(self):
        R = 3.0
        crv = circle_arc(R)
        for u in [0.1, 0.5, 0.9]:
            f = frame_from_curve(crv, u)
            assert abs(f.K - 1.0 / R) < 1e-12 / R
            assert abs(f.tau) < 1e-12

    def test_helix_closed_form(self):
        a, c = 1.3, 0.42
        f = frame_at(helix_derivs(a, c, 0.7))
        denom = a * a + c * c
        assert abs(f.K - a / denom) < 1e-12
        assert abs(f.tau - c / denom) < 1e-12

    def test_orthonormal_triads(self):
        crv = circle_arc()
        for u in RNG.uniform(0, 1, 12):
            f = frame_from_curve(crv, u, theta=0.6)
            for v in (f.t, f.n, f.b, f.g2, f.g3):
                assert abs(np.linalg.norm(v) - 1.0) < 1e-12
            assert abs(f.t @ f.n) < 1e-12
            assert abs(f.n @ f.b) < 1e-12
            assert abs(f.b @ f.t) < 1e-12
            np.testing.assert_allclose(np.cross(f.g1, f.n) / f.sqrt_g, f.b, atol=1e-12)

    def test_curvature_component_identities(self):
        crv = circle_arc(1.7)
        for u, th in zip(RNG.uniform(0, 1, 8), RNG.uniform(-2, 2, 8)):
            f = frame_from_curve(crv, u, theta=th)
            assert abs(f.Kt2**2 + f.Kt3**2 - f.Ktilde**2) < 1e-10 * f.Ktilde**2
            assert abs(f.Ktilde - f.K * f.g) < 1e-12 * f.Ktilde
            # eq. identities K2 = K sin(theta), K3 = K cos(theta)
            assert abs(f.Kt2 / f.g - f.K * np.sin(th)) < 1e-12
            assert abs(f.Kt3 / f.g - f.K * np.cos(th)) < 1e-12
            # definitions through the material triad
            assert abs(f.Kt2 + f.r11 @ f.g3) < 1e-11
            assert abs(f.Kt3 - f.r11 @ f.g2) < 1e-11

    def test_pretwist_torsion_of_material_basis(self):
        # planar quarter circle, theta = pi*xi/2: K1 = theta,1 (tau = 0)
        crv = circle_arc(2.0)
        for u in [0.2, 0.6]:
            f = frame_from_curve(crv, u, theta=np.pi * u / 2, theta_1=np.pi / 2)
            assert abs(f.K1 - np.pi / 2) < 1e-12

    def test_helix_material_torsion_with_twist(self):
        a, c = 1.0, 0.3
        th, th1 = 0.5, 0.8
        f = frame_at(helix_derivs(a, c, 0.4), theta=th, theta_1=th1)
        tau = c / (a * a + c * c)
        assert abs(f.K1 - (f.sqrt_g * tau + th1)) < 1e-12

    def test_g1_111_projections(self):
        crv = circle_arc(1.2)
        for u in RNG.uniform(0, 1, 6):
            f = frame_from_curve(crv, u)
            d = curve_derivatives(crv, u, 3)
            assert abs(f.G1 - d[3] @ f.g1) < 1e-10
            assert abs(f.G2 - d[3] @ f.n) < 1e-10
            assert abs(f.G3 - f.Ktilde * f.tau_tilde) < 1e-9 * max(1.0, abs(f.G3))

    def test_ill_defined_frame_raises(self):
        derivs = np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, 0, 0], [0.0, 0, 0]])
        with pytest.raises(IllDefinedFrameError):
            frame_at(derivs, kappa_min=1e-12)


class TestFrenetSerretFormulae:
    def test_triad_derivatives_along_arc_length(self):
        crv = elevate_degree(circle_arc(1.5), 4)
        # use a generic rational space curve too by perturbing control z
        pts = crv.points.copy()
        pts[:, 2] += np.array([0.0, 0.15, 0.3, 0.2, 0.05])
        crv = crv.with_points(pts)
        h = 1e-6
        for u in [0.3, 0.5, 0.7]:
            f0 = frame_from_curve(crv, u)
            fp = frame_from_curve(crv, u + h)
            fm = frame_from_curve(crv, u - h)
            ds = f0.sqrt_g  # d s = sqrt(g) d xi
            dt = (fp.t - fm.t) / (2 * h) / ds
            dn = (fp.n - fm.n) / (2 * h) / ds
            db = (fp.b - fm.b) / (2 * h) / ds
            assert np.linalg.norm(dt - f0.K * f0.n) < 1e-6 * max(1.0, f0.K)
            assert np.linalg.norm(dn - (-f0.K * f0.t + f0.tau * f0.b)) < 1e-6
            assert np.linalg.norm(db - (-f0.tau * f0.n)) < 1e-6

    def test_reparameterization_invariance(self):
        crv = circle_arc(2.2)
        fine = refine_uniform(elevate_degree(crv, 3), 5)
        for u in RNG.uniform(0, 1, 8):
            f0 = frame_from_curve(crv, u)
            f1 = frame_from_curve(fine, u)
            assert abs(f0.K - f1.K) < 1e-9
            assert abs(f0.tau - f1.tau) < 1e-9


class TestChristoffel:
    def test_arc_length_parameterization_zero(self):
        f = helix_derivs(1.0, 0.2, 0.3)
        assert abs(christoffel(f[1], f[2])) < 1e-12

    def test_finite_difference_of_metric(self):
        crv = circle_arc(1.0)  # chord-type NURBS parameterization, Gamma != 0
        h = 1e-6
        for u in [0.25, 0.5, 0.75]:
            d = curve_derivatives(crv, u, 2)
            gam = christoffel(d[1], d[2])
            gp = curve_derivatives(crv, u + h, 1)[1]
            gm = curve_derivatives(crv, u - h, 1)[1]
            dgdxi = (gp @ gp - gm @ gm) / (2 * h)
            g = d[1] @ d[1]
            assert abs(gam - dgdxi / (2 * g)) < 1e-8 * max(1.0, abs(gam))


class TestEquidistantMetric:
    def test_axis_point(self):
        f = frame_from_curve(circle_arc(2.0), 0.4)
        em = equidistant_metric(f, 0.0, 0.0)
        assert em.g0 == 1.0
        assert abs(em.gbar11 - f.g) < 1e-14 * f.g

    def test_circle_offset_toward_center(self):
        R, e = 2.0, 0.3
        f = frame_from_curve(circle_arc(R), 0.5)  # theta=0: g2 = n points to center
        em = equidistant_metric(f, eta=e, zeta=0.0)
        assert abs(em.g0 - (1.0 - e / R)) < 1e-12

    def test_affine_in_section_coordinates(self):
        f = frame_from_curve(circle_arc(1.4), 0.3, theta=0.7)
        corners = [(-0.2, -0.1), (0.2, 0.3)]
        g0s = [equidistant_metric(f, *c).g0 for c in corners]
        mid = equidistant_metric(f, 0.0, 0.1).g0
        assert abs(mid - 0.5 * (g0s[0] + g0s[1])) < 1e-14

    def test_inadmissible_point(self):
        f = frame_from_curve(circle_arc(1.0), 0.5)
        with pytest.raises(GeometryError):
            equidistant_metric(f, eta=1.5, zeta=0.0)


class TestSections:
    def test_ring_example_ratio(self):
        s = rectangle_section(b=1.0 / 3.0, h=1.0)
        assert abs(s.I_zeta / s.I_eta - 9.0) < 1e-12

    def test_circle_polar_moment(self):
        s = circle_section(0.7)
        assert abs(s.I_t - 2.0 * s.I_zeta) < 1e-14
        assert abs(s.I_t - (s.I_zeta + s.I_eta)) < 1e-14

    def test_square_torsion_constant(self):
        s = rectangle_section(1.0, 1.0)
        assert abs(s.I_t - 0.1406) < 5e-4

    def test_rectangle_constants(self):
        b, h = 0.25, 0.5
        s = section_constants("rectangle", b, h)
        assert abs(s.A - b * h) < 1e-15
        assert abs(s.I_zeta - b * h**3 / 12) < 1e-15
        assert abs(s.I_eta - b**3 * h / 12) < 1e-15

    def test_nonpositive_dimension(self):
        with pytest.raises(ValueError):
            rectangle_section(0.0, 1.0)
        with pytest.raises(ValueError):
            circle_section(-1.0)


class TestBatch:
    def test_batch_matches_pointwise(self):
        crv = circle_arc(1.8)
        us = RNG.uniform(0, 1, 5)
        derivs = np.stack([curve_derivatives(crv, u, 3) for u in us])
        th = RNG.uniform(-1, 1, 5)
        fb = frame_batch(derivs, th, np.zeros(5))
        for i, u in enumerate(us):
            f = frame_from_curve(crv, u, theta=th[i])
            np.testing.assert_allclose(fb.n[i], f.n, atol=1e-14)
            np.testing.assert_allclose(fb.g2[i], f.g2, atol=1e-14)
            assert abs(fb.tau_tilde[i] - f.tau_tilde) < 1e-12
