"""Extrinsic geometry of immersions and the p-biharmonic residual systems."""

import math

import numpy as np
import pytest

from pbh.errors import DomainError, RankDeficiencyError
from pbh.expr import parse
from pbh.geometry import sectional_curvature, space_form_chart
from pbh.jets import lift_point, value
from pbh.mapcalc import p_tension, tension
from pbh.submanifold import (Immersion, bitension_split, circle_immersion,
                             cmc_proper_p, graph_hypersurface_immersion,
                             mean_curvature, normal_connection, normal_frame,
                             normal_laplacian_H, second_fundamental_form,
                             shape_operator, small_hypersphere_immersion,
                             theorem21_residuals, theorem23_residuals)

SPHERE_BOX = [(-0.6, 0.7)] * 2


def plane_immersion():
    """Affine 2-plane inside Euclidean 3-space."""
    ambient = space_form_chart(0.0, 3)
    comps = [parse("x1", 2), parse("x2", 2), parse("0.5*x1 - 0.25*x2 + 1", 2)]
    return Immersion(2, ambient, comps, name="plane")


def paraboloid():
    return graph_hypersurface_immersion(
        parse("0.3*x1^2 + 0.2*x1*x2 + 0.4*x2^2 + 0.1*x1", 2), 2, name="paraboloid")


def sample(rng, box, count):
    return [tuple(float(rng.uniform(lo, hi)) for lo, hi in box) for _ in range(count)]


class TestImmersionBasics:
    def test_isometric_source_metric(self):
        imm = small_hypersphere_immersion(2, 0.8)
        rng = np.random.default_rng(51)
        assert imm.isometry_defect(sample(rng, SPHERE_BOX, 5)) < 1e-10

    def test_induced_metric_curvature_is_gauss(self):
        # induced round metric of the radius-a sphere has curvature 1/a^2
        for a in (0.6, 0.8):
            imm = small_hypersphere_immersion(2, a)
            K = sectional_curvature(imm.map.source, (0.3, -0.2), [1, 0], [0, 1])
            assert K == pytest.approx(1.0 / a ** 2, abs=1e-8)

    def test_rank_deficiency_detected(self):
        ambient = space_form_chart(0.0, 3)
        # second column of dphi vanishes along x2 = 0
        comps = [parse("x1", 2), parse("x2^2", 2), parse("0", 2)]
        imm = Immersion(2, ambient, comps, name="degenerate")
        with pytest.raises(RankDeficiencyError):
            imm.at((0.4, 0.0)).frames

    def test_codimension_validation(self):
        with pytest.raises(ValueError):
            Immersion(2, space_form_chart(0.0, 2), [parse("x1", 2), parse("x2", 2)])

    def test_normal_frame_orthonormal_and_normal(self):
        imm = small_hypersphere_immersion(2, 0.7)
        x = (0.3, 0.25)
        F = normal_frame(imm, x)
        assert len(F.vectors) == 1
        ip = imm.at(x)
        xi = F.vectors[0]
        assert value(ip.mp.h_inner(xi, xi)) == pytest.approx(1.0, abs=1e-12)
        for i in range(2):
            col = [value(ip.mp.dphi[a][i]) for a in range(3)]
            assert value(ip.mp.h_inner(xi, col)) == pytest.approx(0.0, abs=1e-12)


class TestSecondFundamentalForm:
    def test_plane_is_totally_geodesic(self):
        imm = plane_immersion()
        B = second_fundamental_form(imm, (0.4, -0.7))
        assert max(abs(v) for mat in B for row in mat for v in row) < 1e-14

    def test_small_sphere_is_umbilical(self):
        # B_ij = coeff * g_ij with |coeff| = 1/r = b/a
        a = 0.8
        b = math.sqrt(1 - a * a)
        imm = small_hypersphere_immersion(2, a)
        x = (0.2, -0.4)
        B = second_fundamental_form(imm, x)[0]
        g = [[value(v) for v in row] for row in imm.map.source.metric_at(x)]
        ratio = B[0][0] / g[0][0]
        assert abs(ratio) == pytest.approx(b / a, rel=1e-10)
        for i in range(2):
            for j in range(2):
                assert B[i][j] == pytest.approx(ratio * g[i][j], abs=1e-10)

    def test_circle_curvature(self):
        rho = 0.8
        imm = circle_immersion(rho)
        B = second_fundamental_form(imm, (1.1,))[0]
        g = value(imm.map.source.metric_at((1.1,))[0][0])
        assert abs(B[0][0]) / g == pytest.approx(1.0 / rho, rel=1e-10)


class TestShapeOperator:
    def test_plane_vanishes(self):
        imm = plane_immersion()
        xi = normal_frame(imm, (0.1, 0.2)).vectors[0]
        A = shape_operator(imm, (0.1, 0.2), xi)
        assert max(abs(v) for row in A for v in row) < 1e-14

    def test_sphere_is_proportional_to_identity(self):
        a = 0.6
        b = math.sqrt(1 - a * a)
        imm = small_hypersphere_immersion(2, a)
        x = (0.15, 0.3)
        H = mean_curvature(imm, x)
        hn = math.sqrt(sum(value(imm.at(x).mp.h_inner(H, H)) for _ in [0]))
        eta = [c / hn for c in H]
        A = shape_operator(imm, x, eta)
        for i in range(2):
            for j in range(2):
                assert A[i][j] == pytest.approx((b / a) * (i == j), abs=1e-8)

    def test_self_adjointness(self):
        imm = paraboloid()
        x = (0.3, -0.2)
        xi = normal_frame(imm, x).vectors[0]
        A = shape_operator(imm, x, xi)
        g = [[value(v) for v in row] for row in imm.map.source.metric_at(x)]
        gA = [[sum(g[i][k] * A[k][j] for k in range(2)) for j in range(2)]
              for i in range(2)]
        assert gA[0][1] == pytest.approx(gA[1][0], abs=1e-12)

    def test_hypersurface_shape_identity(self):
        # A_H = <H, eta> A_eta on hypersurfaces
        rng = np.random.default_rng(52)
        imm = paraboloid()
        for x in sample(rng, [(-0.7, 0.7)] * 2, 5):
            ip = imm.at(x)
            eta = [value(c) for c in ip.normal_frame[0]]
            H = [value(c) for c in ip.mean_curvature]
            h_eta = value(ip.mp.h_inner(H, eta))
            A_eta = shape_operator(imm, x, eta)
            A_H = shape_operator(imm, x, H)
            for i in range(2):
                for j in range(2):
                    assert A_H[i][j] == pytest.approx(h_eta * A_eta[i][j], abs=1e-9)


class TestMeanCurvature:
    def test_plane_minimal(self):
        assert mean_curvature(plane_immersion(), (0.9, 0.1)) == pytest.approx(
            [0.0, 0.0, 0.0], abs=1e-14)

    def test_small_sphere_norm(self):
        for a in (0.6, 1 / math.sqrt(2), 0.8):
            b = math.sqrt(1 - a * a)
            imm = small_hypersphere_immersion(2, a)
            ip = imm.at((0.22, -0.31))
            assert math.sqrt(value(ip.mean_curvature_norm2)) == pytest.approx(
                b / a, rel=1e-10)

    def test_tension_is_m_times_H(self):
        rng = np.random.default_rng(53)
        for imm, box in [(small_hypersphere_immersion(2, 0.7), SPHERE_BOX),
                         (paraboloid(), [(-0.7, 0.7)] * 2),
                         (circle_immersion(1.3), [(0.3, 2.8)])]:
            m = imm.m
            for x in sample(rng, box, 3):
                tau = tension(imm.map, x)
                H = mean_curvature(imm, x)
                assert max(abs(t - m * h) for t, h in zip(tau, H)) < 1e-9

    def test_p_tension_is_m_to_p_half_H(self):
        imm = small_hypersphere_immersion(2, 0.75)
        x = (0.2, 0.4)
        H = mean_curvature(imm, x)
        for p in (2.0, 3.0, 4.0):
            tp = p_tension(imm.map, x, p)
            assert max(abs(t - 2 ** (p / 2.0) * h) for t, h in zip(tp, H)) < 1e-9


class TestNormalConnection:
    def test_parallel_mean_curvature_on_spheres(self):
        imm = small_hypersphere_immersion(2, 0.8)
        x = (0.3, -0.1)

        def H_field(X):
            return imm.at(X).mean_curvature

        H_field.depth = 0
        for i in range(2):
            W = normal_connection(imm, x, i, H_field)
            assert max(abs(v) for v in W) < 1e-10
        assert max(abs(v) for v in normal_laplacian_H(imm, x)) < 1e-9

    def test_normal_laplacian_is_normal(self):
        rng = np.random.default_rng(54)
        for imm, box in [(paraboloid(), [(-0.6, 0.6)] * 2),
                         (small_hypersphere_immersion(2, 0.6), SPHERE_BOX)]:
            for x in sample(rng, box, 3):
                lap = normal_laplacian_H(imm, x)
                ip = imm.at(x)
                for i in range(imm.m):
                    col = [value(ip.mp.dphi[a][i]) for a in range(imm.n)]
                    assert value(ip.mp.h_inner(lap, col)) == pytest.approx(
                        0.0, abs=1e-10)

    def test_scalar_laplacian_oracle_on_hypersurface(self):
        # hypersurfaces have parallel unit normal in the normal bundle, so
        # Delta_perp H = (Delta_g <H, eta>) eta
        from pbh.geometry import divergence
        imm = paraboloid()
        x = (0.25, -0.15)

        def f(X):
            ip = imm.at(X)
            return ip.mp.h_inner(ip.mean_curvature, ip.normal_frame[0])

        f.depth = 0

        def grad_f(X):
            ip = imm.at(X)
            from pbh.jets import partial
            fx = f(X)
            return ip.mp.grad_scalar([partial(fx, j) for j in range(2)])

        grad_f.depth = 1
        lap_scalar = divergence(imm.map.source, grad_f, x)
        ip = imm.at(x)
        eta = [value(c) for c in ip.normal_frame[0]]
        lap = normal_laplacian_H(imm, x)
        for a in range(3):
            assert lap[a] == pytest.approx(lap_scalar * eta[a], abs=1e-8)


class TestResidualSystems:
    def test_sphere_residuals_vanish_exactly_at_proper_p(self):
        rng = np.random.default_rng(55)
        for a in (0.6, 1 / math.sqrt(2), 0.8):
            b = math.sqrt(1 - a * a)
            p_star = 1.0 / (b * b)
            imm = small_hypersphere_immersion(2, a)
            for x in sample(rng, SPHERE_BOX, 3):
                normal, tangent = theorem21_residuals(imm, x, p_star)
                assert max(abs(v) for v in normal) < 1e-8
                assert max(abs(v) for v in tangent) < 1e-8
                ns, ts = theorem23_residuals(imm, x, p_star)
                assert abs(ns) < 1e-8
                assert max(abs(v) for v in ts) < 1e-8

    def test_sphere_residuals_nonzero_off_critical(self):
        a = 0.8
        b = math.sqrt(1 - a * a)
        imm = small_hypersphere_immersion(2, a)
        x = (0.3, 0.2)
        normal, _ = theorem21_residuals(imm, x, 1.0 / (b * b) + 0.5)
        assert max(abs(v) for v in normal) > 1e-3

    def test_plane_residuals_vanish(self):
        imm = plane_immersion()
        normal, tangent = theorem21_residuals(imm, (0.4, 0.5), 3.0)
        assert max(abs(v) for v in normal) < 1e-12
        assert max(abs(v) for v in tangent) < 1e-12

    def test_hypersurface_system_matches_general_system(self):
        # via A_H = <H,eta> A and the umbilic trace identities
        rng = np.random.default_rng(56)
        cases = [(paraboloid(), [(-0.6, 0.6)] * 2),
                 (small_hypersphere_immersion(2, 0.7), SPHERE_BOX),
                 (circle_immersion(0.9), [(0.3, 2.8)])]
        for imm, box in cases:
            for p in (2.0, 3.0):
                for x in sample(rng, box, 4):
                    normal, tangent = theorem21_residuals(imm, x, p)
                    ns, ts = theorem23_residuals(imm, x, p)
                    ip = imm.at(x)
                    h2 = value(ip.mean_curvature_norm2)
                    H = [value(c) for c in ip.mean_curvature]
                    eta = [c / math.sqrt(h2) for c in H]
                    proj = value(ip.mp.h_inner(normal, eta))
                    assert proj == pytest.approx(ns, abs=1e-8)
                    assert tangent == pytest.approx(ts, abs=1e-8)

    def test_theorem23_requires_codimension_one(self):
        ambient = space_form_chart(0.0, 3)
        curve = Immersion(1, ambient, [parse("cos(x1)", 1), parse("sin(x1)", 1),
                                       parse("0.2*x1", 1)], name="helix")
        with pytest.raises(DomainError):
            theorem23_residuals(curve, (0.7,), 2.0)

    def test_theorem23_requires_nonzero_mean_curvature(self):
        with pytest.raises(DomainError):
            theorem23_residuals(plane_immersion(), (0.1, 0.1), 2.0)


class TestCmcProperP:
    def test_sphere_values(self):
        for a in (0.6, 1 / math.sqrt(2), 0.8):
            b = math.sqrt(1 - a * a)
            imm = small_hypersphere_immersion(2, a)
            rng = np.random.default_rng(57)
            result = cmc_proper_p(imm, (0.2, 0.3), sample_points=sample(rng, SPHERE_BOX, 5))
            assert result.p_star == pytest.approx(1.0 / (b * b), abs=1e-8)
            assert result.mean_curvature_norm == pytest.approx(b / a, abs=1e-10)
            assert result.shape_norm2 == pytest.approx(2 * b * b / (a * a), abs=1e-8)

    def test_admissibility_boundary(self):
        a = 1 / math.sqrt(2)
        result = cmc_proper_p(small_hypersphere_immersion(2, a), (0.2, 0.3))
        assert result.p_star == pytest.approx(2.0, abs=1e-8)
        assert result.admissible
        small = cmc_proper_p(small_hypersphere_immersion(2, 0.6), (0.2, 0.3))
        assert not small.admissible
        assert small.message == "no admissible p >= 2"

    def test_zero_mean_curvature_rejected(self):
        with pytest.raises(DomainError):
            cmc_proper_p(plane_immersion(), (0.1, 0.1))

    def test_non_cmc_rejected(self):
        rng = np.random.default_rng(58)
        with pytest.raises(DomainError):
            cmc_proper_p(paraboloid(), (0.2, 0.1),
                         sample_points=sample(rng, [(-0.6, 0.6)] * 2, 5))

    def test_hyperbolic_geodesic_sphere_inadmissible(self):
        # umbilic in N(-1): |A|^2 = m |H|^2 forces p* = 1 - 1/|H|^2 < 2
        rho = 1.0
        t2 = "x1^2 + x2^2"
        hfac = f"{rho ** 2!r} * (1 - {rho ** 2 / 4.0!r})^(-2) * (1 + ({t2})/4)^(-2)"
        imm = Immersion(
            2, space_form_chart(-1.0, 3),
            [parse(f"{rho!r} * x1 / (1 + ({t2})/4)", 2),
             parse(f"{rho!r} * x2 / (1 + ({t2})/4)", 2),
             parse(f"{rho!r} * (1 - ({t2})/4) / (1 + ({t2})/4)", 2)],
            source_metric=[[parse(hfac, 2), parse("0", 2)],
                           [parse("0", 2), parse(hfac, 2)]],
            name="hyperbolic_sphere")
        result = cmc_proper_p(imm, (0.2, -0.3))
        assert not result.admissible
        h2 = result.mean_curvature_norm ** 2
        assert result.p_star == pytest.approx(1.0 - 1.0 / h2, abs=1e-8)


class TestBitensionCrossCheck:
    def test_split_reconstructs_bitension(self):
        imm = small_hypersphere_immersion(2, 0.8)
        x = (0.25, 0.1)
        from pbh.mapcalc import p_bitension
        for p in (2.0, 3.0):
            normal, t = bitension_split(imm, x, p)
            mp = imm.map.at(lift_point(x, 1))
            pushed = [value(c) for c in mp.push(t)]
            total = p_bitension(imm.map, x, p)
            assert [n + q for n, q in zip(normal, pushed)] == pytest.approx(
                total, abs=1e-9)

    def test_master_factor(self):
        # tau_{2,p}(inclusion) = m^(p-1) (normal system, pushed tangent system)
        rng = np.random.default_rng(59)
        for imm, box in [(small_hypersphere_immersion(2, 0.6), SPHERE_BOX),
                         (paraboloid(), [(-0.6, 0.6)] * 2),
                         (circle_immersion(0.8), [(0.3, 2.8)])]:
            m = imm.m
            for p in (2.0, 3.0, 4.0):
                factor = m ** (p - 1.0)
                for x in sample(rng, box, 2):
                    normal_b, tangent_b = bitension_split(imm, x, p)
                    normal_r, tangent_r = theorem21_residuals(imm, x, p)
                    for bb, rr in zip(normal_b + tangent_b, normal_r + tangent_r):
                        assert bb == pytest.approx(factor * rr, abs=1e-7)
