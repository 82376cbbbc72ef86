"""Charts, connections, curvature, frames, and first-order operators."""

import itertools
import math

import numpy as np
import pytest

from pbh.errors import NotPositiveDefiniteError, SingularMatrixError
from pbh.expr import Const, parse
from pbh.geometry import (ChartMetric, christoffel, curvature_tensor, divergence,
                          divergence_2tensor, euclidean_chart, gradient,
                          orthonormal_frame, scalar_curvature, sectional_curvature,
                          space_form_chart)
from pbh import linalg


def conformal_chart(f_text, dim):
    factor = parse(f"exp(2*({f_text}))", dim)
    zero = Const(0.0)
    return ChartMetric(dim, [[factor if i == j else zero for j in range(dim)]
                             for i in range(dim)])


class TestChartMetric:
    def test_constructor_symmetrizes(self):
        chart = ChartMetric(2, [[Const(1.0), parse("x1", 2)],
                                [parse("x2", 2), Const(1.0)]])
        x = (0.3, 0.9)
        g = chart.metric_at(x)
        assert g[0][1] == g[1][0] == pytest.approx(0.6)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            ChartMetric(2, [[Const(1.0)]])

    def test_spd_detection(self):
        good = euclidean_chart(3).metric_at((0.0, 0.0, 0.0))
        assert linalg.is_spd(good)
        assert not linalg.is_spd([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(NotPositiveDefiniteError):
            linalg.cholesky([[0.0, 0.0], [0.0, 1.0]])

    def test_singular_metric_inversion(self):
        chart = ChartMetric(2, [[parse("x1", 2), Const(0.0)],
                                [Const(0.0), Const(1.0)]])
        with pytest.raises(SingularMatrixError):
            chart.inverse_metric_at((0.0, 1.0))

    def test_domain_of_negative_space_form(self):
        chart = space_form_chart(-1.0, 2)
        assert chart.contains((0.5, 0.5))
        assert not chart.contains((2.0, 0.1))


class TestChristoffel:
    def test_euclidean_zero(self):
        G = christoffel(euclidean_chart(3), (0.3, -0.2, 1.0))
        assert max(abs(G[k][i][j]) for k in range(3) for i in range(3)
                   for j in range(3)) == 0.0

    def test_conformal_closed_form(self):
        # g = exp(2 f) delta: Gamma^k_ij = d^k_i f_j + d^k_j f_i - d_ij f_k
        f = parse("0.3*x1*x2 + 0.1*x1^2", 2)
        chart = conformal_chart("0.3*x1*x2 + 0.1*x1^2", 2)
        rng = np.random.default_rng(31)
        for _ in range(5):
            x = tuple(rng.uniform(-0.8, 0.8, size=2))
            G = christoffel(chart, x)
            df = [f.diff(0).evaluate(x), f.diff(1).evaluate(x)]
            for k, i, j in itertools.product(range(2), repeat=3):
                expect = ((k == i) * df[j] + (k == j) * df[i] - (i == j) * df[k])
                assert G[k][i][j] == pytest.approx(expect, abs=1e-12)

    def test_symmetry_in_lower_indices(self):
        chart = space_form_chart(0.7, 3)
        G = christoffel(chart, (0.2, 0.4, -0.1))
        for k, i, j in itertools.product(range(3), repeat=3):
            assert G[k][i][j] == G[k][j][i]

    def test_sphere_chart_origin_is_critical(self):
        G = christoffel(space_form_chart(1.0, 2), (0.0, 0.0))
        assert max(abs(G[k][i][j]) for k in range(2) for i in range(2)
                   for j in range(2)) == 0.0


class TestCurvature:
    def test_euclidean_flat(self):
        up, low = curvature_tensor(euclidean_chart(2), (0.5, 0.5))
        assert max(abs(v) for plane in low for mat in plane for row in mat
                   for v in row) == 0.0

    def test_space_form_lowered_tensor(self):
        for c in (1.0, -0.6):
            chart = space_form_chart(c, 3)
            rng = np.random.default_rng(32)
            for _ in range(3):
                x = tuple(rng.uniform(-0.4, 0.4, size=3))
                _, low = curvature_tensor(chart, x)
                g = [[comp.evaluate(x, {}) for comp in row] for row in chart.components]
                for i, j, k, l in itertools.product(range(3), repeat=4):
                    expect = c * (g[j][k] * g[i][l] - g[i][k] * g[j][l])
                    assert low[i][j][k][l] == pytest.approx(expect, abs=1e-8)

    def test_sectional_curvature_constancy(self):
        chart = space_form_chart(1.0, 3)
        rng = np.random.default_rng(33)
        x = (0.2, -0.1, 0.3)
        for _ in range(10):
            u = list(rng.uniform(-1, 1, size=3))
            v = list(rng.uniform(-1, 1, size=3))
            assert sectional_curvature(chart, x, u, v) == pytest.approx(1.0, abs=1e-8)
        assert sectional_curvature(space_form_chart(-1.0, 2), (0.0, 0.0),
                                   [1, 0], [0, 1]) == pytest.approx(-1.0, abs=1e-8)

    def test_two_sphere_scalar_curvature(self):
        assert scalar_curvature(space_form_chart(1.0, 2),
                                (0.2, 0.5)) == pytest.approx(2.0, abs=1e-8)

    def test_antisymmetry_and_first_bianchi(self):
        chart = conformal_chart("0.2*x1^2 - 0.3*x1*x2", 2)
        x = (0.4, -0.6)
        up, low = curvature_tensor(chart, x)
        for i, j, k, l in itertools.product(range(2), repeat=4):
            assert low[i][j][k][l] == pytest.approx(-low[j][i][k][l], abs=1e-10)
        for l, i, j, k in itertools.product(range(2), repeat=4):
            cyc = up[l][i][j][k] + up[l][j][k][i] + up[l][k][i][j]
            assert cyc == pytest.approx(0.0, abs=1e-10)


class TestFrames:
    def test_euclidean_standard_basis(self):
        F = orthonormal_frame(euclidean_chart(3), (0.1, 0.2, 0.3))
        assert F.vectors == [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]

    def test_diagonal_rescaling(self):
        chart = ChartMetric(2, [[Const(4.0), Const(0.0)], [Const(0.0), Const(9.0)]])
        F = orthonormal_frame(chart, (0.0, 0.0))
        assert F.vectors[0] == pytest.approx([0.5, 0.0])
        assert F.vectors[1] == pytest.approx([0.0, 1.0 / 3.0])

    def test_random_spd_metric_orthonormality(self):
        rng = np.random.default_rng(34)
        for _ in range(5):
            A = rng.uniform(-1, 1, size=(3, 3))
            M = A @ A.T + 3 * np.eye(3)
            chart = ChartMetric(3, [[Const(M[i][j]) for j in range(3)] for i in range(3)])
            x = (0.0, 0.0, 0.0)
            F = orthonormal_frame(chart, x)
            for i in range(3):
                for j in range(3):
                    ip = sum(M[a][b] * F.vectors[i][a] * F.vectors[j][b]
                             for a in range(3) for b in range(3))
                    assert ip == pytest.approx(1.0 if i == j else 0.0, abs=1e-12)

    def test_breakdown_on_degenerate_metric(self):
        chart = ChartMetric(2, [[Const(1.0), Const(1.0)], [Const(1.0), Const(1.0)]])
        with pytest.raises(NotPositiveDefiniteError):
            orthonormal_frame(chart, (0.0, 0.0))


class TestOperators:
    def test_gradient_coordinate_function(self):
        g = gradient(euclidean_chart(3), parse("x1", 3), (0.1, 0.2, 0.3))
        assert g == pytest.approx([1.0, 0.0, 0.0])

    def test_gradient_respects_inverse_metric(self):
        chart = conformal_chart("0.4*x1", 2)
        x = (0.3, 0.8)
        g = gradient(chart, parse("x2^2", 2), x)
        lam = math.exp(2 * 0.4 * 0.3)
        assert g == pytest.approx([0.0, 2 * 0.8 / lam], rel=1e-12)

    def test_divergence_of_position_field(self):
        def pos(X):
            return list(X)

        assert divergence(euclidean_chart(3), pos, (0.4, 0.5, -0.2)) == pytest.approx(3.0)

    def test_divergence_2tensor_product_rule(self):
        # T = f g  =>  div T = df
        chart = conformal_chart("0.2*x1*x2", 2)
        f = parse("x1^2 + 0.5*x2", 2)
        rng = np.random.default_rng(35)

        def T(X):
            fx = f.evaluate(X)
            g = chart.metric_at(X)
            return [[fx * g[i][j] for j in range(2)] for i in range(2)]

        T.depth = 0
        for _ in range(4):
            x = tuple(rng.uniform(-0.7, 0.7, size=2))
            div = divergence_2tensor(chart, T, x)
            df = [f.diff(0).evaluate(x), f.diff(1).evaluate(x)]
            assert div == pytest.approx(df, abs=1e-9)

    def test_metric_compatibility(self):
        charts = [space_form_chart(1.0, 3), conformal_chart("0.3*x1 - 0.2*x2^2", 2)]
        rng = np.random.default_rng(36)
        for chart in charts:
            d = chart.dim
            for _ in range(3):
                x = tuple(rng.uniform(-0.4, 0.4, size=d))
                dg = chart.dmetric_at(x)
                G = chart.christoffel_at(x)
                g = chart.metric_at(x)
                for k, i, j in itertools.product(range(d), repeat=3):
                    cov = dg[k][i][j]
                    for l in range(d):
                        cov -= G[l][k][i] * g[l][j] + G[l][k][j] * g[i][l]
                    assert cov == pytest.approx(0.0, abs=1e-9)
