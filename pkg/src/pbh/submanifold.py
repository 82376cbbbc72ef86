"""Extrinsic geometry of isometric immersions into space forms.

Covers the second fundamental form, shape operators, mean curvature, the
normal connection and normal Laplacian, and the residuals of the coupled
normal/tangential systems characterizing p-biharmonic submanifolds (the
general codimension system and its constant-mean-curvature hypersurface
specialization).

The normal Laplacian is the rough trace of the squared normal connection,
with no sign flip; the bitension cross-check in the test suite certifies that
convention against the general Euler-Lagrange field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from . import linalg
from .errors import DomainError, RankDeficiencyError
from .expr import Const, Expression, parse
from .geometry import ChartMetric, space_form_chart
from .jets import lift_point, point_value, sqrt, value
from .mapcalc import SmoothMap

__all__ = [
    "Immersion", "ImmersionPoint", "NormalFrame",
    "second_fundamental_form", "shape_operator", "mean_curvature",
    "normal_connection", "normal_laplacian_H",
    "theorem21_residuals", "theorem23_residuals", "cmc_proper_p", "CmcResult",
    "bitension_split", "small_hypersphere_immersion", "graph_hypersurface_immersion",
    "circle_immersion",
]

_PIVOT_REL_TOL = 1e-12


def pullback_metric_components(ambient: ChartMetric, components, source_dim: int):
    """Induced metric expressions h_ab(phi) dphi^a_i dphi^b_j via symbolic substitution."""
    n = ambient.dim
    dcomp = [[components[a].diff(i) for i in range(source_dim)] for a in range(n)]
    pull = [[Const(0.0)] * source_dim for _ in range(source_dim)]
    for i in range(source_dim):
        for j in range(i, source_dim):
            acc = Const(0.0)
            for a in range(n):
                for b in range(n):
                    hab = ambient.components[a][b]
                    if isinstance(hab, Const) and hab.value == 0.0:
                        continue
                    acc = acc + hab.substitute(components) * dcomp[a][i] * dcomp[b][j]
            pull[i][j] = pull[j][i] = acc
    return pull


class Immersion:
    """An isometric immersion of an m-chart into an n-dimensional ambient chart.

    The source chart carries the induced (pull-back) metric unless an
    equivalent metric is supplied explicitly; `isometry_defect` measures the
    agreement when one is.
    """

    def __init__(self, source_dim: int, ambient: ChartMetric, components,
                 params=None, source_metric=None, name: str = ""):
        self.codim = ambient.dim - source_dim
        if self.codim < 1:
            raise ValueError("ambient dimension must exceed source dimension")
        self.pullback_components = pullback_metric_components(ambient, components, source_dim)
        metric = source_metric if source_metric is not None else self.pullback_components
        source = ChartMetric(source_dim, metric, params=params)
        self.map = SmoothMap(source, ambient, components, params=params, name=name)
        self.name = name

    def with_params(self, **updates) -> "Immersion":
        """Copy with rebound parameters; expression trees (and their derivative
        caches) are shared."""
        imm = Immersion.__new__(Immersion)
        imm.codim = self.codim
        imm.pullback_components = self.pullback_components
        imm.map = self.map.with_params(**updates)
        imm.name = self.name
        return imm

    @property
    def m(self):
        return self.map.source.dim

    @property
    def n(self):
        return self.map.target.dim

    @property
    def ambient_curvature(self) -> float:
        c = self.map.target.space_form_c
        if c is None:
            raise DomainError("ambient chart is not tagged as a space form")
        return c

    def at(self, X) -> "ImmersionPoint":
        return ImmersionPoint(self, X)

    def isometry_defect(self, points) -> float:
        """Max componentwise gap between the declared source metric and the pull-back."""
        worst = 0.0
        params = self.map.params
        for x in points:
            g = self.map.source.metric_at(tuple(x))
            for i in range(self.m):
                for j in range(self.m):
                    pb = self.pullback_components[i][j].evaluate(tuple(x), params)
                    worst = max(worst, abs(value(g[i][j]) - value(pb)))
        return worst

    def __repr__(self):
        return f"Immersion({self.name or 'unnamed'}: {self.m} -> {self.n})"


@dataclass
class NormalFrame:
    """h-orthonormal basis of the normal space at a point."""

    point: tuple
    vectors: list
    provenance: str = "gram_schmidt_after_tangents"


class ImmersionPoint:
    """Per-point extrinsic data; generic over float-or-jet points."""

    def __init__(self, immersion: Immersion, X):
        self.immersion = immersion
        self.mp = immersion.map.at(tuple(X))
        self.m = immersion.m
        self.n = immersion.n
        self.k = immersion.codim

    @cached_property
    def frames(self):
        """(tangent frame, normal frame): Gram-Schmidt over dphi columns then ambient axes."""
        mp = self.mp
        candidates = [[mp.dphi[a][i] for a in range(self.n)] for i in range(self.m)]
        candidates += [[1.0 if a == e else 0.0 for a in range(self.n)] for e in range(self.n)]
        basis = []
        for idx, v in enumerate(candidates):
            u = list(v)
            for b in basis:
                c = mp.h_inner(u, b)
                u = [ui - c * bi for ui, bi in zip(u, b)]
            n2 = mp.h_inner(u, u)
            scale = value(mp.h_inner(v, v))
            if value(n2) <= _PIVOT_REL_TOL * max(scale, 1.0):
                if idx < self.m:
                    raise RankDeficiencyError(
                        f"differential drops rank at {point_value(self.mp.X)}")
                continue
            basis.append([ui * (1.0 / sqrt(n2)) for ui in u])
            if len(basis) == self.n:
                break
        if len(basis) != self.n:
            raise RankDeficiencyError("could not complete an ambient frame")
        return basis[:self.m], basis[self.m:]

    @property
    def tangent_frame(self):
        return self.frames[0]

    @property
    def normal_frame(self):
        return self.frames[1]

    def normal_projection(self, V):
        """Component of an ambient vector orthogonal to the tangent space."""
        mp = self.mp
        out = list(V)
        for t in self.tangent_frame:
            c = mp.h_inner(V, t)
            out = [o - c * ti for o, ti in zip(out, t)]
        return out

    @cached_property
    def second_fundamental(self):
        """B[a][i][j] = h((nabla dphi)(d_i, d_j), xi_a), in normal-frame coefficients."""
        mp = self.mp
        sff = mp.sff
        out = []
        for xi in self.normal_frame:
            mat = [[mp.h_inner([sff[al][i][j] for al in range(self.n)], xi)
                    for j in range(self.m)] for i in range(self.m)]
            out.append(mat)
        return out

    def sff_vector(self, i, j):
        return [self.mp.sff[a][i][j] for a in range(self.n)]

    def shape_matrix(self, xi):
        """Matrix of A_xi: g(A_xi d_i, d_j) = h(B(d_i, d_j), xi)."""
        mp = self.mp
        C = [[mp.h_inner(self.sff_vector(i, j), xi) for j in range(self.m)]
             for i in range(self.m)]
        return linalg.solve(mp.g, C)

    @cached_property
    def mean_curvature_frame(self):
        """H^a = (1/m) g^{ij} B^a_ij."""
        mp = self.mp
        return [sum(mp.ginv[i][j] * B[i][j] for i in range(self.m) for j in range(self.m)) * (1.0 / self.m)
                for B in self.second_fundamental]

    @cached_property
    def mean_curvature(self):
        """H as an ambient vector."""
        Hf = self.mean_curvature_frame
        out = [0.0] * self.n
        for a, xi in enumerate(self.normal_frame):
            for al in range(self.n):
                out[al] = out[al] + Hf[a] * xi[al]
        return out

    @cached_property
    def mean_curvature_norm2(self):
        return self.mp.h_inner(self.mean_curvature, self.mean_curvature)

    def nabla_perp(self, i, V):
        """Normal connection: normal projection of the pull-back derivative."""
        return self.normal_projection(self.mp.pullback_derivative(V, i))

    @cached_property
    def nabla_perp_H(self):
        """W[j] = normal connection of H in direction j (one jet shift)."""
        H = self.mean_curvature
        return [self.nabla_perp(j, H) for j in range(self.m)]

    @cached_property
    def laplacian_perp_H(self):
        """Rough normal Laplacian g^{ij}(nabla_perp_i nabla_perp_j - Gamma-corrected) H."""
        mp = self.mp
        W = self.nabla_perp_H
        out = [0.0] * self.n
        for i in range(self.m):
            for j in range(self.m):
                gij = mp.ginv[i][j]
                if isinstance(gij, float) and gij == 0.0:
                    continue
                term = self.nabla_perp(i, W[j])
                for k in range(self.m):
                    gam = mp.gammaM[k][i][j]
                    term = [t - gam * wk for t, wk in zip(term, W[k])]
                for al in range(self.n):
                    out[al] = out[al] + gij * term[al]
        return out

    # -- residual systems ------------------------------------------------- #
    def trace_B_shape_H(self):
        """trace_g B(., A_H(.)) as an ambient (normal) vector."""
        mp = self.mp
        M = self.shape_matrix(self.mean_curvature)
        out = [0.0] * self.n
        for a, xi in enumerate(self.normal_frame):
            B = self.second_fundamental[a]
            coeff = sum(mp.ginv[i][j] * M[k][j] * B[i][k]
                        for i in range(self.m) for j in range(self.m) for k in range(self.m))
            for al in range(self.n):
                out[al] = out[al] + coeff * xi[al]
        return out

    def grad_H_norm2(self):
        """grad^M |H|^2 as a source vector (one jet shift)."""
        from .jets import partial
        h2 = self.mean_curvature_norm2
        return self.mp.grad_scalar([partial(h2, j) for j in range(self.m)])

    def general_residuals(self, p: float):
        """Normal and tangential residuals of the general p-biharmonic system."""
        mp = self.mp
        m = self.m
        c = self.immersion.ambient_curvature
        H = self.mean_curvature
        h2 = self.mean_curvature_norm2
        lap = self.laplacian_perp_H
        trB = self.trace_B_shape_H()
        normal = [-lap[al] + trB[al] - m * (c - (p - 2.0) * h2) * H[al]
                  for al in range(self.n)]

        W = self.nabla_perp_H
        trA = [0.0] * m
        for i in range(m):
            A_Wi = self.shape_matrix(W[i])
            for j in range(m):
                gij = mp.ginv[i][j]
                if isinstance(gij, float) and gij == 0.0:
                    continue
                for k in range(m):
                    trA[k] = trA[k] + gij * A_Wi[k][j]
        grad = self.grad_H_norm2()
        tangent = [2.0 * trA[k] + (p - 2.0 + 0.5 * m) * grad[k] for k in range(m)]
        return normal, tangent

    def hypersurface_residuals(self, p: float):
        """Scalar normal residual and tangential residual of the CMC hypersurface system."""
        if self.k != 1:
            raise DomainError("hypersurface system needs codimension 1")
        mp = self.mp
        m = self.m
        c = self.immersion.ambient_curvature
        h2 = self.mean_curvature_norm2
        if value(h2) <= 0.0:
            raise DomainError("hypersurface system needs nowhere-zero mean curvature")
        hnorm = sqrt(h2)
        eta = [Hc / hnorm for Hc in self.mean_curvature]
        A = self.shape_matrix(eta)
        A2 = sum(A[i][j] * A[j][i] for i in range(m) for j in range(m))
        lap = self.laplacian_perp_H
        normal_scalar = (-mp.h_inner(lap, eta)
                         + (A2 + m * (p - 2.0) * h2 - m * c) * hnorm)

        from .jets import partial
        grad_absH = mp.grad_scalar([partial(hnorm, j) for j in range(m)])
        A_grad = [sum(A[k][j] * grad_absH[j] for j in range(m)) for k in range(m)]
        tangent = [2.0 * A_grad[k] + (2.0 * (p - 2.0) + m) * hnorm * grad_absH[k]
                   for k in range(m)]
        return normal_scalar, tangent


# ---------------------------------------------------------------------- #
# public wrappers
# ---------------------------------------------------------------------- #

def second_fundamental_form(imm: Immersion, x):
    """B as normal-frame coefficient matrices [a][i][j] at x."""
    ip = imm.at(tuple(x))
    return [[[value(v) for v in row] for row in B] for B in ip.second_fundamental]


def shape_operator(imm: Immersion, x, xi):
    """Matrix of A_xi at x for an ambient normal vector xi."""
    ip = imm.at(tuple(x))
    return [[value(v) for v in row] for row in ip.shape_matrix(list(xi))]


def mean_curvature(imm: Immersion, x):
    """Mean curvature vector H in ambient components at x."""
    ip = imm.at(tuple(x))
    return [value(v) for v in ip.mean_curvature]


def normal_frame(imm: Immersion, x) -> NormalFrame:
    ip = imm.at(tuple(x))
    return NormalFrame(point=tuple(float(v) for v in x),
                       vectors=[[value(c) for c in xi] for xi in ip.normal_frame])


def normal_connection(imm: Immersion, x, direction: int, xi_field):
    """nabla_perp of a normal field along direction `direction` at x.

    `xi_field` maps a (jet) point to ambient components; `xi_field.depth`
    shifts are added to the lift budget as usual.
    """
    X = lift_point(x, getattr(xi_field, "depth", 0) + 1)
    ip = imm.at(X)
    return [value(v) for v in ip.nabla_perp(direction, xi_field(X))]


def normal_laplacian_H(imm: Immersion, x):
    ip = imm.at(lift_point(x, 2))
    return [value(v) for v in ip.laplacian_perp_H]


def theorem21_residuals(imm: Immersion, x, p: float):
    """(normal residual vector, tangential residual vector) of the general system."""
    ip = imm.at(lift_point(x, 2))
    normal, tangent = ip.general_residuals(p)
    return [value(v) for v in normal], [value(v) for v in tangent]


def theorem23_residuals(imm: Immersion, x, p: float):
    """(scalar normal residual, tangential residual vector) of the hypersurface system."""
    ip = imm.at(lift_point(x, 2))
    normal, tangent = ip.hypersurface_residuals(p)
    return value(normal), [value(v) for v in tangent]


@dataclass
class CmcResult:
    """Outcome of the proper-p computation for a CMC hypersurface."""

    p_star: float
    admissible: bool
    mean_curvature_norm: float
    shape_norm2: float

    @property
    def message(self):
        return "" if self.admissible else "no admissible p >= 2"


def cmc_proper_p(imm: Immersion, x, sample_points=None, cmc_tol: float = 1e-8) -> CmcResult:
    """Solve |A|^2 = m c - m (p - 2) |H|^2 for p on a CMC hypersurface.

    When `sample_points` are given, |H| constancy is verified across them
    (std dev below `cmc_tol`) before solving at x.
    """
    if imm.codim != 1:
        raise DomainError("proper-p computation needs a hypersurface")
    if sample_points is not None:
        norms = [math.sqrt(max(value(imm.at(tuple(q)).mean_curvature_norm2), 0.0))
                 for q in sample_points]
        mean = sum(norms) / len(norms)
        std = math.sqrt(sum((v - mean) ** 2 for v in norms) / len(norms))
        if std > cmc_tol:
            raise DomainError(f"mean curvature is not constant (std {std:.3e})")
    ip = imm.at(tuple(x))
    m = imm.m
    c = imm.ambient_curvature
    h2 = value(ip.mean_curvature_norm2)
    if h2 <= 0.0:
        raise DomainError("zero mean curvature: no proper p exists")
    hnorm = math.sqrt(h2)
    eta = [value(v) / hnorm for v in ip.mean_curvature]
    A = ip.shape_matrix(eta)
    A2 = value(sum(A[i][j] * A[j][i] for i in range(m) for j in range(m)))
    p_star = 2.0 + (m * c - A2) / (m * h2)
    # rounding guard: the boundary case p* = 2 must stay admissible
    return CmcResult(p_star=p_star, admissible=p_star >= 2.0 - 1e-9,
                     mean_curvature_norm=hnorm, shape_norm2=A2)


def bitension_split(imm: Immersion, x, p: float):
    """Normal / tangential decomposition of the p-bitension of the inclusion.

    Returns (normal ambient components, tangential source components t with
    tangential part = dphi(t)).
    """
    X = lift_point(x, 3)
    mp = imm.map.at(X)
    tau2p = mp.p_bitension(p)
    t = [value(sum(mp.ginv[i][j] * mp.h_inner(tau2p, [mp.dphi[a][j] for a in range(imm.n)])
                   for j in range(imm.m))) for i in range(imm.m)]
    pushed = mp.push(t)
    normal = [value(tau2p[a]) - value(pushed[a]) for a in range(imm.n)]
    return normal, t


# ---------------------------------------------------------------------- #
# standard immersions
# ---------------------------------------------------------------------- #

def small_hypersphere_immersion(m: int, a: float) -> Immersion:
    """The radius-a latitude m-sphere inside the unit (m+1)-sphere.

    Realized by composing the stereographic chart of the unit m-sphere with
    the affine placement u -> (a u, b), b = sqrt(1 - a^2), read back through
    the stereographic chart of the ambient sphere. The source carries the
    round metric of radius a; the constructor's pull-back expressions allow
    verifying that choice numerically.
    """
    if not 0.0 < a < 1.0:
        raise ValueError(f"radius parameter must lie in (0, 1), got {a}")
    b = math.sqrt(1.0 - a * a)
    ambient = space_form_chart(1.0, m + 1)
    t2 = " + ".join(f"x{i + 1}^2" for i in range(m))
    den = f"(1 + ({t2})/4)"
    scale = f"(2*a/(1 + b))"
    comps = [parse(f"{scale} * x{i + 1} / {den}", m, ["a", "b"]) for i in range(m)]
    comps.append(parse(f"{scale} * (1 - ({t2})/4) / {den}", m, ["a", "b"]))
    round_factor = parse(f"a^2 * {den}^(-2)", m, ["a", "b"])
    zero = Const(0.0)
    source_metric = [[round_factor if i == j else zero for j in range(m)] for i in range(m)]
    return Immersion(m, ambient, comps, params={"a": a, "b": b},
                     source_metric=source_metric, name=f"small_hypersphere({m},{a})")


def graph_hypersurface_immersion(height: Expression, dim: int, name: str = "graph") -> Immersion:
    """Graph x -> (x, q(x)) in Euclidean space, with the induced metric."""
    ambient = space_form_chart(0.0, dim + 1)
    comps = [parse(f"x{i + 1}", dim) for i in range(dim)]
    comps.append(height)
    return Immersion(dim, ambient, comps, name=name)


def circle_immersion(radius: float) -> Immersion:
    """Round circle of the given radius in the Euclidean plane (angle chart)."""
    ambient = space_form_chart(0.0, 2)
    comps = [parse(f"{radius!r}*cos(x1)", 1), parse(f"{radius!r}*sin(x1)", 1)]
    return Immersion(1, ambient, comps, name=f"circle({radius})")
