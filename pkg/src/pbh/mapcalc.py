"""Calculus of maps between charts: differential, tension fields, the
p-tension and p-bitension fields, pull-back derivatives, and box quadrature
of the p-energy and p-bienergy.

Everything funnels through :class:`MapPoint`, a per-point evaluation context
generic over float-or-jet points. Derivatives of map components and metric
components are symbolic; derivatives of computed fields (the p-tension as a
field along the map, scalars like |dphi|) are jet shifts, so the trace
formulas carry explicit Christoffel corrections and hold at every chart
point, not just at centers of normal coordinates.

Jet budget per operation (shifts consumed internally): tension 0, p_tension 1,
pull-back derivative of a field adds 1, p_bitension 3. Public wrappers lift
float points with exactly the order they need.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from . import linalg
from .errors import JetOrderError, SingularityError
from .expr import Const
from .geometry import ChartMetric
from .jets import JetScalar, lift_point, partial, point_value, powr, sqrt, value

__all__ = [
    "SmoothMap", "FieldAlongMap", "MapPoint",
    "dmap", "dmap_norm", "second_fundamental_form_map", "tension", "p_tension",
    "pullback_derivative", "p_bitension", "tension_field", "p_tension_field",
    "p_energy_box", "p_bienergy_box", "perturbed_map", "gauss_legendre_box",
]

_NORM2_FLOOR = 1e-30


class SmoothMap:
    """A map between charts given by component expressions over source coordinates."""

    def __init__(self, source: ChartMetric, target: ChartMetric, components,
                 params=None, name: str = ""):
        if len(components) != target.dim:
            raise ValueError(
                f"map needs {target.dim} component expressions, got {len(components)}")
        for k, c in enumerate(components):
            if c.max_coord_index() >= source.dim:
                raise ValueError(
                    f"component {k} references coordinate x{c.max_coord_index() + 1} "
                    f"beyond source dimension {source.dim}")
        self.params = dict(params or {})
        self.source = source.with_params(**self.params) if self.params else source
        self.target = target.with_params(**self.params) if self.params else target
        self.components = list(components)
        self.name = name
        self._d1 = None
        self._d2 = None

    def with_params(self, **updates) -> "SmoothMap":
        merged = {**self.params, **updates}
        return SmoothMap(self.source, self.target, self.components, merged, self.name)

    def _first(self):
        if self._d1 is None:
            m = self.source.dim
            self._d1 = [[c.diff(i) for i in range(m)] for c in self.components]
        return self._d1

    def _second(self):
        if self._d2 is None:
            m = self.source.dim
            d1 = self._first()
            self._d2 = [[[d1[a][i].diff(j) for j in range(m)] for i in range(m)]
                        for a in range(len(self.components))]
        return self._d2

    def at(self, X) -> "MapPoint":
        return MapPoint(self, X)

    def __repr__(self):
        return f"SmoothMap({self.name or 'unnamed'}: dim {self.source.dim} -> {self.target.dim})"


@dataclass
class FieldAlongMap:
    """A section of the pulled-back target tangent bundle, as an evaluation rule.

    `rule(X)` returns target components at the source point X; `depth` is the
    number of jet shifts the rule performs internally, which callers must add
    to their own budget when differentiating the field.
    """

    base_map: SmoothMap
    rule: Callable
    depth: int = 0

    def __call__(self, X):
        return self.rule(X)


class MapPoint:
    """All per-point data of a map evaluation, computed lazily and shared."""

    def __init__(self, smooth_map: SmoothMap, X):
        self.map = smooth_map
        self.X = tuple(X)
        self.m = smooth_map.source.dim
        self.n = smooth_map.target.dim
        # subtree values shared across every expression evaluated at this
        # point (source trees) and at its image (target trees)
        self._src_memo = {}
        self._tgt_memo = {}

    # -- raw ingredients -------------------------------------------------- #
    @cached_property
    def phiX(self):
        p = self.map.params
        return [c.evaluate(self.X, p, self._src_memo) for c in self.map.components]

    @cached_property
    def dphi(self):
        """dphi[a][i] = d phi^a / d x_i (symbolic, exact)."""
        p = self.map.params
        d1 = self.map._first()
        return [[d1[a][i].evaluate(self.X, p, self._src_memo) for i in range(self.m)]
                for a in range(self.n)]

    @cached_property
    def d2phi(self):
        p = self.map.params
        d2 = self.map._second()
        return [[[d2[a][i][j].evaluate(self.X, p, self._src_memo) for j in range(self.m)]
                 for i in range(self.m)] for a in range(self.n)]

    @cached_property
    def g(self):
        return self.map.source.metric_at(self.X, self._src_memo)

    @cached_property
    def ginv(self):
        return linalg.inverse(self.g)

    @cached_property
    def gammaM(self):
        return self.map.source.christoffel_at(self.X, ginv=self.ginv,
                                              memo=self._src_memo)

    @cached_property
    def h(self):
        return self.map.target.metric_at(self.phiX, self._tgt_memo)

    @cached_property
    def gammaN(self):
        return self.map.target.christoffel_at(self.phiX, memo=self._tgt_memo)

    def h_inner(self, u, v):
        h = self.h
        return sum(h[a][b] * u[a] * v[b] for a in range(self.n) for b in range(self.n))

    def push(self, v):
        """dphi applied to a source vector."""
        return [sum(self.dphi[a][i] * v[i] for i in range(self.m)) for a in range(self.n)]

    # -- first-order invariants ------------------------------------------- #
    @cached_property
    def norm2(self):
        """|dphi|^2, the squared Hilbert-Schmidt norm of the differential."""
        s = 0.0
        for i, j in itertools.product(range(self.m), repeat=2):
            gij = self.ginv[i][j]
            if isinstance(gij, float) and gij == 0.0:
                continue
            inner = self.h_inner([self.dphi[a][i] for a in range(self.n)],
                                 [self.dphi[b][j] for b in range(self.n)])
            s = s + gij * inner
        return s

    def norm_power(self, q: float):
        """|dphi|^q with the singularity guard for non-trivial exponents."""
        if q == 0.0:
            return 1.0
        if value(self.norm2) <= _NORM2_FLOOR:
            raise SingularityError("vanishing |dphi| under a norm power",
                                   point=point_value(self.X))
        return powr(self.norm2, 0.5 * q)

    def _require_jets(self, op: str):
        if not isinstance(self.X[0], JetScalar):
            raise JetOrderError(f"{op} differentiates computed fields and needs a "
                                f"jet-lifted point (got floats)")

    # -- second fundamental form and tension ------------------------------ #
    @cached_property
    def sff(self):
        """(nabla dphi)[a][i][j], symmetric in (i, j)."""
        m, n = self.m, self.n
        dphi, d2phi = self.dphi, self.d2phi
        gm, gn = self.gammaM, self.gammaN
        out = [[[None] * m for _ in range(m)] for _ in range(n)]
        for a in range(n):
            for i in range(m):
                for j in range(i, m):
                    s = d2phi[a][i][j]
                    for k in range(m):
                        s = s - gm[k][i][j] * dphi[a][k]
                    for mu, sg in itertools.product(range(n), repeat=2):
                        gam = gn[a][mu][sg]
                        if isinstance(gam, float) and gam == 0.0:
                            continue
                        s = s + gam * dphi[mu][i] * dphi[sg][j]
                    out[a][i][j] = s
                    out[a][j][i] = s
        return out

    @cached_property
    def tension(self):
        """tau(phi)^a = g^{ij} (nabla dphi)^a_ij."""
        return [sum(self.ginv[i][j] * self.sff[a][i][j]
                    for i in range(self.m) for j in range(self.m))
                for a in range(self.n)]

    def grad_scalar(self, partials):
        """g^{ij} (d_j f) from a list of coordinate partials of a scalar."""
        return [sum(self.ginv[i][j] * partials[j] for j in range(self.m))
                for i in range(self.m)]

    def p_tension(self, p: float):
        """tau_p(phi) = |dphi|^{p-2} tau(phi) + (p-2)|dphi|^{p-3} dphi(grad |dphi|)."""
        if p == 2.0:
            return self.tension
        self._require_jets("p_tension")
        norm = self.norm_power(1.0)
        dnorm = [partial(norm, j) for j in range(self.m)]
        grad = self.grad_scalar(dnorm)
        pushed = self.push(grad)
        fac1 = self.norm_power(p - 2.0)
        fac2 = (p - 2.0) * self.norm_power(p - 3.0)
        return [fac1 * self.tension[a] + fac2 * pushed[a] for a in range(self.n)]

    # -- pull-back covariant derivative ----------------------------------- #
    def pullback_derivative(self, V, i: int):
        """(nabla^phi_{d_i} V)^a = d_i V^a + Gamma^N{}^a_{mu sigma} (d_i phi^mu) V^sigma."""
        self._require_jets("pullback_derivative")
        n = self.n
        gn = self.gammaN
        out = []
        for a in range(n):
            s = partial(V[a], i)
            for mu, sg in itertools.product(range(n), repeat=2):
                gam = gn[a][mu][sg]
                if isinstance(gam, float) and gam == 0.0:
                    continue
                s = s + gam * self.dphi[mu][i] * V[sg]
            out.append(s)
        return out

    def trace_pullback_gradient(self, W):
        """trace_g of the pull-back gradient of a dphi-indexed family W.

        W[j] is a target vector (the one-form slot j); returns
        g^{ij} [ nabla^phi_i W_j - Gamma^M{}^k_{ij} W_k ].
        """
        m, n = self.m, self.n
        out = [0.0] * n
        for i in range(m):
            for j in range(m):
                gij = self.ginv[i][j]
                if isinstance(gij, float) and gij == 0.0:
                    continue
                cov = self.pullback_derivative(W[j], i)
                for a in range(n):
                    corr = cov[a]
                    for k in range(m):
                        corr = corr - self.gammaM[k][i][j] * W[k][a]
                    out[a] = out[a] + gij * corr
        return out

    # -- the p-bitension field --------------------------------------------- #
    def p_bitension(self, p: float):
        """Euler-Lagrange field of the p-bienergy, as three trace terms."""
        self._require_jets("p_bitension")
        m, n = self.m, self.n
        taup = self.p_tension(p)
        dtaup = [self.pullback_derivative(taup, i) for i in range(m)]
        fac = self.norm_power(p - 2.0)

        # curvature term: -|dphi|^{p-2} g^{ij} R^N(tau_p, dphi_i) dphi_j
        result = [0.0] * n
        if self.map.target.space_form_c != 0.0:
            Rn = self.map.target.curvature_at(self.phiX, memo=self._tgt_memo)
            for i, j in itertools.product(range(m), repeat=2):
                gij = self.ginv[i][j]
                if isinstance(gij, float) and gij == 0.0:
                    continue
                for d in range(n):
                    s = 0.0
                    for al, be, ga in itertools.product(range(n), repeat=3):
                        R = Rn[d][al][be][ga]
                        if isinstance(R, float) and R == 0.0:
                            continue
                        s = s + R * taup[al] * self.dphi[be][i] * self.dphi[ga][j]
                    result[d] = result[d] - fac * gij * s

        # second-order term: -trace_g nabla^phi |dphi|^{p-2} nabla^phi tau_p
        W = [[fac * dtaup[j][a] for a in range(n)] for j in range(m)]
        tr2 = self.trace_pullback_gradient(W)
        for a in range(n):
            result[a] = result[a] - tr2[a]

        # gradient-pairing term: -(p-2) trace_g nabla <nabla^phi tau_p, dphi> |dphi|^{p-4} dphi
        if p != 2.0:
            pairing = 0.0
            for k, l in itertools.product(range(m), repeat=2):
                gkl = self.ginv[k][l]
                if isinstance(gkl, float) and gkl == 0.0:
                    continue
                pairing = pairing + gkl * self.h_inner(dtaup[k],
                                                       [self.dphi[a][l] for a in range(n)])
            fac4 = self.norm_power(p - 4.0)
            U = [[pairing * fac4 * self.dphi[a][j] for a in range(n)] for j in range(m)]
            tr3 = self.trace_pullback_gradient(U)
            for a in range(n):
                result[a] = result[a] - (p - 2.0) * tr3[a]
        return result


# ---------------------------------------------------------------------- #
# public wrappers over float points
# ---------------------------------------------------------------------- #

def dmap(phi: SmoothMap, x):
    """m x n matrix [i][a] of d phi^a / d x_i at x."""
    pt = phi.at(tuple(x))
    return [[value(pt.dphi[a][i]) for a in range(pt.n)] for i in range(pt.m)]


def dmap_norm(phi: SmoothMap, x) -> float:
    """Hilbert-Schmidt norm |dphi| at x."""
    return sqrt(value(phi.at(tuple(x)).norm2))


def second_fundamental_form_map(phi: SmoothMap, x):
    """(nabla dphi)[a][i][j] at x."""
    pt = phi.at(tuple(x))
    return [[[value(v) for v in row] for row in plane] for plane in pt.sff]


def tension(phi: SmoothMap, x):
    return [value(t) for t in phi.at(tuple(x)).tension]


def p_tension(phi: SmoothMap, x, p: float):
    if p < 2.0:
        raise ValueError(f"p must be >= 2, got {p}")
    if p == 2.0:
        return tension(phi, x)
    pt = phi.at(lift_point(x, 1))
    return [value(t) for t in pt.p_tension(p)]


def pullback_derivative(V: FieldAlongMap, direction: int, x):
    """(nabla^phi_{d_direction} V) at x, for a field along V.base_map."""
    X = lift_point(x, V.depth + 1)
    pt = V.base_map.at(X)
    return [value(c) for c in pt.pullback_derivative(V(X), direction)]


def p_bitension(phi: SmoothMap, x, p: float):
    if p < 2.0:
        raise ValueError(f"p must be >= 2, got {p}")
    pt = phi.at(lift_point(x, 3))
    return [value(t) for t in pt.p_bitension(p)]


def tension_field(phi: SmoothMap) -> FieldAlongMap:
    return FieldAlongMap(phi, lambda X: phi.at(X).tension, depth=0)


def p_tension_field(phi: SmoothMap, p: float) -> FieldAlongMap:
    if p == 2.0:
        return tension_field(phi)
    return FieldAlongMap(phi, lambda X: phi.at(X).p_tension(p), depth=1)


# ---------------------------------------------------------------------- #
# box quadrature of the energy functionals
# ---------------------------------------------------------------------- #

def gauss_legendre_box(box, order: int = 8):
    """Tensor-product Gauss-Legendre nodes and weights over an axis-aligned box."""
    nodes_1d, weights_1d = np.polynomial.legendre.leggauss(order)
    axes = []
    for lo, hi in box:
        lo, hi = float(lo), float(hi)
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        axes.append([(float(mid + half * t), float(half * w))
                     for t, w in zip(nodes_1d, weights_1d)])
    for combo in itertools.product(*axes):
        point = tuple(c[0] for c in combo)
        weight = 1.0
        for c in combo:
            weight *= c[1]
        yield point, weight


def _volume_density(pt: MapPoint) -> float:
    from .linalg import det
    return sqrt(value(det(pt.g)))


def p_energy_box(phi: SmoothMap, box, p: float, order: int = 8) -> float:
    """(1/p) integral of |dphi|^p over the box, against the metric volume."""
    total = 0.0
    for x, w in gauss_legendre_box(box, order):
        if not phi.source.contains(x):
            raise SingularityError("quadrature node outside source domain", point=x)
        pt = phi.at(x)
        total += w * value(pt.norm_power(p)) * _volume_density(pt)
    return total / p


def p_bienergy_box(phi: SmoothMap, box, p: float, order: int = 8) -> float:
    """(1/2) integral of |tau_p(phi)|^2 over the box, against the metric volume."""
    total = 0.0
    for x, w in gauss_legendre_box(box, order):
        if not phi.source.contains(x):
            raise SingularityError("quadrature node outside source domain", point=x)
        X = lift_point(x, 1) if p != 2.0 else x
        pt = phi.at(X)
        taup = pt.p_tension(p)
        total += 0.5 * w * value(pt.h_inner(taup, taup)) * _volume_density(pt)
    return total


def perturbed_map(phi: SmoothMap, variation, t: float) -> SmoothMap:
    """The map with components phi^a + t * v^a (a straight-line variation in chart coordinates)."""
    comps = [c + Const(float(t)) * v for c, v in zip(phi.components, variation)]
    return SmoothMap(phi.source, phi.target, comps, phi.params,
                     name=f"{phi.name}+{t}*v")
