"""The stress p-bienergy tensor, its trace and auxiliary one-form, and the
divergence identity linking it to the p-bitension field.

All five terms of the tensor are assembled from the map-calculus primitives;
the divergence side jet-differentiates the full stress pipeline (one shift on
top of the two the tensor consumes), so a float-point divergence check lifts
to order 3.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import divergence, divergence_2tensor
from .jets import lift_point, value
from .mapcalc import MapPoint, SmoothMap

__all__ = [
    "StressTensorValue", "ThetaForm",
    "stress_tensor", "stress_trace", "theta", "stress_divergence_check",
    "theta_sharp_field",
]


@dataclass
class StressTensorValue:
    """Stress tensor matrix at a point, with the two scalar invariants it reuses."""

    point: tuple
    matrix: list
    p: float
    tau_p_norm2: float
    pairing: float  # |dphi|^{p-2} <dphi, nabla^phi tau_p>


@dataclass
class ThetaForm:
    """The one-form theta(X) = h(|dphi|^{p-2} dphi(X), tau_p)."""

    point: tuple
    components: list

    def __call__(self, v):
        return sum(c * vi for c, vi in zip(self.components, v))


def _stress_matrix(mp: MapPoint, p: float):
    """(S matrix, |tau_p|^2, |dphi|^{p-2}<dphi, nabla tau_p>) at a jet point (2 shifts)."""
    m, n = mp.m, mp.n
    taup = mp.p_tension(p)
    dtaup = [mp.pullback_derivative(taup, i) for i in range(m)]
    fac = mp.norm_power(p - 2.0)
    tau2 = mp.h_inner(taup, taup)
    pairing = 0.0
    for i in range(m):
        for j in range(m):
            gij = mp.ginv[i][j]
            if isinstance(gij, float) and gij == 0.0:
                continue
            pairing = pairing + gij * mp.h_inner(dtaup[i], [mp.dphi[a][j] for a in range(n)])
    scaled_pairing = fac * pairing

    dphi_cols = [[mp.dphi[a][i] for a in range(n)] for i in range(m)]
    fac4s = None
    if p != 2.0:
        fac4s = (p - 2.0) * mp.norm_power(p - 4.0) * pairing
    S = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(i, m):
            s = (-0.5 * tau2 - scaled_pairing) * mp.g[i][j]
            s = s + fac * mp.h_inner(dphi_cols[i], dtaup[j])
            s = s + fac * mp.h_inner(dphi_cols[j], dtaup[i])
            if fac4s is not None:
                s = s + fac4s * mp.h_inner(dphi_cols[i], dphi_cols[j])
            S[i][j] = S[j][i] = s
    return S, tau2, scaled_pairing


def stress_tensor(phi: SmoothMap, x, p: float) -> StressTensorValue:
    """Stress p-bienergy tensor at a float point."""
    mp = phi.at(lift_point(x, 2))
    S, tau2, pairing = _stress_matrix(mp, p)
    return StressTensorValue(
        point=tuple(float(v) for v in x),
        matrix=[[value(s) for s in row] for row in S],
        p=p, tau_p_norm2=value(tau2), pairing=value(pairing))


def stress_trace(phi: SmoothMap, x, p: float) -> float:
    """g^{ij} S_ij; equals -(m/2)|tau_p|^2 + (p-m)|dphi|^{p-2}<dphi, nabla tau_p>."""
    mp = phi.at(lift_point(x, 2))
    S, _, _ = _stress_matrix(mp, p)
    m = mp.m
    tr = sum(mp.ginv[i][j] * S[i][j] for i in range(m) for j in range(m))
    return value(tr)


def theta(phi: SmoothMap, x, p: float) -> ThetaForm:
    """The pairing one-form used by the trace identities."""
    mp = phi.at(lift_point(x, 1))
    taup = mp.p_tension(p)
    fac = mp.norm_power(p - 2.0)
    comps = [value(fac * mp.h_inner([mp.dphi[a][i] for a in range(mp.n)], taup))
             for i in range(mp.m)]
    return ThetaForm(point=tuple(float(v) for v in x), components=comps)


def theta_sharp_field(phi: SmoothMap, p: float):
    """theta with the index raised, as a source vector field (depth 1)."""

    def rule(X):
        mp = phi.at(X)
        taup = mp.p_tension(p)
        fac = mp.norm_power(p - 2.0)
        low = [fac * mp.h_inner([mp.dphi[a][i] for a in range(mp.n)], taup)
               for i in range(mp.m)]
        return [sum(mp.ginv[i][j] * low[j] for j in range(mp.m)) for i in range(mp.m)]

    rule.depth = 1
    return rule


def theta_divergence(phi: SmoothMap, x, p: float) -> float:
    """div of the sharped theta form; equals |tau_p|^2 + |dphi|^{p-2}<dphi, nabla tau_p>."""
    return divergence(phi.source, theta_sharp_field(phi, p), x)


def stress_divergence_check(phi: SmoothMap, x, p: float):
    """Both sides of div S(d_k) = -h(tau_2p, dphi(d_k)) at x, plus the max gap."""

    def field(X):
        return _stress_matrix(phi.at(X), p)[0]

    field.depth = 2
    lhs = divergence_2tensor(phi.source, field, x)

    mp = phi.at(lift_point(x, 3))
    tau2p = mp.p_bitension(p)
    rhs = [value(-mp.h_inner(tau2p, [mp.dphi[a][k] for a in range(mp.n)]))
           for k in range(mp.m)]
    gap = max(abs(a - b) for a, b in zip(lhs, rhs))
    return lhs, rhs, gap
