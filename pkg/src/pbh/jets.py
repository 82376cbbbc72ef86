"""Truncated multivariate Taylor ("jet") arithmetic.

A :class:`JetScalar` stores the Taylor coefficients of a scalar quantity with
respect to a fixed set of seed variables, up to a fixed total order K <= 4.
Arithmetic on jets propagates derivatives exactly (Leibniz / chain rule in
coefficient space), so any numeric pipeline written generically over
float-or-jet inputs can be differentiated by evaluating it at a seeded point
and reading coefficients off the result.

Derivatives of *computed* quantities are taken with :meth:`JetScalar.partial`,
which shifts the coefficient table. Each shift consumes one order of validity:
after s shifts, coefficients of total order > K - s are garbage (they would
need order K + s data). Truncated multiplication only mixes orders upward, so
the garbage never contaminates lower-order coefficients. Callers are expected
to lift points with enough order for the shifts their pipeline performs.

The generic elementary functions (:func:`sqrt`, :func:`exp`, ...) accept plain
floats as well, so the same kernel code runs in float mode when no derivatives
are requested.
"""

from __future__ import annotations

import math
from itertools import product as _iterproduct

import numpy as np

from .errors import DomainError, JetOrderError

MAX_ORDER = 4

_SPACES: dict[tuple[int, int], "JetSpace"] = {}


def space_for(nvars: int, order: int) -> "JetSpace":
    """Return the (cached) jet space with `nvars` seed variables and total order `order`."""
    key = (nvars, order)
    space = _SPACES.get(key)
    if space is None:
        space = JetSpace(nvars, order)
        _SPACES[key] = space
    return space


def _monomials(nvars: int, order: int) -> list[tuple[int, ...]]:
    monos = [alpha for alpha in _iterproduct(range(order + 1), repeat=nvars)
             if sum(alpha) <= order]
    monos.sort(key=lambda a: (sum(a), a))
    return monos


class JetSpace:
    """Shape data and precomputed tables for one (nvars, order) configuration."""

    def __init__(self, nvars: int, order: int):
        if nvars < 1:
            raise ValueError("jet space needs at least one seed variable")
        if not 0 <= order <= MAX_ORDER:
            raise JetOrderError(f"jet order must be in 0..{MAX_ORDER}, got {order}")
        self.nvars = nvars
        self.order = order
        self.monomials = _monomials(nvars, order)
        self.size = len(self.monomials)
        self.index = {alpha: i for i, alpha in enumerate(self.monomials)}
        self._orders = np.array([sum(a) for a in self.monomials])

        # dense multiplication table: c[kk] += a[ii] * b[jj]
        ii, jj, kk = [], [], []
        for i, a in enumerate(self.monomials):
            for j, b in enumerate(self.monomials):
                if sum(a) + sum(b) <= order:
                    ii.append(i)
                    jj.append(j)
                    kk.append(self.index[tuple(x + y for x, y in zip(a, b))])
        self._mul_i = np.array(ii, dtype=np.intp)
        self._mul_j = np.array(jj, dtype=np.intp)
        self._mul_k = np.array(kk, dtype=np.intp)

        # partial-derivative shift tables, one per seed variable
        self._shift_src = []
        self._shift_dst = []
        self._shift_fac = []
        for v in range(nvars):
            src, dst, fac = [], [], []
            for i, a in enumerate(self.monomials):
                if sum(a) < order:
                    up = tuple(x + (1 if w == v else 0) for w, x in enumerate(a))
                    src.append(self.index[up])
                    dst.append(i)
                    fac.append(a[v] + 1.0)
            self._shift_src.append(np.array(src, dtype=np.intp))
            self._shift_dst.append(np.array(dst, dtype=np.intp))
            self._shift_fac.append(np.array(fac))

        self._alpha_factorials = np.array(
            [float(math.prod(math.factorial(x) for x in a)) for a in self.monomials])

    def constant(self, x) -> "JetScalar":
        c = np.zeros(self.size)
        c[0] = float(x)
        return JetScalar(self, c)

    def variable(self, v: int, x0) -> "JetScalar":
        """Seeded coordinate: value x0, unit first-order coefficient in slot v."""
        if not 0 <= v < self.nvars:
            raise ValueError(f"seed index {v} out of range for {self.nvars} variables")
        c = np.zeros(self.size)
        c[0] = float(x0)
        e_v = tuple(1 if w == v else 0 for w in range(self.nvars))
        c[self.index[e_v]] = 1.0
        return JetScalar(self, c)

    def __repr__(self):
        return f"JetSpace(nvars={self.nvars}, order={self.order})"


class JetScalar:
    """One truncated Taylor scalar. Immutable by convention."""

    __slots__ = ("space", "c")

    def __init__(self, space: JetSpace, coeffs: np.ndarray):
        self.space = space
        self.c = coeffs

    @property
    def value(self) -> float:
        return float(self.c[0])

    def coefficient(self, alpha) -> float:
        """Taylor coefficient of the monomial `alpha` (derivative / alpha!)."""
        return float(self.c[self.space.index[tuple(alpha)]])

    def derivative(self, alpha) -> float:
        """Mixed partial derivative of multi-index `alpha`."""
        i = self.space.index[tuple(alpha)]
        return float(self.c[i] * self.space._alpha_factorials[i])

    def partial(self, v: int) -> "JetScalar":
        """First partial with respect to seed variable v, as a jet.

        Consumes one order of validity: coefficients of top total order in the
        result are zero-filled placeholders, not true values.
        """
        sp = self.space
        out = np.zeros(sp.size)
        out[sp._shift_dst[v]] = sp._shift_fac[v] * self.c[sp._shift_src[v]]
        return JetScalar(sp, out)

    # ------------------------------------------------------------------ #
    def _coerce(self, other):
        if isinstance(other, JetScalar):
            if other.space is not self.space:
                raise ValueError("jet operands belong to different jet spaces")
            return other
        if isinstance(other, (int, float)):
            return None  # handled inline, cheaper than building a constant jet
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            c = self.c.copy()
            c[0] += other
            return JetScalar(self.space, c)
        return JetScalar(self.space, self.c + o.c)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            c = self.c.copy()
            c[0] -= other
            return JetScalar(self.space, c)
        return JetScalar(self.space, self.c - o.c)

    def __rsub__(self, other):
        c = -self.c
        c[0] += other
        return JetScalar(self.space, c)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            return JetScalar(self.space, self.c * other)
        sp = self.space
        if sp.order <= 1:
            a0, b0 = self.c[0], o.c[0]
            prod = self.c * b0 + o.c * a0
            prod[0] = a0 * b0
            return JetScalar(sp, prod)
        prod = np.bincount(sp._mul_k, weights=self.c[sp._mul_i] * o.c[sp._mul_j],
                           minlength=sp.size)
        return JetScalar(sp, prod)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o is None:
            if other == 0.0:
                raise ZeroDivisionError("jet divided by zero constant")
            return JetScalar(self.space, self.c / other)
        return self * _reciprocal(o)

    def __rtruediv__(self, other):
        return _reciprocal(self) * other

    def __neg__(self):
        return JetScalar(self.space, -self.c)

    def __pow__(self, q):
        return powr(self, q)

    def __repr__(self):
        return f"JetScalar(value={self.value!r}, order={self.space.order}, nvars={self.space.nvars})"


# ---------------------------------------------------------------------- #
# analytic functions of one jet via Horner on the nilpotent part
# ---------------------------------------------------------------------- #

def _compose(u: JetScalar, taylor: list[float]) -> JetScalar:
    """Evaluate f(u) given taylor[k] = f^(k)(u.value) / k!."""
    sp = u.space
    t = JetScalar(sp, u.c.copy())
    t.c[0] = 0.0
    acc = sp.constant(taylor[sp.order])
    for k in range(sp.order - 1, -1, -1):
        acc = acc * t
        acc.c[0] += taylor[k]
    return acc


def _reciprocal(u: JetScalar) -> JetScalar:
    u0 = u.value
    if u0 == 0.0:
        raise ZeroDivisionError("jet division by zero base value")
    inv = 1.0 / u0
    taylor = [inv]
    for _ in range(u.space.order):
        taylor.append(-taylor[-1] * inv)
    return _compose(u, taylor)


def value(u) -> float:
    """Base (order-zero) value of a float-or-jet scalar."""
    if isinstance(u, JetScalar):
        return u.value
    return float(u)


def partial(u, v: int):
    """First partial of a float-or-jet scalar; a plain float is a constant."""
    if isinstance(u, JetScalar):
        return u.partial(v)
    return 0.0


def sqrt(u):
    if isinstance(u, JetScalar):
        return powr(u, 0.5)
    if u < 0.0:
        raise DomainError(f"sqrt of negative value {u}")
    return math.sqrt(u)


def exp(u):
    if isinstance(u, JetScalar):
        e0 = math.exp(u.value)
        taylor = [e0 / math.factorial(k) for k in range(u.space.order + 1)]
        return _compose(u, taylor)
    return math.exp(u)


def log(u):
    if isinstance(u, JetScalar):
        u0 = u.value
        if u0 <= 0.0:
            raise DomainError(f"log of non-positive value {u0}")
        taylor = [math.log(u0)]
        for k in range(1, u.space.order + 1):
            taylor.append((-1.0) ** (k - 1) / (k * u0 ** k))
        return _compose(u, taylor)
    if u <= 0.0:
        raise DomainError(f"log of non-positive value {u}")
    return math.log(u)


def sin(u):
    if isinstance(u, JetScalar):
        s0, c0 = math.sin(u.value), math.cos(u.value)
        cycle = (s0, c0, -s0, -c0)
        taylor = [cycle[k % 4] / math.factorial(k) for k in range(u.space.order + 1)]
        return _compose(u, taylor)
    return math.sin(u)


def cos(u):
    if isinstance(u, JetScalar):
        s0, c0 = math.sin(u.value), math.cos(u.value)
        cycle = (c0, -s0, -c0, s0)
        taylor = [cycle[k % 4] / math.factorial(k) for k in range(u.space.order + 1)]
        return _compose(u, taylor)
    return math.cos(u)


def _int_power(u: JetScalar, n: int) -> JetScalar:
    if n == 0:
        return u.space.constant(1.0)
    result = None
    base = u
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    return result


def powr(u, q):
    """u raised to a real constant exponent q.

    Non-negative integer exponents work for any base (repeated multiplication);
    other exponents need a base with nonzero (negative integer q) or positive
    (fractional q) value.
    """
    q = float(q)
    is_int = q == int(q)
    if isinstance(u, JetScalar):
        if is_int and q >= 0:
            return _int_power(u, int(q))
        u0 = u.value
        if u0 == 0.0:
            raise DomainError(f"zero base raised to exponent {q}")
        if not is_int and u0 < 0.0:
            raise DomainError(f"negative base {u0} raised to fractional exponent {q}")
        taylor = []
        coeff = 1.0
        for k in range(u.space.order + 1):
            taylor.append(coeff * u0 ** (q - k))
            coeff *= (q - k) / (k + 1)
        return _compose(u, taylor)
    u = float(u)
    if is_int:
        if u == 0.0 and q < 0:
            raise DomainError(f"zero base raised to exponent {q}")
        return u ** int(q)
    if u < 0.0:
        raise DomainError(f"negative base {u} raised to fractional exponent {q}")
    if u == 0.0 and q < 0:
        raise DomainError(f"zero base raised to exponent {q}")
    return math.pow(u, q)


def abspow(u, q):
    """|u|^q for real constant q; smooth away from u = 0 where it is computed as (u^2)^(q/2)."""
    q = float(q)
    if isinstance(u, JetScalar):
        return powr(u * u, 0.5 * q)
    u = float(u)
    if u == 0.0:
        if q > 0:
            return 0.0
        if q == 0:
            return 1.0
        raise DomainError("abspow at zero with negative exponent")
    return math.pow(abs(u), q)


# ---------------------------------------------------------------------- #
# point lifting
# ---------------------------------------------------------------------- #

def lift_point(x, order: int) -> tuple:
    """Turn a float point into a tuple of seeded jets of the given total order.

    Every coordinate becomes a seed variable; `order` must cover the number of
    `partial` shifts the downstream pipeline performs.
    """
    x = [float(v) for v in x]
    sp = space_for(len(x), order)
    return tuple(sp.variable(i, v) for i, v in enumerate(x))


def point_value(X) -> tuple[float, ...]:
    """Base values of a float-or-jet point."""
    return tuple(value(v) for v in X)
