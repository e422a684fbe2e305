"""Truncated bivariate Taylor jets.

A ``Jet`` carries the value and all partial derivatives of a scalar field of
two variables at a point, up to a fixed order (at most 4).  Arithmetic on jets
propagates derivatives exactly: sums and products term by term, quotients via
the reciprocal series, and elementary functions by composing their univariate
derivative sequences with the truncated series.  Internally coefficients are
Taylor-scaled (divided by a!·b!) so that multiplication is a plain truncated
polynomial product; the public accessors return raw derivative values.
"""

from __future__ import annotations

import math

MAX_ORDER = 4


class DomainError(ValueError):
    """Evaluation left the real domain (log/sqrt of a non-positive value,
    or division by a jet whose value term is zero)."""


def _monomials(order: int) -> list[tuple[int, int]]:
    # Ordered by total degree, so truncation to a lower order is a prefix slice.
    return [(a, d - a) for d in range(order + 1) for a in range(d, -1, -1)]


MONOMIALS = {n: _monomials(n) for n in range(MAX_ORDER + 1)}
_INDEX = {n: {ab: i for i, ab in enumerate(MONOMIALS[n])} for n in range(MAX_ORDER + 1)}
_SIZE = {n: len(MONOMIALS[n]) for n in range(MAX_ORDER + 1)}

# (i, j, k): coefficient i times coefficient j contributes to output slot k.
_MUL_TABLE: dict[int, list[tuple[int, int, int]]] = {}
for _n in range(MAX_ORDER + 1):
    _tbl = []
    for _i, (_a1, _b1) in enumerate(MONOMIALS[_n]):
        for _j, (_a2, _b2) in enumerate(MONOMIALS[_n]):
            if _a1 + _a2 + _b1 + _b2 <= _n:
                _tbl.append((_i, _j, _INDEX[_n][(_a1 + _a2, _b1 + _b2)]))
    _MUL_TABLE[_n] = _tbl

# (src, factor, dst): Taylor coefficients of the partial derivative.
_DIFF_TABLE: dict[tuple[int, int], list[tuple[int, float, int]]] = {}
for _n in range(1, MAX_ORDER + 1):
    for _axis in (1, 2):
        _tbl = []
        for _i, (_a, _b) in enumerate(MONOMIALS[_n]):
            if _axis == 1 and _a >= 1:
                _tbl.append((_i, float(_a), _INDEX[_n - 1][(_a - 1, _b)]))
            elif _axis == 2 and _b >= 1:
                _tbl.append((_i, float(_b), _INDEX[_n - 1][(_a, _b - 1)]))
        _DIFF_TABLE[(_n, _axis)] = _tbl

_FACTORIALS = [1.0, 1.0, 2.0, 6.0, 24.0]


class Jet:
    """Value plus partial derivatives, up to ``order``, of a scalar at a point."""

    __slots__ = ("order", "_t")

    def __init__(self, order: int, taylor: tuple[float, ...]):
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"jet order must be in 0..{MAX_ORDER}, got {order}")
        if len(taylor) != _SIZE[order]:
            raise ValueError(
                f"order-{order} jet needs {_SIZE[order]} coefficients, got {len(taylor)}"
            )
        self.order = order
        self._t = taylor

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value: float, order: int) -> "Jet":
        t = [0.0] * _SIZE[order]
        t[0] = float(value)
        return cls(order, tuple(t))

    @classmethod
    def variable(cls, value: float, axis: int, order: int) -> "Jet":
        """Seed jet of the coordinate function x1 (axis=1) or x2 (axis=2)."""
        if axis not in (1, 2):
            raise ValueError("axis must be 1 or 2")
        t = [0.0] * _SIZE[order]
        t[0] = float(value)
        if order >= 1:
            t[_INDEX[order][(1, 0) if axis == 1 else (0, 1)]] = 1.0
        return cls(order, tuple(t))

    # -- accessors ----------------------------------------------------------

    @property
    def value(self) -> float:
        return self._t[0]

    def deriv(self, a: int, b: int) -> float:
        """Raw partial derivative d^a_1 d^b_2 of the underlying scalar."""
        if a < 0 or b < 0 or a + b > self.order:
            raise ValueError(f"derivative ({a},{b}) not stored in order-{self.order} jet")
        return self._t[_INDEX[self.order][(a, b)]] * _FACTORIALS[a] * _FACTORIALS[b]

    @property
    def coeffs(self) -> tuple[float, ...]:
        """All raw derivatives, in the canonical monomial order of ``MONOMIALS``."""
        return tuple(
            self._t[i] * _FACTORIALS[a] * _FACTORIALS[b]
            for i, (a, b) in enumerate(MONOMIALS[self.order])
        )

    def is_constant(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self._t[1:])

    def is_finite(self) -> bool:
        return all(math.isfinite(c) for c in self._t)

    def truncate(self, order: int) -> "Jet":
        if order == self.order:
            return self
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        return Jet(order, self._t[: _SIZE[order]])

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other) -> "tuple[Jet, Jet] | None":
        if isinstance(other, Jet):
            n = min(self.order, other.order)
            return self.truncate(n), other.truncate(n)
        if isinstance(other, (int, float)):
            return self, Jet.constant(float(other), self.order)
        return None

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return Jet(a.order, tuple(x + y for x, y in zip(a._t, b._t)))

    __radd__ = __add__

    def __sub__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return Jet(a.order, tuple(x - y for x, y in zip(a._t, b._t)))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __neg__(self):
        return Jet(self.order, tuple(-x for x in self._t))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            f = float(other)
            return Jet(self.order, tuple(x * f for x in self._t))
        if not isinstance(other, Jet):
            return NotImplemented
        n = min(self.order, other.order)
        a, b = self.truncate(n)._t, other.truncate(n)._t
        out = [0.0] * _SIZE[n]
        for i, j, k in _MUL_TABLE[n]:
            out[k] += a[i] * b[j]
        return Jet(n, tuple(out))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return self * (1.0 / float(other))
        if not isinstance(other, Jet):
            return NotImplemented
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        return integer_power(self, n)

    def __repr__(self) -> str:
        parts = ", ".join(
            f"d{a}{b}={self.deriv(a, b):.6g}" for a, b in MONOMIALS[self.order]
        )
        return f"Jet(order={self.order}, {parts})"


def diff(jet: Jet, axis: int) -> Jet:
    """Jet of the partial derivative along ``axis`` (1 or 2); order drops by one."""
    if jet.order == 0:
        raise ValueError("cannot differentiate an order-0 jet")
    out = [0.0] * _SIZE[jet.order - 1]
    for src, factor, dst in _DIFF_TABLE[(jet.order, axis)]:
        out[dst] = factor * jet._t[src]
    return Jet(jet.order - 1, tuple(out))


def compose(jet: Jet, derivs: list[float]) -> Jet:
    """Jet of h(f) given the jet of f and [h(f0), h'(f0), ..., h^(n)(f0)]."""
    n = jet.order
    taylor = [derivs[k] / _FACTORIALS[k] for k in range(n + 1)]
    p = Jet(n, (0.0,) + jet._t[1:])  # perturbation: f minus its value term
    result = Jet.constant(taylor[n], n)
    for k in range(n - 1, -1, -1):
        result = result * p + taylor[k]
    return result


def integer_power(jet: Jet, n: int) -> Jet:
    if n == 0:
        return Jet.constant(1.0, jet.order)
    if n < 0:
        return reciprocal(integer_power(jet, -n))
    result = jet
    for _ in range(n - 1):
        result = result * jet
    return result


def reciprocal(jet: Jet) -> Jet:
    v = jet.value
    if v == 0.0:
        raise DomainError("division by a jet whose value term is zero")
    derivs = [1.0 / v]
    for k in range(1, jet.order + 1):
        derivs.append(-derivs[-1] * k / v)
    return compose(jet, derivs)


# -- elementary functions ----------------------------------------------------


def exp(jet: Jet) -> Jet:
    e = math.exp(jet.value)
    return compose(jet, [e] * (jet.order + 1))


def log(jet: Jet) -> Jet:
    v = jet.value
    if v <= 0.0:
        raise DomainError(f"log of non-positive value {v!r}")
    derivs = [math.log(v)]
    sign = 1.0
    for k in range(1, jet.order + 1):
        derivs.append(sign * _FACTORIALS[k - 1] / v**k)
        sign = -sign
    return compose(jet, derivs)


def sqrt(jet: Jet) -> Jet:
    v = jet.value
    if v <= 0.0:
        raise DomainError(f"sqrt of non-positive value {v!r}")
    s = math.sqrt(v)
    derivs = [s]
    factor = 1.0
    for k in range(1, jet.order + 1):
        factor *= 0.5 - (k - 1)
        derivs.append(factor * s / v**k)
    return compose(jet, derivs)


def sin(jet: Jet) -> Jet:
    s, c = math.sin(jet.value), math.cos(jet.value)
    cycle = [s, c, -s, -c]
    return compose(jet, [cycle[k % 4] for k in range(jet.order + 1)])


def cos(jet: Jet) -> Jet:
    s, c = math.sin(jet.value), math.cos(jet.value)
    cycle = [c, -s, -c, s]
    return compose(jet, [cycle[k % 4] for k in range(jet.order + 1)])


def sinh(jet: Jet) -> Jet:
    s, c = math.sinh(jet.value), math.cosh(jet.value)
    return compose(jet, [s if k % 2 == 0 else c for k in range(jet.order + 1)])


def cosh(jet: Jet) -> Jet:
    s, c = math.sinh(jet.value), math.cosh(jet.value)
    return compose(jet, [c if k % 2 == 0 else s for k in range(jet.order + 1)])


def _poly_diff(p: list[float]) -> list[float]:
    return [p[k] * k for k in range(1, len(p))]


def _poly_mul(p: list[float], q: list[float]) -> list[float]:
    out = [0.0] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        for j, qj in enumerate(q):
            out[i + j] += pi * qj
    return out


def _poly_eval(p: list[float], x: float) -> float:
    acc = 0.0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _tangent_derivs(u: float, n: int, sign: float) -> list[float]:
    # y' = 1 + sign*y^2 expresses every higher derivative as a polynomial in y.
    derivs = [u]
    p = [0.0, 1.0]  # the polynomial y itself
    for _ in range(n):
        p = _poly_mul(_poly_diff(p), [1.0, 0.0, sign])
        derivs.append(_poly_eval(p, u))
    return derivs


def tan(jet: Jet) -> Jet:
    return compose(jet, _tangent_derivs(math.tan(jet.value), jet.order, 1.0))


def tanh(jet: Jet) -> Jet:
    return compose(jet, _tangent_derivs(math.tanh(jet.value), jet.order, -1.0))


def _poly_sub(p: list[float], q: list[float]) -> list[float]:
    n = max(len(p), len(q))
    p = p + [0.0] * (n - len(p))
    q = q + [0.0] * (n - len(q))
    return [a - b for a, b in zip(p, q)]


def atan(jet: Jet) -> Jet:
    # d^k atan = Q_k(x) / (1+x^2)^k with Q_1 = 1 and
    # Q_{k+1} = Q_k' (1+x^2) - 2k x Q_k.
    v = jet.value
    derivs = [math.atan(v)]
    q = [1.0]
    w = 1.0 + v * v
    for k in range(1, jet.order + 1):
        derivs.append(_poly_eval(q, v) / w**k)
        q = _poly_sub(
            _poly_mul(_poly_diff(q) or [0.0], [1.0, 0.0, 1.0]),
            _poly_mul([0.0, 2.0 * k], q),
        )
    return compose(jet, derivs)


FUNCTIONS = {
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "sinh": sinh,
    "cosh": cosh,
    "tanh": tanh,
    "atan": atan,
}
