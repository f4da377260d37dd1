"""Truncated Taylor series ("jets") evaluated on arrays of base points.

A :class:`Jet` stores normalized Taylor coefficients ``f^(i)(t0) / i!`` for
``i = 0..order`` at every base point of an array.  Arithmetic propagates them
exactly (up to rounding) through +, -, *, /, real powers, exp and log, and
composition, so derivatives of any closed-form expression come out without
finite differences.
"""

from math import factorial

import numpy as np

from .errors import DomainError

__all__ = ["Jet", "exp", "log", "sqrt"]


def _factorials(order):
    return np.array([float(factorial(i)) for i in range(order + 1)])


class Jet:
    """Taylor coefficients of a function at an array of base points.

    Parameters
    ----------
    base_point : array_like
        Points ``t0`` at which the expansion is taken.
    tc : ndarray
        Normalized coefficients, shape ``(order + 1,) + base_point.shape``.
    """

    __slots__ = ("base_point", "tc")
    __array_priority__ = 100

    def __init__(self, base_point, tc):
        self.base_point = np.asarray(base_point, dtype=float)
        self.tc = np.asarray(tc, dtype=float)
        if self.tc.shape[1:] != self.base_point.shape:
            raise ValueError(
                f"coefficient shape {self.tc.shape} does not match base point "
                f"shape {self.base_point.shape}"
            )

    # construction -----------------------------------------------------------

    @classmethod
    def variable(cls, t, order):
        """Jet of the identity map ``t -> t``."""
        t = np.asarray(t, dtype=float)
        tc = np.zeros((order + 1,) + t.shape)
        tc[0] = t
        if order >= 1:
            tc[1] = 1.0
        return cls(t, tc)

    @classmethod
    def constant(cls, value, t, order):
        t = np.asarray(t, dtype=float)
        tc = np.zeros((order + 1,) + t.shape)
        tc[0] = value
        return cls(t, tc)

    @classmethod
    def zeros(cls, t, order):
        t = np.asarray(t, dtype=float)
        return cls(t, np.zeros((order + 1,) + t.shape))

    @classmethod
    def from_derivatives(cls, t, derivatives):
        """Build a jet from ordinary derivatives ``f, f', f'', ...``."""
        d = np.asarray(derivatives, dtype=float)
        fac = _factorials(d.shape[0] - 1).reshape((-1,) + (1,) * (d.ndim - 1))
        return cls(t, d / fac)

    # accessors --------------------------------------------------------------

    @property
    def order(self):
        return self.tc.shape[0] - 1

    @property
    def value(self):
        return self.tc[0]

    @property
    def coefficients(self):
        """Ordinary derivatives ``f^(i)(t0)``, ``i = 0..order``."""
        fac = _factorials(self.order).reshape((-1,) + (1,) * self.base_point.ndim)
        return self.tc * fac

    def __getitem__(self, index):
        """Restrict to a subset of base points."""
        return Jet(self.base_point[index], self.tc[(slice(None),) + np.index_exp[index]])

    def __repr__(self):
        return f"Jet(order={self.order}, shape={self.base_point.shape})"

    # helpers ----------------------------------------------------------------

    def truncate(self, order):
        if order > self.order:
            raise ValueError(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.base_point, self.tc[: order + 1])

    def _lift(self, other):
        if isinstance(other, Jet):
            q = min(self.order, other.order)
            return self.tc[: q + 1], other.tc[: q + 1]
        other = np.asarray(other, dtype=float)
        tc = np.zeros_like(self.tc)
        tc[0] = other
        return self.tc, tc

    # arithmetic -------------------------------------------------------------

    def __add__(self, other):
        a, b = self._lift(other)
        return Jet(self.base_point, a + b)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.base_point, -self.tc)

    def __sub__(self, other):
        a, b = self._lift(other)
        return Jet(self.base_point, a - b)

    def __rsub__(self, other):
        a, b = self._lift(other)
        return Jet(self.base_point, b - a)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.base_point, self.tc * np.asarray(other, dtype=float))
        a, b = self._lift(other)
        out = np.zeros_like(a)
        for k in range(a.shape[0]):
            for i in range(k + 1):
                out[k] += a[i] * b[k - i]
        return Jet(self.base_point, out)

    __rmul__ = __mul__

    def reciprocal(self):
        a = self.tc
        out = np.zeros_like(a)
        out[0] = 1.0 / a[0]
        for k in range(1, a.shape[0]):
            acc = np.zeros_like(a[0])
            for i in range(1, k + 1):
                acc += a[i] * out[k - i]
            out[k] = -acc * out[0]
        return Jet(self.base_point, out)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.base_point, self.tc / np.asarray(other, dtype=float))
        a, b = self._lift(other)
        out = np.zeros_like(a)
        for k in range(a.shape[0]):
            acc = a[k].copy()
            for i in range(1, k + 1):
                acc -= b[i] * out[k - i]
            out[k] = acc / b[0]
        return Jet(self.base_point, out)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)):
            if p == 0:
                return Jet.constant(1.0, self.base_point, self.order)
            if p < 0:
                return self.reciprocal() ** (-p)
            result, base = None, self
            while p:
                if p & 1:
                    result = base if result is None else result * base
                p >>= 1
                if p:
                    base = base * base
            return result
        return self._real_power(float(p))

    def _real_power(self, p):
        # a*y' = p*a'*y for y = a**p; requires a0 != 0
        a = self.tc
        if np.any(a[0] == 0.0):
            raise DomainError("real power of a jet with zero constant term")
        out = np.zeros_like(a)
        out[0] = np.power(a[0], p)
        for k in range(1, a.shape[0]):
            acc = np.zeros_like(a[0])
            for i in range(1, k + 1):
                acc += (p * i - (k - i)) * a[i] * out[k - i]
            out[k] = acc / (k * a[0])
        return Jet(self.base_point, out)

    # calculus ---------------------------------------------------------------

    def derivative(self):
        """Jet of ``f'`` (one order lower)."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        i = np.arange(1, self.order + 1).reshape((-1,) + (1,) * self.base_point.ndim)
        return Jet(self.base_point, self.tc[1:] * i)

    def integrate(self, value):
        """Jet of the antiderivative taking ``value`` at the base point."""
        i = np.arange(1, self.order + 2).reshape((-1,) + (1,) * self.base_point.ndim)
        tc = np.empty((self.order + 2,) + self.base_point.shape)
        tc[0] = value
        tc[1:] = self.tc / i
        return Jet(self.base_point, tc)

    def d(self):
        """Jet of ``(1/t) f'`` -- the operator D."""
        if np.any(self.base_point == 0.0):
            raise DomainError("D = (1/t) d/dt is singular at t = 0")
        df = self.derivative()
        return df / Jet.variable(self.base_point, df.order)

    def compose(self, inner):
        """Taylor coefficients of ``F(G(t))``.

        ``self`` holds the jet of ``F`` at ``G(t0)``; ``inner`` is the jet of ``G``
        at ``t0``.
        """
        q = min(self.order, inner.order)
        delta = Jet(inner.base_point, inner.tc[: q + 1].copy())
        delta.tc[0] = 0.0
        out = Jet.constant(self.tc[q], inner.base_point, q)
        for i in range(q - 1, -1, -1):
            out = out * delta + self.tc[i]
        return out

    def reflect(self):
        """Jet of ``t -> F(-t)`` at ``-t0`` given the jet of ``F`` at ``t0``."""
        sign = (-1.0) ** np.arange(self.order + 1)
        sign = sign.reshape((-1,) + (1,) * self.base_point.ndim)
        return Jet(-self.base_point, self.tc * sign)


def exp(x):
    """Exponential of a jet (or of a plain number/array)."""
    if not isinstance(x, Jet):
        return np.exp(x)
    a = x.tc
    out = np.zeros_like(a)
    out[0] = np.exp(a[0])
    for k in range(1, a.shape[0]):
        acc = np.zeros_like(a[0])
        for i in range(1, k + 1):
            acc += i * a[i] * out[k - i]
        out[k] = acc / k
    return Jet(x.base_point, out)


def log(x):
    if not isinstance(x, Jet):
        return np.log(x)
    a = x.tc
    out = np.zeros_like(a)
    out[0] = np.log(a[0])
    for k in range(1, a.shape[0]):
        acc = k * a[k]
        for i in range(1, k):
            acc = acc - i * out[i] * a[k - i]
        out[k] = acc / (k * a[0])
    return Jet(x.base_point, out)


def sqrt(x):
    if not isinstance(x, Jet):
        return np.sqrt(x)
    return x ** 0.5
