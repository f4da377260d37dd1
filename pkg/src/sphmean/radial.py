"""Smooth one-dimensional functions and the calculus of D = (1/t) d/dt.

Functions are represented as jet providers: ``fn.jet(t, order)`` returns the
value and the first ``order`` derivatives at every point of ``t``.  Everything
built from them (sums, products, powers of ``t``, ``D**j``, D-antiderivatives)
is again a jet provider, so stacked applications of ``D`` stay exact.
"""

from functools import lru_cache

import numpy as np
from numpy.polynomial import Chebyshev, legendre

from . import jets
from .errors import CapabilityError, ConstraintError, DomainError, NotInDPowerImage
from .jets import Jet

__all__ = [
    "DEFAULT_MAX_ORDER",
    "DEFAULT_NODES",
    "SUPPORT_MARGIN",
    "SmoothFn1D",
    "RadialProfile",
    "DAntiderivative",
    "bump",
    "bump_shape",
    "monomial",
    "polynomial",
    "compose",
    "jet_eval",
    "d_apply",
    "d_from_ordinary",
    "moment",
    "abs_moment",
    "d_antiderivative",
    "ibp_residual",
    "gauss_legendre",
    "cheb_fit",
    "PiecewiseChebyshev",
]

DEFAULT_MAX_ORDER = 12
DEFAULT_NODES = 800
SUPPORT_MARGIN = 0.05
# moments of D-filtered profiles carry sharp oscillations; they get a finer rule
MOMENT_NODES = 3200
# exp(-600) ~ 1e-261: below this the bump and all its derivatives are zero
_BUMP_CUTOFF = 1.0 / 600.0


# quadrature ------------------------------------------------------------------


@lru_cache(maxsize=32)
def _leggauss(n):
    x, w = legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a, b, n=DEFAULT_NODES):
    """Gauss-Legendre nodes and weights on ``[a, b]``.

    ``a`` and ``b`` may be arrays of equal shape; the result then has shape
    ``a.shape + (n,)``.
    """
    x, w = _leggauss(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


class PiecewiseChebyshev:
    """Chebyshev series on consecutive panels ``[edges[i], edges[i+1]]``.

    Bump-type functions converge only sub-exponentially in a single Chebyshev
    basis; splitting the interval keeps every panel at a modest degree.
    """

    def __init__(self, edges, pieces):
        self.edges = np.asarray(edges, dtype=float)
        self.pieces = list(pieces)

    @property
    def degree(self):
        return max(p.degree() for p in self.pieces)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, len(self.pieces) - 1)
        out = np.empty(x.shape)
        for i in np.unique(idx):
            mask = idx == i
            out[mask] = self.pieces[i](x[mask])
        return out

    def integ(self, lbnd=None):
        """Continuous antiderivative vanishing at ``lbnd`` (default: left end)."""
        pieces, offset = [], 0.0
        for i, p in enumerate(self.pieces):
            q = p.integ(lbnd=self.edges[i]) + offset
            offset = float(q(self.edges[i + 1]))
            pieces.append(q)
        out = PiecewiseChebyshev(self.edges, pieces)
        if lbnd is not None and lbnd != self.edges[0]:
            shift = float(out(lbnd))
            out = PiecewiseChebyshev(self.edges, [q - shift for q in pieces])
        return out

    def times_x(self):
        return PiecewiseChebyshev(
            self.edges,
            [Chebyshev.identity(domain=p.domain) * p for p in self.pieces],
        )


def cheb_fit(func, a, b, tol=1e-13, panels=16, min_degree=32, max_degree=1024):
    """Piecewise Chebyshev interpolant of ``func`` on ``[a, b]``.

    On each panel the degree doubles until the trailing coefficients fall below
    ``tol`` relative to the largest coefficient over the whole interval.
    """
    edges = np.linspace(a, b, panels + 1)
    probe = [Chebyshev.interpolate(func, min_degree, domain=[edges[i], edges[i + 1]])
             for i in range(panels)]
    scale = max(np.abs(p.coef).max() for p in probe)
    pieces = []
    for i, series in enumerate(probe):
        deg = min_degree
        while True:
            c = np.abs(series.coef)
            if scale == 0.0 or c[-8:].max() <= tol * scale or deg >= max_degree:
                break
            deg *= 2
            series = Chebyshev.interpolate(func, deg, domain=[edges[i], edges[i + 1]])
        pieces.append(series)
    return PiecewiseChebyshev(edges, pieces)


# smooth functions --------------------------------------------------------------


class SmoothFn1D:
    """A smooth function of one real variable presented as a jet provider.

    Parameters
    ----------
    evaluator : callable
        ``evaluator(t, order) -> Jet`` for an ndarray ``t``.
    max_order : int
        Highest derivative order the evaluator supports.
    """

    def __init__(self, evaluator, max_order=DEFAULT_MAX_ORDER):
        self._evaluator = evaluator
        self.max_order = int(max_order)

    @classmethod
    def from_expression(cls, expr, max_order=DEFAULT_MAX_ORDER):
        """Wrap ``expr(x)`` written with jet arithmetic, e.g. ``lambda x: x**4``."""

        def evaluator(t, order):
            out = expr(Jet.variable(t, order))
            if not isinstance(out, Jet):
                out = Jet.constant(out, t, order)
            return out

        return cls(evaluator, max_order)

    def jet(self, t, order):
        if order < 0:
            raise ValueError("order must be non-negative")
        if order > self.max_order:
            raise CapabilityError(
                f"order {order} exceeds this function's max_order {self.max_order}"
            )
        return self._evaluate(np.asarray(t, dtype=float), int(order))

    def _evaluate(self, t, order):
        return self._evaluator(t, order)

    def __call__(self, t):
        v = self.jet(t, 0).value
        return float(v) if np.ndim(v) == 0 else v

    # arithmetic -----------------------------------------------------------

    def _binary(self, other, op, kind):
        if isinstance(other, SmoothFn1D):
            max_order = min(self.max_order, other.max_order)

            def evaluator(t, order):
                return op(self.jet(t, order), other.jet(t, order))

            support = _combined_support(self, other, kind)
        else:
            c = float(other)
            max_order = self.max_order

            def evaluator(t, order):
                return op(self.jet(t, order), c)

            support = getattr(self, "support", None) if kind != "add" else None
            if kind == "add" and c == 0.0:
                support = getattr(self, "support", None)
        return _wrap(evaluator, max_order, support)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b, "add")

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b, "add")

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self * -1.0

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b, "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, lambda a, b: a / b, "div")


class RadialProfile(SmoothFn1D):
    """A smooth function with compact support ``[a, b]`` inside ``(0, 2)``.

    Jets are computed only at points inside the support and are exactly zero
    elsewhere.
    """

    def __init__(self, evaluator, support, max_order=DEFAULT_MAX_ORDER):
        super().__init__(evaluator, max_order)
        a, b = (float(s) for s in support)
        if not (SUPPORT_MARGIN - 1e-12 <= a <= b <= 2.0 - SUPPORT_MARGIN + 1e-12):
            raise ConstraintError(
                f"support [{a}, {b}] must lie in [{SUPPORT_MARGIN}, {2 - SUPPORT_MARGIN}]"
            )
        self.support = (a, b)

    @classmethod
    def from_fn(cls, fn, support):
        return cls(fn.jet, support, fn.max_order)

    def _evaluate(self, t, order):
        a, b = self.support
        inside = (t > a) & (t < b)
        if inside.all():
            return self._evaluator(t, order)
        out = Jet.zeros(t, order)
        if inside.any():
            out.tc[:, inside] = self._evaluator(t[inside], order).tc
        return out

    def scale(self, n_points=1001, order=0):
        """Sup norm of the ``order``-th D-derivative sampled over the support."""
        a, b = self.support
        t = np.linspace(a, b, n_points)[1:-1]
        j = self.jet(t, order)
        for _ in range(order):
            j = j.d()
        return float(np.max(np.abs(j.value))) if t.size else 0.0


def _combined_support(f, g, kind):
    sf = getattr(f, "support", None)
    sg = getattr(g, "support", None)
    if kind == "add":
        if sf is None or sg is None:
            return None
        return (min(sf[0], sg[0]), max(sf[1], sg[1]))
    if kind == "div":
        return sf
    if sf is None:
        return sg
    if sg is None:
        return sf
    lo, hi = max(sf[0], sg[0]), min(sf[1], sg[1])
    return (lo, hi) if lo <= hi else sf


def _wrap(evaluator, max_order, support):
    if support is None:
        return SmoothFn1D(evaluator, max_order)
    return RadialProfile(evaluator, support, max_order)


def _preserve(fn, evaluator, max_order):
    return _wrap(evaluator, max_order, getattr(fn, "support", None))


# constructors ----------------------------------------------------------------


def bump_shape(x):
    """``exp(-1/(1 - x**2))`` on ``|x| < 1`` and zero outside, for a jet ``x``."""
    x0 = x.value
    active = 1.0 - x0 * x0 > _BUMP_CUTOFF
    out = Jet.zeros(x.base_point, x.order)
    if active.any():
        xa = x[active]
        out.tc[:, active] = jets.exp(-1.0 / (1.0 - xa * xa)).tc
    return out


def bump(center, half_width, amplitude=1.0, max_order=DEFAULT_MAX_ORDER):
    """Smooth bump ``amplitude * exp(-1/(1 - x**2))``, ``x = (t - center)/half_width``."""
    center, half_width = float(center), float(half_width)
    if half_width <= 0.0:
        raise ConstraintError("half_width must be positive")
    lo, hi = center - half_width, center + half_width
    if lo <= 0.0 or hi >= 2.0:
        raise ConstraintError(f"bump support [{lo}, {hi}] is not inside (0, 2)")

    def evaluator(t, order):
        x = (Jet.variable(t, order) - center) / half_width
        return bump_shape(x) * amplitude

    return RadialProfile(evaluator, (lo, hi), max_order)


def monomial(p, coefficient=1.0, max_order=DEFAULT_MAX_ORDER):
    """``coefficient * t**p`` for integer ``p`` (negative powers allowed away from 0)."""
    return SmoothFn1D.from_expression(lambda x: x ** int(p) * coefficient, max_order)


def polynomial(coefficients, max_order=DEFAULT_MAX_ORDER):
    """Polynomial with ascending ``coefficients``."""
    coefficients = [float(c) for c in coefficients]

    def expr(x):
        out = Jet.constant(coefficients[-1], x.base_point, x.order)
        for c in reversed(coefficients[:-1]):
            out = out * x + c
        return out

    return SmoothFn1D.from_expression(expr, max_order)


def compose(outer, inner):
    """The composite ``t -> outer(inner(t))``."""

    def evaluator(t, order):
        gj = inner.jet(t, order)
        return outer.jet(gj.value, order).compose(gj)

    return SmoothFn1D(evaluator, min(outer.max_order, inner.max_order))


# D calculus -------------------------------------------------------------------


def jet_eval(fn, t, order):
    """Value and ordinary derivatives of ``fn`` at ``t`` up to ``order``."""
    return fn.jet(t, order)


def d_apply(fn, j):
    """``D**j fn`` as a new jet provider (identity for ``j = 0``)."""
    j = int(j)
    if j < 0:
        raise ValueError("j must be non-negative")
    if j == 0:
        return fn
    if j > fn.max_order:
        raise CapabilityError(f"D**{j} needs order {j}, function provides {fn.max_order}")

    def evaluator(t, order):
        out = fn.jet(t, order + j)
        for _ in range(j):
            out = out.d()
        return out

    return _preserve(fn, evaluator, fn.max_order - j)


@lru_cache(maxsize=None)
def _d_coefficients(j):
    # D^j f = sum_i a[j, i] t^(i - 2j) f^(i);  a[j+1, i] = a[j, i-1] + (i - 2j) a[j, i]
    a = [1.0]
    for jj in range(j):
        nxt = [0.0] * (len(a) + 1)
        for i in range(len(nxt)):
            if i >= 1:
                nxt[i] += a[i - 1]
            if i < len(a):
                nxt[i] += (i - 2 * jj) * a[i]
        a = nxt
    return tuple(a)


def d_from_ordinary(jet, j):
    """``(D**j f)(t)`` from a jet of ordinary derivatives of ``f``."""
    if jet.order < j:
        raise CapabilityError(f"jet of order {jet.order} cannot give D**{j}")
    t = jet.base_point
    if np.any(t == 0.0):
        raise DomainError("D is singular at t = 0")
    deriv = jet.coefficients
    out = np.zeros_like(t)
    for i, a in enumerate(_d_coefficients(int(j))):
        if a:
            out = out + a * t ** (i - 2 * j) * deriv[i]
    return float(out) if out.ndim == 0 else out


def moment(p, j, nodes=MOMENT_NODES):
    """``int_0^2 s**(2j+1) p(s) ds`` by Gauss-Legendre on the support."""
    s, w = gauss_legendre(*p.support, nodes)
    return float(np.sum(w * s ** (2 * j + 1) * p(s)))


def abs_moment(p, j, nodes=MOMENT_NODES):
    s, w = gauss_legendre(*p.support, nodes)
    return float(np.sum(w * s ** (2 * j + 1) * np.abs(p(s))))


class DAntiderivative(RadialProfile):
    """``V`` with ``D**order V = p``, from iterating ``V(t) = int_a^t s U(s) ds``.

    Each iterate is held as a piecewise Chebyshev series on the support of ``p``; the
    iteration multiplies by ``s`` and integrates exactly in coefficient space.
    Derivatives of ``V`` beyond the stored iterates come from the jets of ``p``.
    """

    def __init__(self, p, order, series):
        self.base = p
        self.order = int(order)
        self._series = series  # series[i] holds V_i, i = 1..order
        super().__init__(self._jet_inside, p.support, p.max_order + self.order)

    def _jet_level(self, i, t, q):
        if i == 0:
            return self.base.jet(t, q)
        value = self._series[i](t)
        if q == 0:
            return Jet.constant(value, t, 0)
        lower = self._jet_level(i - 1, t, q - 1)
        return (Jet.variable(t, q - 1) * lower).integrate(value)

    def _jet_inside(self, t, order):
        return self._jet_level(self.order, t, order)


def d_antiderivative(p, order, tol=1e-9, nodes=MOMENT_NODES):
    """Compactly supported ``V`` with ``D**order V = p``.

    Raises :class:`NotInDPowerImage` when a moment ``j < order`` of ``p``
    exceeds ``tol`` relative to the corresponding moment of ``|p|``.
    """
    order = int(order)
    if order == 0:
        return p
    for j in range(order):
        m = moment(p, j, nodes)
        threshold = tol * abs_moment(p, j, nodes)
        if abs(m) > threshold:
            raise NotInDPowerImage(j, m, threshold)
    a, b = p.support
    current = cheb_fit(p, a, b)
    series = {}
    for i in range(1, order + 1):
        current = current.times_x().integ(lbnd=a)
        series[i] = current
    return DAntiderivative(p, order, series)


def ibp_residual(F, G, a, b, k, nodes=DEFAULT_NODES):
    """``|LHS - RHS|`` of the D integration-by-parts identity on ``[a, b]``.

    LHS = int d/dt(D^k F) G dt;
    RHS = [sum_{l<k} (-1)^l D^(k-l) F D^l G]_a^b + (-1)^k int F' D^k G dt.
    """
    k = int(k)
    t, w = gauss_legendre(a, b, nodes)

    def d_power(fn, x, j, extra):
        out = fn.jet(x, j + extra)
        for _ in range(j):
            out = out.d()
        return out

    lhs = np.sum(w * d_power(F, t, k, 1).derivative().value * G(t))
    rhs_int = np.sum(w * F.jet(t, 1).derivative().value * d_power(G, t, k, 0).value)
    ends = np.array([a, b], dtype=float)
    boundary = 0.0
    for l in range(k):
        term = d_power(F, ends, k - l, 0).value * d_power(G, ends, l, 0).value
        boundary += (-1) ** l * (term[1] - term[0])
    return float(abs(lhs - (boundary + (-1) ** k * rhs_int)))
