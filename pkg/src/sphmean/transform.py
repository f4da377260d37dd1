"""Spherical mean transform, backprojection, inversion and Riesz potential.

Centers of integration spheres lie on the unit sphere of R**n (n odd) and
functions are supported in the unit ball.  Radial data reduce to
one-dimensional integrals against powers of ``B(r, u) = 4 r^2 - (1 + r^2 - u^2)^2``::

    Mf(t) = |S^{n-2}| / (|S^{n-1}| (2t)^{2k} t) * int_{|1-t|}^{1+t} u f(u) B(t, u)^k du
    Pg(r) = |S^{n-2}| / (|S^{n-1}| (2r)^{2k} r) * int_{1-r}^{1+r}   u g(u) B(r, u)^k du

with ``k = (n - 3) / 2``.  The sinogram of a radial phantom is returned as a
profile with exact jets: expanding ``B^k`` in powers of ``t^2`` turns ``Mf``
into a combination of antiderivatives of ``s q_j(s^2) f(s)``.
"""

from collections import OrderedDict
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial, gamma, pi

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import CalibrationError, ConstraintError, DomainError
from .jets import Jet
from .radial import (
    DEFAULT_MAX_ORDER,
    DEFAULT_NODES,
    SUPPORT_MARGIN,
    RadialProfile,
    SmoothFn1D,
    bump_shape,
    cheb_fit,
    d_apply,
    gauss_legendre,
    monomial,
    polynomial,
)
from .special import (
    Dimension,
    LOperator,
    b_power_expand,
    gegenbauer_eval,
    kernel_b,
    l_operator_apply,
)

__all__ = [
    "EVAL_DOMAIN",
    "QuadratureSpec",
    "RadialBump",
    "RadialPhantom",
    "Bump3D",
    "Sum3DPhantom",
    "SampledRadialPhantom",
    "InversionCalibration",
    "sphere_grid",
    "sinogram_radial",
    "forward_radial",
    "forward_sphere3",
    "backproject",
    "backproject_radial_reduced",
    "closed_form_P_Dn2",
    "filtered_backprojection",
    "fpr_invert_radial",
    "riesz_radial",
    "calibrate_inversion",
    "default_calibration",
    "zonal_harmonic_profile",
]

# radii where backprojections are evaluated; keeps r**-(2k+1) and FD stencils tame
EVAL_DOMAIN = (0.02, 0.98)
LAPLACIAN_STEP = 1e-2
_MULTIPLIER_CACHE = 256


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts for the quadratures used by the transforms.

    ``radial_nodes`` Gauss-Legendre nodes for every 1D integral over a profile
    window; ``polar_nodes`` x ``azimuth_nodes`` for the product rule on S^2
    (Gauss-Legendre in cos(polar), trapezoid in azimuth); ``zonal_nodes`` for the
    Funk-Hecke integrals of translated bumps.
    """

    radial_nodes: int = 2 * DEFAULT_NODES
    polar_nodes: int = 512
    azimuth_nodes: int = 1024
    zonal_nodes: int = 400

    def __post_init__(self):
        for name in ("radial_nodes", "polar_nodes", "azimuth_nodes", "zonal_nodes"):
            if getattr(self, name) <= 0:
                raise ConstraintError(f"{name} must be positive")


DEFAULT_QUAD = QuadratureSpec()


# phantoms ----------------------------------------------------------------------


@dataclass(frozen=True)
class RadialBump:
    """``amplitude * exp(-1/(1 - x^2))``, ``x = (|y| - center) / width``."""

    center: float
    width: float
    amplitude: float = 1.0


class RadialPhantom:
    """Radial function on the unit ball built from shell or centered bumps.

    A bump is centered (``center == 0``) or a shell clear of the origin
    (``center >= width``), so the phantom is smooth as a function on R**n.
    """

    def __init__(self, bumps):
        bumps = tuple(b if isinstance(b, RadialBump) else RadialBump(*b) for b in bumps)
        if not bumps:
            raise ConstraintError("a radial phantom needs at least one bump")
        for b in bumps:
            if b.width <= 0.0:
                raise ConstraintError("bump width must be positive")
            if b.center < 0.0 or (0.0 < b.center < b.width):
                raise ConstraintError(
                    f"bump center {b.center} must be 0 or at least its width {b.width}"
                )
            if b.center + b.width > 1.0 - SUPPORT_MARGIN + 1e-12:
                raise ConstraintError(
                    f"bump reaches radius {b.center + b.width}; support must stay "
                    f"within {1 - SUPPORT_MARGIN}"
                )
        self.bumps = bumps
        self.support_radius = max(b.center + b.width for b in bumps)
        self.inner_radius = min(max(b.center - b.width, 0.0) for b in bumps)
        self.profile = SmoothFn1D(self._jet, DEFAULT_MAX_ORDER)

    def _jet(self, s, order):
        x = Jet.variable(s, order)
        out = Jet.zeros(s, order)
        for b in self.bumps:
            if b.amplitude == 0.0:
                continue
            out = out + bump_shape((x - b.center) / b.width) * b.amplitude
            if b.center > 0.0:
                # mirror image keeps the profile even; it vanishes for s >= 0
                out = out + bump_shape((x + b.center) / b.width) * b.amplitude
        return out

    @property
    def is_zero(self):
        return all(b.amplitude == 0.0 for b in self.bumps)

    def scaled(self, factor):
        return RadialPhantom(
            [RadialBump(b.center, b.width, b.amplitude * factor) for b in self.bumps]
        )

    def radial_values(self, s):
        return self.profile(np.abs(np.asarray(s, dtype=float)))

    def __call__(self, x):
        """Values at points ``x`` of shape ``(..., n)``."""
        return self.radial_values(np.linalg.norm(np.asarray(x, dtype=float), axis=-1))

    def __repr__(self):
        return f"RadialPhantom({list(self.bumps)!r})"


@dataclass(frozen=True)
class Bump3D:
    center: tuple
    width: float
    amplitude: float = 1.0


class Sum3DPhantom:
    """Finite sum of translated radial bumps in the unit ball of R**3."""

    def __init__(self, bumps):
        out = []
        for b in bumps:
            if not isinstance(b, Bump3D):
                b = Bump3D(*b)
            c = tuple(float(v) for v in b.center)
            if len(c) != 3:
                raise ConstraintError("Sum3D bump centers must be 3-vectors")
            if b.width <= 0.0:
                raise ConstraintError("bump width must be positive")
            if np.linalg.norm(c) + b.width > 1.0 - SUPPORT_MARGIN + 1e-12:
                raise ConstraintError("Sum3D bump must stay inside the unit ball")
            out.append(Bump3D(c, float(b.width), float(b.amplitude)))
        if not out:
            raise ConstraintError("a Sum3D phantom needs at least one bump")
        self.bumps = tuple(out)

    @property
    def is_zero(self):
        return all(b.amplitude == 0.0 for b in self.bumps)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for b in self.bumps:
            rho2 = np.sum((x - np.array(b.center)) ** 2, axis=-1) / b.width**2
            inside = 1.0 - rho2 > 1e-3
            out[inside] += b.amplitude * np.exp(-1.0 / (1.0 - rho2[inside]))
        return out

    def __repr__(self):
        return f"Sum3DPhantom({list(self.bumps)!r})"


class SampledRadialPhantom:
    """Radial phantom known by samples on a radius grid (cubic interpolation)."""

    def __init__(self, r, values):
        self.r = np.asarray(r, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self._spline = CubicSpline(self.r, self.values)

    def radial_values(self, s):
        return self._spline(np.abs(np.asarray(s, dtype=float)))

    def __call__(self, x):
        return self.radial_values(np.linalg.norm(np.asarray(x, dtype=float), axis=-1))


# helpers -----------------------------------------------------------------------


class _EvenCumulative:
    """``Phi(u) = int_lo^|u| w(s) ds`` for an odd integrand ``w`` vanishing below ``lo``.

    Values come from a Chebyshev antiderivative on ``[lo, hi]``; derivatives are
    the exact jets of ``w``.  ``Phi`` is even in ``u``.
    """

    def __init__(self, integrand, lo, hi):
        self.integrand = integrand
        self.lo, self.hi = lo, hi
        self._series = cheb_fit(integrand, lo, hi).integ(lbnd=lo)
        self.total = float(self._series(hi))

    def value(self, u):
        a = np.abs(u)
        out = np.where(a >= self.hi, self.total, 0.0)
        mid = (a > self.lo) & (a < self.hi)
        if mid.any():
            out[mid] = self._series(a[mid])
        return out

    def jet(self, u, order):
        u = np.asarray(u, dtype=float)
        a = np.abs(u)
        v = self.value(a)
        if order == 0:
            j = Jet.constant(v, a, 0)
        else:
            j = self.integrand.jet(a, order - 1).integrate(v)
        neg = u < 0
        if neg.any():
            sign = ((-1.0) ** np.arange(order + 1))[:, None]
            j.tc[:, neg] *= sign
        return Jet(u, j.tc)


def _shifted(jet, t, sign):
    """Re-base a jet of ``Phi`` at ``c + sign*t`` as a jet in ``t``."""
    tc = jet.tc
    if sign < 0:
        tc = tc * ((-1.0) ** np.arange(jet.order + 1)).reshape((-1,) + (1,) * t.ndim)
    return Jet(t, tc)


def _check_radius(r):
    r = np.asarray(r, dtype=float)
    lo, hi = EVAL_DOMAIN
    if np.any((r <= lo) | (r >= hi)):
        raise DomainError(f"radius must lie in ({lo}, {hi})")
    return r


def sphere_grid(polar_nodes, azimuth_nodes):
    """Product rule on S^2: points ``(N, 3)`` and weights summing to ``4 pi``."""
    z, wz = np.polynomial.legendre.leggauss(polar_nodes)
    phi = 2.0 * pi * np.arange(azimuth_nodes) / azimuth_nodes
    rho = np.sqrt(1.0 - z * z)
    pts = np.stack(
        [
            np.outer(rho, np.cos(phi)).ravel(),
            np.outer(rho, np.sin(phi)).ravel(),
            np.repeat(z, azimuth_nodes),
        ],
        axis=-1,
    )
    w = np.repeat(wz, azimuth_nodes) * (2.0 * pi / azimuth_nodes)
    return pts, w


# forward transform ---------------------------------------------------------------


class SinogramProfile(RadialProfile):
    """``t -> Mf(p, t)`` for a radial phantom, with exact jets.

    ``Mf(t) = c_n 4^-k sum_j t^(2j-2k-1) [Phi_j(1+t) - Phi_j(1-t)]`` where
    ``Phi_j(u) = int_0^u s q_j(s^2) f(s) ds`` and ``B^k = sum_j q_j(u^2) t^(2j)``.
    """

    def __init__(self, phantom, dim):
        self.phantom = phantom
        self.dim = dim
        k = dim.k
        expansion = b_power_expand(k)
        lo, hi = phantom.inner_radius, phantom.support_radius
        self._phis = []
        for j in range(2 * k + 1):
            q = expansion.q_coefficients(j)
            odd = np.zeros(2 * len(q))
            odd[1::2] = q  # s * q_j(s^2)
            integrand = polynomial(odd) * phantom.profile
            self._phis.append(_EvenCumulative(integrand, lo, hi))
        self._const = dim.sphere_ratio / 4.0**k
        rho = phantom.support_radius
        super().__init__(self._jet_inside, (1.0 - rho, 1.0 + rho), DEFAULT_MAX_ORDER - 1)

    def _jet_inside(self, t, order):
        k = self.dim.k
        tv = Jet.variable(t, order)
        total = Jet.zeros(t, order)
        for j, phi in enumerate(self._phis):
            plus = _shifted(phi.jet(1.0 + t, order), t, +1)
            minus = _shifted(phi.jet(1.0 - t, order), t, -1)
            total = total + tv ** (2 * j - 2 * k - 1) * (plus - minus)
        return total * self._const


def sinogram_radial(f, dim, quad=None):
    """``Mf`` of a radial phantom as a profile in ``t`` (independent of the center)."""
    return SinogramProfile(f, dim)


def forward_radial(f, t, dim, quad=None):
    """``Mf(p, t)`` for a radial phantom ``f`` and any ``|p| = 1``."""
    t = np.asarray(t, dtype=float)
    if np.any((t <= 0.0) | (t >= 2.0)):
        raise DomainError("t must lie in (0, 2)")
    return sinogram_radial(f, dim, quad)(t)


def forward_sphere3(f, p, t, quad=None):
    """``Mf(p, t)`` in R^3 by direct product quadrature over the sphere of radius ``t``."""
    quad = quad or DEFAULT_QUAD
    theta, w = sphere_grid(quad.polar_nodes, quad.azimuth_nodes)
    p = np.asarray(p, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.array([np.sum(w * f(p + ti * theta)) for ti in np.atleast_1d(t)]) / (4.0 * pi)
    return out.reshape(t.shape) if t.ndim else float(out[0])


# backprojection ------------------------------------------------------------------


def backproject_radial_reduced(g, r, dim, quad=None):
    """``Pg(r)`` for data independent of the center, by the reduced 1D integral."""
    quad = quad or DEFAULT_QUAD
    r = _check_radius(r)
    rr = np.atleast_1d(r)
    a, b = g.support
    lo = np.maximum(1.0 - rr, a)
    hi = np.minimum(1.0 + rr, b)
    empty = lo >= hi
    hi = np.where(empty, lo, hi)
    u, w = gauss_legendre(lo, hi, quad.radial_nodes)
    vals = g(u.ravel()).reshape(u.shape)
    k = dim.k
    integrand = u * vals * kernel_b(rr[:, None], u) ** k
    out = dim.sphere_ratio / ((2.0 * rr) ** (2 * k) * rr) * np.sum(w * integrand, axis=-1)
    out[empty] = 0.0
    return out.reshape(r.shape) if r.ndim else float(out[0])


def backproject(F, x, dim, quad=None):
    """``(PF)(x) = |S^{n-1}|^-1 int_{S^{n-1}} F(theta, |x - theta|) dS(theta)``.

    ``F`` is either a :class:`~sphmean.radial.SmoothFn1D` of ``t`` alone (zonal
    data, any odd ``n``, reduced by Funk-Hecke over ``s = <x/|x|, theta>``) or a
    callable ``F(theta, t)`` on ``S^2 x (0, 2)`` (``n = 3``, direct product
    quadrature).
    """
    quad = quad or DEFAULT_QUAD
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != dim.n:
        raise ConstraintError(f"point must have {dim.n} coordinates")
    r = float(np.linalg.norm(x))
    _check_radius(r)
    if isinstance(F, SmoothFn1D):
        # |x - theta|^2 = 1 + r^2 - 2 r s
        s_lo, s_hi = -1.0, 1.0
        support = getattr(F, "support", None)
        if support is not None:
            s_lo = max(s_lo, (1.0 + r * r - support[1] ** 2) / (2.0 * r))
            s_hi = min(s_hi, (1.0 + r * r - support[0] ** 2) / (2.0 * r))
        if s_hi <= s_lo:
            return 0.0
        s, w = gauss_legendre(s_lo, s_hi, quad.radial_nodes)
        vals = F(np.sqrt(1.0 + r * r - 2.0 * r * s))
        return float(dim.sphere_ratio * np.sum(w * vals * (1.0 - s * s) ** dim.k))
    if dim.n != 3:
        raise ConstraintError("non-zonal backprojection is implemented for n = 3 only")
    theta, w = sphere_grid(quad.polar_nodes, quad.azimuth_nodes)
    t = np.linalg.norm(x - theta, axis=-1)
    return float(np.sum(w * F(theta, t)) / (4.0 * pi))


def closed_form_P_Dn2(h, r, dim):
    """``P(D^{n-2} h)(r)`` from boundary values of ``L_k h`` at ``1 +- r``.

    ``P(D^{n-2} h)(r) = c_n (-1)^k k! 2^k r^-(2k+1) ([L_k h](1+r) - [L_k h](1-r))``
    with ``c_n = |S^{n-2}| / |S^{n-1}|``; the constant follows from ``u du = d(u^2/2)``,
    ``D`` acting as ``d/d(u^2/2)``, and ``2k+1`` integrations by parts against
    ``B^k`` whose only surviving boundary terms come from ``D^(k+l) B^k``.
    """
    r = _check_radius(r)
    k = dim.k
    op = LOperator(k)
    const = dim.sphere_ratio * (-1) ** k * factorial(k) * 2**k
    diff = l_operator_apply(op, h, 1.0 + r) - l_operator_apply(op, h, 1.0 - r)
    return const * diff / r ** (2 * k + 1)


# inversion -----------------------------------------------------------------------


@dataclass(frozen=True)
class InversionCalibration:
    """Fitted scalar ``c_hat`` of the inversion formula for dimension ``n``."""

    n: int
    c_hat: float
    residual: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if not np.isfinite(self.c_hat) or self.c_hat == 0.0:
            raise CalibrationError("c_hat must be finite and nonzero")


def filtered_backprojection(g, r, dim, quad=None):
    """``P(D^{n-3} t^{n-2} g)(r)``."""
    filtered = d_apply(monomial(dim.n - 2) * g, dim.n - 3)
    return backproject_radial_reduced(filtered, r, dim, quad)


def _laplacian_uncalibrated(g, r, dim, quad, step=LAPLACIAN_STEP):
    r = np.atleast_1d(np.asarray(r, dtype=float))
    lo, hi = EVAL_DOMAIN
    if np.any(r - step <= lo) or np.any(r + step >= hi):
        raise DomainError(f"Laplacian stencil leaves ({lo}, {hi})")
    h1, h2 = step, step / 2.0
    pts = np.concatenate([r, r - h1, r + h1, r - h2, r + h2])
    G = filtered_backprojection(g, pts, dim, quad).reshape(5, -1)
    g0, m1, p1, m2, p2 = G

    def lap(gm, gp, h):
        return (gp - 2.0 * g0 + gm) / h**2 + (dim.n - 1) / r * (gp - gm) / (2.0 * h)

    return (4.0 * lap(m2, p2, h2) - lap(m1, p1, h1)) / 3.0


def fpr_invert_radial(g, r, dim, calib=None, quad=None):
    """``c(n) * Laplacian(P(D^{n-3} t^{n-2} g))`` at radii ``r``.

    The radial Laplacian ``G'' + (n-1) G'/r`` uses central differences at steps
    ``1e-2`` and ``5e-3`` combined by Richardson extrapolation.
    """
    quad = quad or DEFAULT_QUAD
    if calib is None:
        calib = default_calibration(dim, quad)
    elif calib.n != dim.n:
        raise ConstraintError("calibration dimension does not match")
    scalar = np.ndim(r) == 0
    out = calib.c_hat * _laplacian_uncalibrated(g, r, dim, quad)
    return float(out[0]) if scalar else out


_REFERENCE_PHANTOM = RadialPhantom([RadialBump(0.0, 0.7, 1.0)])
_CALIBRATION_GRID = np.linspace(0.05, 0.95, 91)


def calibrate_inversion(dim, quad=None, phantom=None, grid=None, max_residual=1e-3):
    """Least-squares fit of ``c(n)`` on a radial phantom round trip."""
    quad = quad or DEFAULT_QUAD
    phantom = phantom or _REFERENCE_PHANTOM
    grid = _CALIBRATION_GRID if grid is None else np.asarray(grid, dtype=float)
    lap = _laplacian_uncalibrated(sinogram_radial(phantom, dim, quad), grid, dim, quad)
    f = phantom.radial_values(grid)
    c_hat = float(np.dot(lap, f) / np.dot(lap, lap))
    residual = float(np.linalg.norm(c_hat * lap - f) / np.linalg.norm(f))
    if not residual < max_residual:
        raise CalibrationError(
            f"calibration residual {residual:.3e} exceeds {max_residual:.1e}"
        )
    return InversionCalibration(dim.n, c_hat, residual)


@lru_cache(maxsize=16)
def default_calibration(dim, quad=None):
    return calibrate_inversion(dim, quad)


# Riesz potential ---------------------------------------------------------------------


def riesz_radial(f, r, dim, nodes=DEFAULT_NODES):
    """``I^2 f(r)`` for a radial phantom via the shell mean-value identity.

    ``I^2 f(r) = Gamma((n-2)/2) / (4 pi^(n/2)) |S^{n-1}|
    int_0^1 s^(n-1) f(s) max(r, s)^(2-n) ds``.
    """
    n = dim.n
    r = np.asarray(r, dtype=float)
    rr = np.atleast_1d(r)
    if np.any((rr < 0.0) | (rr >= 1.0)):
        raise DomainError("r must lie in [0, 1)")
    const = gamma((n - 2) / 2.0) / (4.0 * pi ** (n / 2.0)) * dim.omega_n
    lo, hi = f.inner_radius, f.support_radius
    # s < r: kernel r^(2-n); s > r: kernel s^(2-n)
    a1, b1 = np.full_like(rr, lo), np.clip(rr, lo, hi)
    s, w = gauss_legendre(a1, b1, nodes)
    inner = np.sum(w * s ** (n - 1) * f.radial_values(s), axis=-1)
    with np.errstate(divide="ignore"):
        inner = np.where(rr > 0.0, inner * rr ** (2.0 - n), 0.0)
    s, w = gauss_legendre(b1, np.full_like(rr, hi), nodes)
    outer = np.sum(w * s * f.radial_values(s), axis=-1)
    out = const * (inner + outer)
    return out.reshape(r.shape) if r.ndim else float(out[0])


# harmonic coefficients of translated bumps (n = 3) --------------------------------------


class _ZonalBumpMultiplier(RadialProfile):
    """Funk-Hecke multiplier ``lambda_m(t)`` of ``M`` applied to one translated bump.

    For a bump ``a psi(|y - c|)`` the mean over the sphere of radius ``t``
    centered at ``theta`` depends only on ``d = |theta - c|``:
    ``(Phi(d + t) - Phi(|d - t|)) / (2 d t)`` with ``Phi(s) = int_0^s s' psi(s') ds'``.
    Integrating against ``P_m(<theta, c/|c|>)`` over ``theta`` in the variable ``d``
    gives ``lambda_m(t) = pi / (t |c|) int [Phi(d+t) - Phi(|d-t|)] P_m(s(d)) dd``,
    ``s(d) = (1 + |c|^2 - d^2) / (2|c|)``.
    """

    def __init__(self, bump, m, nodes):
        self.m = int(m)
        self.nodes = int(nodes)
        self.c_norm = float(np.linalg.norm(bump.center))
        self.width = bump.width
        w, amp = bump.width, bump.amplitude
        psi = SmoothFn1D(lambda s, q: bump_shape(Jet.variable(s, q) / w) * amp)
        integrand = monomial(1) * psi
        self._phi = _EvenCumulative(integrand, 0.0, w)
        self._cache = OrderedDict()
        lo = max(1.0 - self.c_norm - w, SUPPORT_MARGIN)
        hi = min(1.0 + self.c_norm + w, 2.0 - SUPPORT_MARGIN)
        super().__init__(self._jet_inside, (lo, hi), DEFAULT_MAX_ORDER - 1)

    def _jet_inside(self, t, order):
        # the 2m+1 harmonics of degree m evaluate this multiplier at the same points
        key = (t.shape, t.tobytes(), order)
        if key in self._cache:
            self._cache.move_to_end(key)
            return self._cache[key]
        out = self._compute(t, order)
        self._cache[key] = out
        if len(self._cache) > _MULTIPLIER_CACHE:
            self._cache.popitem(last=False)
        return out

    def _compute(self, t, order):
        c, w = self.c_norm, self.width
        if c < 1e-12:
            if self.m > 0:
                return Jet.zeros(t, order)
            # centered bump: the data are zonal about every axis; lambda_0 = 4 pi M
            plus = _shifted(self._phi.jet(1.0 + t, order), t, +1)
            minus = _shifted(self._phi.jet(1.0 - t, order), t, -1)
            return (plus - minus) / Jet.variable(t, order) * (2.0 * pi)
        lo = np.maximum(t - w, 1.0 - c)
        hi = np.minimum(t + w, 1.0 + c)
        empty = lo >= hi
        hi = np.where(empty, lo, hi)
        d, wd = gauss_legendre(lo, hi, self.nodes)
        tt = np.broadcast_to(t[:, None], d.shape).ravel()
        dd = d.ravel()
        plus = _shifted(self._phi.jet(dd + tt, order), tt, +1)
        minus = _shifted(self._phi.jet(dd - tt, order), tt, -1)
        s = (1.0 + c * c - dd * dd) / (2.0 * c)
        weight = (wd.ravel() * gegenbauer_eval(self.m, 0.5, s)) * (pi / c)
        integrand = (plus - minus) * weight
        tc = integrand.tc.reshape((order + 1,) + d.shape).sum(axis=-1)
        tc[:, empty] = 0.0
        return Jet(t, tc) / Jet.variable(t, order)


@lru_cache(maxsize=64)
def _zonal_multiplier(b, m, nodes):
    return _ZonalBumpMultiplier(b, m, nodes)


def zonal_harmonic_profile(phantom, m, l, quad=None):
    """Coefficient ``g_ml(t) = int_{S^2} Mf(theta, t) Y_ml(theta) dS`` of a Sum3D phantom."""
    from .special import spherical_harmonic_eval

    quad = quad or DEFAULT_QUAD
    terms = []
    for b in phantom.bumps:
        c = np.asarray(b.center)
        c_norm = np.linalg.norm(c)
        axis = c / c_norm if c_norm > 1e-12 else np.array([0.0, 0.0, 1.0])
        y = spherical_harmonic_eval(m, l, axis)
        if c_norm <= 1e-12:
            y = 1.0 / np.sqrt(4.0 * pi) if m == 0 else 0.0
        terms.append((y, _zonal_multiplier(b, m, quad.zonal_nodes)))
    return terms
