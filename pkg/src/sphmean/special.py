"""Special functions and operator algebra around the backprojection kernel.

Gegenbauer polynomials, Funk-Hecke coefficients, the kernels
``A(r, u) = 1 + r**2 - u**2`` and ``B(r, u) = 4 r**2 - A**2`` with their
D-calculus, the exact expansion of ``B**m`` in powers of ``r**2``, the
Faa di Bruno formula for inner functions with ``D**3 G = 0``, the operators
``L_kappa``, and real spherical harmonics on the 2-sphere.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, gamma, lgamma, pi

import numpy as np
from scipy import special as sp

from .errors import ConstraintError, DomainError, PreconditionError
from .jets import Jet
from .radial import DEFAULT_NODES, gauss_legendre, polynomial

__all__ = [
    "Dimension",
    "BExpansion",
    "LOperator",
    "gegenbauer_eval",
    "gegenbauer_rodrigues",
    "funk_hecke_coefficient",
    "b_power_expand",
    "faa_di_bruno_special",
    "l_operator_apply",
    "harmonic_dimension",
    "spherical_harmonic_eval",
    "kernel_a",
    "kernel_b",
    "kernel_b_fn",
    "kernel_ab_eval",
]


def _sphere_area(dim):
    """Surface area of the unit sphere in R**dim."""
    return 2.0 * pi ** (dim / 2.0) / gamma(dim / 2.0)


@dataclass(frozen=True)
class Dimension:
    """Odd ambient dimension ``n >= 3`` with its derived constants."""

    n: int
    k: int = field(init=False)
    omega_n: float = field(init=False)
    omega_sub: float = field(init=False)

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 3 or n % 2 == 0:
            raise ConstraintError(f"n must be odd and >= 3, got {n!r}")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "k", (int(n) - 3) // 2)
        object.__setattr__(self, "omega_n", _sphere_area(n))
        object.__setattr__(self, "omega_sub", _sphere_area(n - 1))

    @property
    def alpha(self):
        """Gegenbauer index ``(n - 2) / 2``."""
        return (self.n - 2) / 2.0

    @property
    def sphere_ratio(self):
        """``|S^{n-2}| / |S^{n-1}|``, the Funk-Hecke constant of the zonal average."""
        return self.omega_sub / self.omega_n


# Gegenbauer / Funk-Hecke ------------------------------------------------------


def gegenbauer_eval(m, alpha, t):
    """``C_m^alpha(t)`` by the three-term recurrence."""
    t = np.asarray(t, dtype=float)
    prev = np.ones_like(t)
    if m == 0:
        return prev if t.ndim else float(prev)
    cur = 2.0 * alpha * t
    for j in range(1, m):
        prev, cur = cur, (2.0 * (j + alpha) * t * cur - (j + 2.0 * alpha - 1.0) * prev) / (j + 1)
    return cur if t.ndim else float(cur)


def gegenbauer_rodrigues(m, alpha, t):
    """``C_m^alpha(t)`` from the Rodrigues formula, differentiating with jets.

    ``K_m (1 - t^2)^(1/2 - alpha) d^m/dt^m (1 - t^2)^(m + alpha - 1/2)`` with
    ``K_m = (-1)^m Gamma(alpha + 1/2) Gamma(m + 2 alpha) /
    (2^m m! Gamma(2 alpha) Gamma(m + alpha + 1/2))``; valid for ``|t| < 1``.
    """
    t = np.asarray(t, dtype=float)
    x = Jet.variable(t, m)
    w = (1.0 - x * x) ** (m + alpha - 0.5)
    dm = w.coefficients[m]
    k_m = (
        (-1) ** m * gamma(alpha + 0.5) * gamma(m + 2 * alpha)
        / (2**m * factorial(m) * gamma(2 * alpha) * gamma(m + alpha + 0.5))
    )
    out = k_m * (1.0 - t * t) ** (0.5 - alpha) * dm
    return out if t.ndim else float(out)


def funk_hecke_coefficient(F, m, dim, interval=(-1.0, 1.0), nodes=DEFAULT_NODES):
    """Funk-Hecke multiplier ``lambda_m`` of the zonal kernel ``F``.

    ``int_{S^{n-1}} F(<s, eta>) Y_m(s) dS(s) = lambda_m Y_m(eta)`` with
    ``lambda_m = |S^{n-2}| / C_m(1) * int F(t) C_m(t) (1 - t^2)^((n-3)/2) dt``.
    ``interval`` may restrict the integral to a subinterval of ``[-1, 1]``
    containing the support of ``F``.
    """
    lo, hi = max(-1.0, interval[0]), min(1.0, interval[1])
    if hi <= lo:
        return 0.0
    s, w = gauss_legendre(lo, hi, nodes)
    a = dim.alpha
    integrand = F(s) * gegenbauer_eval(m, a, s) * (1.0 - s * s) ** dim.k
    return float(dim.omega_sub / gegenbauer_eval(m, a, 1.0) * np.sum(w * integrand))


# kernels A and B --------------------------------------------------------------


def kernel_a(r, u):
    return 1.0 + r * r - u * u


def kernel_b(r, u):
    a = kernel_a(r, u)
    return 4.0 * r * r - a * a


def kernel_b_fn(r):
    """``u -> B(r, u)`` as a jet provider (a quartic in ``u``)."""
    r = float(r)
    c = 1.0 + r * r
    # 4r^2 - (c - u^2)^2 = (4r^2 - c^2) + 2c u^2 - u^4
    return polynomial([4 * r * r - c * c, 0.0, 2 * c, 0.0, -1.0])


def kernel_ab_eval(r, u, derivative_order=0):
    """``D_u**order B(r, u)``: ``B``, ``4A``, ``-8``, then zero."""
    if derivative_order == 0:
        return kernel_b(r, u)
    if derivative_order == 1:
        return 4.0 * kernel_a(r, u)
    if derivative_order == 2:
        return -8.0 * np.ones_like(np.asarray(u, dtype=float)) if np.ndim(u) else -8.0
    return np.zeros_like(np.asarray(u, dtype=float)) if np.ndim(u) else 0.0


# B**m expansion ------------------------------------------------------------------


def _binom(n, k):
    if n < 0 or k < 0 or k > n:
        return 0
    return comb(n, k)


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def _poly_pow(p, e):
    out = [Fraction(1)]
    for _ in range(e):
        out = _poly_mul(out, p)
    return out


@dataclass(frozen=True)
class BExpansion:
    """``B(r, u)**m = sum_j q_j(u**2) r**(2j)`` with exact rational coefficients.

    ``coefficients[j]`` lists the coefficients of ``q_j`` in ascending powers of
    ``v = u**2``.
    """

    m: int
    coefficients: tuple

    def degree(self, j):
        c = self.coefficients[j]
        for d in range(len(c) - 1, -1, -1):
            if c[d] != 0:
                return d
        return -1

    def leading_coefficient(self, j):
        d = self.degree(j)
        return self.coefficients[j][d] if d >= 0 else Fraction(0)

    def q(self, j, v):
        """Evaluate ``q_j`` at ``v = u**2`` by Horner."""
        v = np.asarray(v, dtype=float)
        out = np.zeros_like(v)
        for c in reversed(self.coefficients[j]):
            out = out * v + float(c)
        return out

    def q_coefficients(self, j):
        return np.array([float(c) for c in self.coefficients[j]])

    def evaluate_exact(self, r, u):
        """Exact rational value of the expansion at scalar ``(r, u)``."""
        r2 = Fraction(r) ** 2
        v = Fraction(u) ** 2
        out = Fraction(0)
        for j in range(2 * self.m, -1, -1):
            q = Fraction(0)
            for c in reversed(self.coefficients[j]):
                q = q * v + c
            out = out * r2 + q
        return out

    def term_magnitude(self, r, u):
        """``sum_j |q_j(u^2)| r^(2j)``: the size of the terms that cancel in ``B^m``."""
        r = np.asarray(r, dtype=float)
        v = np.asarray(u, dtype=float) ** 2
        out = np.zeros(np.broadcast(r, v).shape)
        for j in range(2 * self.m + 1):
            out = out + np.abs(self.q(j, v)) * r ** (2 * j)
        return out

    def evaluate(self, r, u):
        r = np.asarray(r, dtype=float)
        v = np.asarray(u, dtype=float) ** 2
        out = np.zeros(np.broadcast(r, v).shape)
        for j in range(2 * self.m, -1, -1):
            out = out * r * r + self.q(j, v)
        return out


@lru_cache(maxsize=None)
def b_power_expand(m):
    """Coefficients ``q_{j,2m}`` of ``B**m`` from the closed-form double sum."""
    m = int(m)
    if m < 0:
        raise ValueError("m must be non-negative")
    one_plus = [Fraction(1), Fraction(1)]
    one_minus = [Fraction(1), Fraction(-1)]
    coeffs = []
    for alpha in range(2 * m + 1):
        acc = [Fraction(0)] * (2 * m - alpha + 1)
        for i in range(alpha // 2 + 1):
            c = _binom(m, alpha - 2 * i) * _binom(m - alpha + 2 * i, m + i - alpha)
            if c == 0:
                continue
            term = _poly_mul(
                _poly_pow(one_plus, alpha - 2 * i),
                _poly_pow(one_minus, 2 * m + 2 * i - 2 * alpha),
            )
            scale = Fraction(c, 4**i)
            for d, t in enumerate(term):
                acc[d] += scale * t
        sign = Fraction((-1) ** m * (-2) ** alpha)
        coeffs.append(tuple(sign * a for a in acc))
    return BExpansion(m, tuple(coeffs))


# Faa di Bruno special case -------------------------------------------------------


def faa_di_bruno_special(F, G, p, t):
    """``D**p F(G(t))`` for an inner function with ``D**3 G = 0``.

    Uses ``sum_{p/2 <= q <= p} p! / ((2q-p)! (p-q)! 2^(p-q))
    F^(q)(G) (DG)^(2q-p) (D^2 G)^(p-q)``.
    """
    p = int(p)
    t = np.asarray(t, dtype=float)
    gj = G.jet(t, 3)
    g0 = gj.value
    dg = gj.d()
    d2g = dg.d()
    d3g = d2g.d().value
    scale = max(1.0, float(np.max(np.abs(d2g.value))), float(np.max(np.abs(dg.value))))
    if np.max(np.abs(d3g)) > 1e-12 * scale:
        raise PreconditionError("faa_di_bruno_special requires D^3 G = 0")
    fder = F.jet(g0, p).coefficients
    dg, d2g = dg.value, d2g.value
    out = np.zeros_like(g0)
    for q in range((p + 1) // 2, p + 1):
        c = factorial(p) / (factorial(2 * q - p) * factorial(p - q) * 2 ** (p - q))
        out = out + c * fder[q] * dg ** (2 * q - p) * d2g ** (p - q)
    return out if out.ndim else float(out)


# L operators ---------------------------------------------------------------------


@dataclass(frozen=True)
class LOperator:
    """``L_kappa = sum_p c_p (1 - t)^(kappa - p) D^(kappa - p)``.

    ``c_p = (kappa + p)! / ((kappa - p)! p! 2^p)``; exact rationals for
    ``kappa <= 10``, log-gamma floats up to ``kappa = 20``.
    """

    kappa: int
    coefficients: tuple = field(init=False)

    def __post_init__(self):
        kappa = int(self.kappa)
        if kappa < 0 or kappa > 20:
            raise ConstraintError("kappa must lie in 0..20")
        if kappa <= 10:
            c = tuple(
                float(Fraction(factorial(kappa + p), factorial(kappa - p) * factorial(p) * 2**p))
                for p in range(kappa + 1)
            )
        else:
            c = tuple(
                float(np.exp(lgamma(kappa + p + 1) - lgamma(kappa - p + 1) - lgamma(p + 1) - p * np.log(2)))
                for p in range(kappa + 1)
            )
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "coefficients", c)


def l_operator_apply(op, phi, t):
    """``[L_kappa phi](t)`` from the D-derivatives of ``phi`` up to ``kappa``."""
    t = np.asarray(t, dtype=float)
    if np.any(t == 0.0):
        raise DomainError("L operators involve D, which is singular at t = 0")
    kappa = op.kappa
    j = phi.jet(t, kappa)
    d_values = [j.value]
    for _ in range(kappa):
        j = j.d()
        d_values.append(j.value)
    out = np.zeros_like(t)
    for p, c in enumerate(op.coefficients):
        out = out + c * (1.0 - t) ** (kappa - p) * d_values[kappa - p]
    return out if out.ndim else float(out)


# spherical harmonics (n = 3) -----------------------------------------------------


def harmonic_dimension(m, n):
    """Number of linearly independent spherical harmonics of degree ``m`` on S^{n-1}."""
    if m == 0:
        return 1
    return (2 * m + n - 2) * factorial(n + m - 3) // (factorial(m) * factorial(n - 2))


def spherical_harmonic_eval(m, l, theta):
    """Real orthonormal spherical harmonic ``Y_{m,l}`` on the unit 2-sphere.

    ``l = 1..2m+1`` maps to the order ``mu = l - m - 1``; ``theta`` has shape
    ``(..., 3)``.
    """
    if m < 0 or not 1 <= l <= 2 * m + 1:
        raise ConstraintError(f"harmonic index (m={m}, l={l}) out of range")
    theta = np.asarray(theta, dtype=float)
    x, y, z = theta[..., 0], theta[..., 1], theta[..., 2]
    polar = np.arccos(np.clip(z, -1.0, 1.0))
    azimuth = np.arctan2(y, x)
    mu = l - m - 1
    y_c = sp.sph_harm_y(m, abs(mu), polar, azimuth)
    if mu > 0:
        out = np.sqrt(2.0) * (-1) ** mu * y_c.real
    elif mu < 0:
        out = np.sqrt(2.0) * (-1) ** mu * y_c.imag
    else:
        out = y_c.real
    return out if out.ndim else float(out)
