"""Range, kernel and counterexample checks for the spherical mean transform.

Every check returns a report with named metrics.  A metric compares one
normalized residual against a threshold; ``report.passed`` is true when every
metric meets its expectation.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DecompositionError,
    DegenerateInputError,
    NotInDPowerImage,
    NotInKernel,
    PreconditionError,
)
from .jets import Jet
from .radial import (
    DEFAULT_MAX_ORDER,
    RadialProfile,
    SmoothFn1D,
    bump,
    d_antiderivative,
    d_apply,
    monomial,
)
from .special import (
    Dimension,
    LOperator,
    l_operator_apply,
    spherical_harmonic_eval,
)
from .transform import (
    DEFAULT_QUAD,
    QuadratureSpec,
    RadialBump,
    RadialPhantom,
    SampledRadialPhantom,
    backproject_radial_reduced,
    closed_form_P_Dn2,
    filtered_backprojection,
    fpr_invert_radial,
    riesz_radial,
    sinogram_radial,
    zonal_harmonic_profile,
)

__all__ = [
    "IN_RANGE",
    "NOT_IN_RANGE",
    "INCONCLUSIVE",
    "TOL_NULL",
    "TOL_FAIL",
    "GRC_DELTA",
    "M_MAX",
    "DEFAULT_GRID",
    "Metric",
    "RangeReport",
    "CheckReport",
    "SphereTimeFunction",
    "CounterexampleBundle",
    "random_radial_phantom",
    "random_non_member",
    "range_residual_radial",
    "range_check_harmonic",
    "kernel_residual",
    "kernel_decompose",
    "generalized_kernel_check",
    "build_counterexample",
    "verify_counterexample",
    "riesz_proportionality_check",
]

IN_RANGE = "in-range"
NOT_IN_RANGE = "not-in-range"
INCONCLUSIVE = "inconclusive"
PASS, FAIL = "pass", "fail"

TOL_NULL = 1e-7
TOL_FAIL = 1e-2
TOL_INVERSION = 1e-6
GRC_DELTA = 0.02
M_MAX = 4
DEFAULT_GRID = np.linspace(0.05, 0.95, 200)

# a harmonic whose data are this small relative to the largest one counts as absent
_NEGLIGIBLE = 1e-12
_SCALE_POINTS = 40
_SCALE_QUAD = QuadratureSpec(radial_nodes=400)


@dataclass(frozen=True)
class Metric:
    """One residual and its threshold.

    ``below`` says whether passing means ``value < threshold`` (a null test)
    or ``value > threshold`` (a separation test).
    """

    name: str
    value: float
    threshold: float
    below: bool = True

    @property
    def verdict(self):
        if not np.isfinite(self.value):
            return INCONCLUSIVE
        ok = self.value < self.threshold if self.below else self.value > self.threshold
        return PASS if ok else FAIL


@dataclass
class _Report:
    metrics: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(m.verdict == PASS for m in self.metrics)


@dataclass
class RangeReport(_Report):
    """Membership verdict from a normalized residual; ``in-range`` iff ``residual_sup < threshold``."""

    residual_sup: float = 0.0
    residual_l2: float = 0.0
    threshold: float = TOL_NULL
    grid: str = ""

    @property
    def verdict(self):
        if not np.isfinite(self.residual_sup):
            return INCONCLUSIVE
        return IN_RANGE if self.residual_sup < self.threshold else NOT_IN_RANGE

    @property
    def in_range(self):
        return self.verdict == IN_RANGE


@dataclass
class CheckReport(_Report):
    """Compound check: passes when every metric passes."""

    name: str = ""
    grid: str = ""

    @property
    def verdict(self):
        verdicts = {m.verdict for m in self.metrics}
        if INCONCLUSIVE in verdicts or not verdicts:
            return INCONCLUSIVE
        return PASS if verdicts == {PASS} else FAIL


def describe_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        return "empty"
    return f"{grid.size} radii in [{grid.min():.6g}, {grid.max():.6g}]"


def _sup_l2(values, scale):
    values = np.asarray(values, dtype=float)
    if scale == 0.0:
        return 0.0, 0.0
    return (
        float(np.max(np.abs(values)) / scale),
        float(np.sqrt(np.mean(values * values)) / scale),
    )


def _abs_profile(u):
    return RadialProfile(
        lambda t, q: Jet.constant(np.abs(u.jet(t, 0).value), t, 0), u.support, 0
    )


def _p_scale(u, grid, dim, quad=None):
    """``sup_r P(|u|)(r)``: the size of ``u`` as seen by the backprojection.

    ``|Pu| <= P|u|``, so residuals normalized this way measure the fraction of
    ``u`` that survives cancellation and lie in ``[0, 1]``.
    """
    if _profile_scale(u) == 0.0:
        return 0.0
    # only a magnitude is needed: a coarse grid and rule are plenty
    coarse = np.asarray(grid, dtype=float)[:: max(1, len(grid) // _SCALE_POINTS)]
    values = backproject_radial_reduced(_abs_profile(u), coarse, dim, _SCALE_QUAD)
    return float(np.max(values))


def _profile_scale(p, order=0):
    if not isinstance(p, RadialProfile):
        raise PreconditionError("a compactly supported profile is required")
    return p.scale(order=order)


# random test inputs -------------------------------------------------------------------


def random_radial_phantom(rng, max_bumps=3):
    """Random radial phantom: centered bumps and shells with amplitudes in +-[0.5, 1.5]."""
    bumps = []
    for _ in range(int(rng.integers(1, max_bumps + 1))):
        amp = float(rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0]))
        if rng.random() < 0.4:
            bumps.append(RadialBump(0.0, float(rng.uniform(0.3, 0.9)), amp))
        else:
            w = float(rng.uniform(0.15, 0.3))
            c = float(rng.uniform(w, 0.95 - w))
            bumps.append(RadialBump(c, w, amp))
    return RadialPhantom(bumps)


def random_non_member(rng):
    """Positive bump in t off-center from t = 1, so every obstruction is nonzero."""
    side = rng.choice([-1.0, 1.0])
    c = 1.0 + side * float(rng.uniform(0.15, 0.5))
    w = float(rng.uniform(0.1, min(c - 0.05, 1.95 - c, 0.4)))
    return bump(c, w, float(rng.uniform(0.5, 1.5)))


# harmonic data (n = 3) -------------------------------------------------------------------


class SphereTimeFunction:
    """``g(theta, t) = sum g_ml(t) Y_ml(theta)`` on ``S^2 x (0, 2)``.

    ``coefficients`` maps ``(m, l)``, ``l = 1..2m+1``, to a profile in ``t``.
    ``direct`` optionally evaluates ``g`` without truncation (for quadrature
    cross-checks).
    """

    def __init__(self, coefficients, direct=None):
        self.coefficients = dict(coefficients)
        for (m, l), prof in self.coefficients.items():
            if m < 0 or not 1 <= l <= 2 * m + 1:
                raise PreconditionError(f"harmonic index (m={m}, l={l}) out of range")
            if not isinstance(prof, SmoothFn1D):
                raise PreconditionError("harmonic coefficients must be jet providers")
        self.direct = direct
        self.m_max = max((m for m, _ in self.coefficients), default=0)

    @classmethod
    def from_sum3d(cls, phantom, m_max=M_MAX, quad=None):
        """Harmonic expansion of ``M f`` for a Sum3D phantom, truncated at ``m_max``."""
        from .transform import forward_sphere3

        quad = quad or DEFAULT_QUAD
        coefficients = {}
        for m in range(m_max + 1):
            for l in range(1, 2 * m + 2):
                terms = zonal_harmonic_profile(phantom, m, l, quad)
                terms = [(y, prof) for y, prof in terms if y != 0.0]
                if not terms:
                    continue
                coefficients[(m, l)] = _linear_combination(terms)

        def direct(theta, t):
            theta = np.asarray(theta, dtype=float)
            return np.array(
                [forward_sphere3(phantom, th, float(tt), quad) for th, tt in
                 zip(theta.reshape(-1, 3), np.broadcast_to(t, theta.shape[:-1]).ravel())]
            ).reshape(theta.shape[:-1])

        return cls(coefficients, direct)

    def __call__(self, theta, t):
        """Truncated expansion at ``theta`` (``(..., 3)``) and ``t`` (broadcast)."""
        theta = np.asarray(theta, dtype=float)
        t = np.broadcast_to(np.asarray(t, dtype=float), theta.shape[:-1])
        out = np.zeros(theta.shape[:-1])
        for (m, l), prof in self.coefficients.items():
            out += spherical_harmonic_eval(m, l, theta) * prof(t.ravel()).reshape(t.shape)
        return out


def _linear_combination(terms):
    weights = [float(y) for y, _ in terms]
    profs = [p for _, p in terms]
    lo = min(p.support[0] for p in profs)
    hi = max(p.support[1] for p in profs)

    def evaluator(t, order):
        out = Jet.zeros(t, order)
        for y, p in zip(weights, profs):
            out = out + p.jet(t, order) * y
        return out

    return RadialProfile(evaluator, (lo, hi), min(p.max_order for p in profs))


# range tests -------------------------------------------------------------------------------


def range_residual_radial(g, dim, grid=None, threshold=TOL_NULL, quad=None):
    """Residual of ``P(D^{n-2} t^{n-2} g)`` through its closed form.

    Normalized by ``sup P(|D^{n-2} t^{n-2} g|)``; ``g`` lies in the range of
    ``M`` exactly when the residual vanishes.
    """
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float)
    h = monomial(dim.n - 2) * g
    scale = _p_scale(d_apply(h, dim.n - 2), grid, dim, quad)
    values = closed_form_P_Dn2(h, grid, dim) if scale > 0.0 else np.zeros_like(grid)
    sup, l2 = _sup_l2(values, scale)
    report = RangeReport(residual_sup=sup, residual_l2=l2, threshold=threshold,
                         grid=describe_grid(grid))
    report.metrics.append(Metric("range_residual_sup", sup, threshold))
    report.details["scale"] = scale
    return report


def _grc_residual(phi, kappa, delta):
    t = np.linspace(delta, 1.0 - delta, 197)
    op = LOperator(kappa)
    lo = l_operator_apply(op, phi, 1.0 - t)
    hi = l_operator_apply(op, phi, 1.0 + t)
    scale = max(np.max(np.abs(lo)), np.max(np.abs(hi)))
    return (float(np.max(np.abs(lo - hi)) / scale) if scale > 0.0 else 0.0), t


def range_check_harmonic(g, dim=None, tol=TOL_NULL, delta=GRC_DELTA):
    """Per-harmonic range conditions for ``n = 3`` data ``g(theta, t)``.

    For each ``(m, l)``: ``h = t g_ml`` must be ``D^m phi`` of a compactly
    supported ``phi`` (moments ``j < m`` of ``h`` vanish), and
    ``[L_m phi](1 - t) = [L_m phi](1 + t)`` on ``[delta, 1 - delta]``.
    """
    dim = dim or Dimension(3)
    if dim.n != 3:
        raise PreconditionError("the harmonic range check is implemented for n = 3")
    scales = {key: _profile_scale(prof) for key, prof in g.coefficients.items()}
    top = max(scales.values(), default=0.0)
    per = {}
    worst = 0.0
    metrics = []
    for (m, l), prof in sorted(g.coefficients.items()):
        key = f"m={m},l={l}"
        if scales[(m, l)] <= _NEGLIGIBLE * top:
            per[key] = {"grc0": PASS, "grc": 0.0}
            continue
        h = monomial(1) * prof
        try:
            phi = d_antiderivative(h, m)
        except NotInDPowerImage as exc:
            per[key] = {"grc0": FAIL, "moment_j": exc.j, "grc": float("inf")}
            metrics.append(Metric(f"grc0[{key}]", 1.0, 0.5))
            worst = float("inf")
            continue
        res, _ = _grc_residual(phi, m + dim.k, delta)
        per[key] = {"grc0": PASS, "grc": res}
        worst = max(worst, res)
    metrics.insert(0, Metric("grc_residual_sup", worst if np.isfinite(worst) else 1.0, tol))
    report = RangeReport(
        residual_sup=worst if np.isfinite(worst) else 1.0,
        residual_l2=worst if np.isfinite(worst) else 1.0,
        threshold=tol,
        grid=f"t in [{delta}, {1 - delta}]",
        metrics=metrics,
        details={"harmonics": per, "m_max": g.m_max},
    )
    return report


# kernel --------------------------------------------------------------------------------------


def kernel_residual(g, dim, grid=None, threshold=TOL_NULL, quad=None):
    """``sup |Pg| / sup P|g|`` over the grid; small exactly when ``g`` is in Ker(P)."""
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float)
    scale = _p_scale(g, grid, dim, quad)
    values = (backproject_radial_reduced(g, grid, dim, quad) if scale > 0.0
              else np.zeros_like(grid))
    sup, l2 = _sup_l2(values, scale)
    report = RangeReport(residual_sup=sup, residual_l2=l2, threshold=threshold,
                         grid=describe_grid(grid))
    report.metrics.append(Metric("kernel_residual_sup", sup, threshold))
    report.details["scale"] = scale
    return report


def kernel_member(f, dim):
    """``D^{n-2} t^{n-2} M f`` for a radial phantom."""
    return d_apply(monomial(dim.n - 2) * sinogram_radial(f, dim), dim.n - 2)


def kernel_decompose(g, dim, tol=TOL_NULL, grid=None, quad=None):
    """Radial ``f`` with ``D^{n-2} t^{n-2} M f = g`` for ``g`` in Ker(P).

    Moments ``j = 0..n-3`` of ``g`` must vanish; then ``h = D^{-(n-2)} g`` is
    compactly supported, ``h / t^{n-2}`` must pass the range test (so it is
    ``M f``), and ``f`` is recovered by the inversion formula on ``grid``.
    """
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float)
    if _profile_scale(g) == 0.0:
        return SampledRadialPhantom(grid, np.zeros_like(grid))
    try:
        h = d_antiderivative(g, dim.n - 2)
    except NotInDPowerImage as exc:
        raise NotInKernel(str(exc)) from exc
    data = h / monomial(dim.n - 2)
    report = range_residual_radial(data, dim, threshold=tol, quad=quad)
    if not report.in_range:
        raise DecompositionError(
            f"D^-(n-2) g / t^(n-2) fails the range test: residual "
            f"{report.residual_sup:.3e} >= {tol:.1e}"
        )
    values = fpr_invert_radial(data, grid, dim, quad=quad)
    return SampledRadialPhantom(grid, values)


def generalized_kernel_check(l, dim, trials=5, seed=0, tol=TOL_NULL, tol_fail=TOL_FAIL,
                             grid=None, quad=None):
    """Members of Range(D^l t^{n-2} M) lie in Ker(P D^{n-2-l}); a non-member does not."""
    l = int(l)
    top = dim.n - 2
    if not 0 <= l <= top:
        raise PreconditionError(f"l must lie in 0..{top}")
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float)
    rng = np.random.default_rng(seed)

    def residual(g):
        filtered = d_apply(g, top - l)
        scale = _p_scale(filtered, grid, dim, quad)
        values = backproject_radial_reduced(filtered, grid, dim, quad)
        return _sup_l2(values, scale)[0]

    member = 0.0
    for _ in range(int(trials)):
        f = random_radial_phantom(rng)
        g = d_apply(monomial(dim.n - 2) * sinogram_radial(f, dim), l)
        member = max(member, residual(g))
    outsider = residual(random_non_member(rng))
    return CheckReport(
        name=f"generalized kernel l={l}",
        grid=describe_grid(grid),
        metrics=[
            Metric("member_residual_sup", member, tol),
            Metric("non_member_residual_sup", outsider, tol_fail, below=False),
        ],
        details={"l": l, "trials": int(trials)},
    )


# counterexample -------------------------------------------------------------------------------


@dataclass
class CounterexampleBundle:
    """``g_tilde = M f`` and ``g = (n-2) g_tilde / t^2 + g_tilde' / t``."""

    phantom: RadialPhantom
    g_tilde: RadialProfile
    g: RadialProfile
    n: int


def build_counterexample(f, dim, quad=None):
    """Data ``g`` with ``P(D^{n-3} t^{n-2} g) = 0`` that is not a spherical mean.

    ``t^{n-2} g = D(t^{n-2} g_tilde)``, so ``D^{n-3} t^{n-2} g`` is in Ker(P).
    """
    if f.is_zero:
        raise DegenerateInputError("the counterexample needs a nonzero phantom")
    g_tilde = sinogram_radial(f, dim, quad)
    n = dim.n

    def evaluator(t, order):
        j = g_tilde.jet(t, order + 1)
        tv = Jet.variable(t, order)
        return j.truncate(order) * (n - 2) / (tv * tv) + j.d()

    g = RadialProfile(evaluator, g_tilde.support, g_tilde.max_order - 1)
    return CounterexampleBundle(f, g_tilde, g, n)


def verify_counterexample(b, dim, grid=None, tol_null=TOL_NULL, tol_fail=TOL_FAIL,
                          tol_inversion=TOL_INVERSION, quad=None):
    """(i) the filtered backprojection of ``g`` vanishes, (ii) ``g`` fails the
    range test, (iii) the inversion formula maps ``g`` to (numerically) zero."""
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float)
    filtered = d_apply(monomial(dim.n - 2) * b.g, dim.n - 3)
    g_scale = _profile_scale(b.g)
    f_scale = float(np.max(np.abs(b.phantom.radial_values(np.linspace(0, 1, 2001)))))
    if g_scale == 0.0 or f_scale == 0.0:
        nan = float("nan")
        return CheckReport(
            name="counterexample", grid=describe_grid(grid),
            metrics=[Metric("g_sup", 0.0, 0.0, below=False),
                     Metric("null_residual_sup", nan, tol_null)],
            details={"reason": "g is identically zero"},
        )
    null = _sup_l2(backproject_radial_reduced(filtered, grid, dim, quad),
                   _p_scale(filtered, grid, dim, quad))[0]
    rng_res = range_residual_radial(b.g, dim, grid, quad=quad).residual_sup
    inv_grid = grid[(grid >= 0.05) & (grid <= 0.95)]
    inv = float(np.max(np.abs(fpr_invert_radial(b.g, inv_grid, dim, quad=quad)))) / f_scale
    separation = rng_res / null if null > 0.0 else float("inf")
    return CheckReport(
        name="counterexample",
        grid=describe_grid(grid),
        metrics=[
            Metric("null_residual_sup", null, tol_null),
            Metric("range_residual_sup", rng_res, tol_fail, below=False),
            Metric("inversion_sup_rel", inv, tol_inversion),
            Metric("separation", separation, 1e4, below=False),
            Metric("g_sup", g_scale, 0.0, below=False),
        ],
        details={"g_tilde_sup": _profile_scale(b.g_tilde)},
    )


# Riesz potential --------------------------------------------------------------------------------


def riesz_proportionality_check(f, dim, grid=None, tol=1e-3, quad=None):
    """``P(D^{n-3} t^{n-2} M f) / I^2 f`` is one constant across the grid.

    ``f`` may be a single phantom or a sequence; with several, the ratios of all
    phantoms are pooled, so the constant must also agree between them.
    """
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float)
    phantoms = list(f) if isinstance(f, (list, tuple)) else [f]
    ratios, kappas = [], []
    for ph in phantoms:
        riesz = riesz_radial(ph, grid, dim)
        if ph.is_zero or np.max(np.abs(riesz)) == 0.0:
            return CheckReport(
                name="riesz", grid=describe_grid(grid),
                metrics=[Metric("ratio_deviation", float("nan"), tol)],
                details={"reason": "I^2 f vanishes on the grid"},
            )
        lhs = filtered_backprojection(sinogram_radial(ph, dim, quad), grid, dim, quad)
        r = lhs / riesz
        ratios.append(r)
        kappas.append(float(np.median(r)))
    pooled = np.concatenate(ratios)
    kappa = float(np.median(pooled))
    deviation = float(np.max(np.abs(pooled / kappa - 1.0)))
    return CheckReport(
        name="riesz",
        grid=describe_grid(grid),
        metrics=[Metric("ratio_deviation", deviation, tol)],
        details={"kappa": kappa, "per_phantom_kappa": kappas},
    )
