"""Acceptance suite: one function per criterion, each returning a :class:`CriterionResult`.

Every criterion draws its random inputs from ``numpy.random.default_rng(seed)``
so a run is reproducible from the seed alone.
"""

import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import analysis as an
from .errors import NotInDPowerImage, NotInKernel
from .jets import Jet
from .radial import (
    bump,
    d_antiderivative,
    d_apply,
    MOMENT_NODES,
    ibp_residual,
    moment,
    abs_moment,
    monomial,
    polynomial,
    SmoothFn1D,
)
from .special import (
    Dimension,
    b_power_expand,
    faa_di_bruno_special,
    funk_hecke_coefficient,
    kernel_b,
    kernel_b_fn,
    spherical_harmonic_eval,
)
from .transform import (
    Bump3D,
    QuadratureSpec,
    RadialPhantom,
    RadialBump,
    Sum3DPhantom,
    backproject,
    backproject_radial_reduced,
    calibrate_inversion,
    closed_form_P_Dn2,
    forward_sphere3,
    fpr_invert_radial,
    sinogram_radial,
    sphere_grid,
)

__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_all"]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        summary = ", ".join(f"{k}={_fmt(v)}" for k, v in self.metrics.items())
        return f"[{status}] criterion {self.number}: {self.title} ({summary}; {self.seconds:.1f}s)"


def _fmt(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.3e}"


_FINE = QuadratureSpec(radial_nodes=6400)


def _random_profile(rng, max_bumps=3):
    """Signed sum of bumps with supports inside [0.1, 1.9]."""
    out = None
    for _ in range(int(rng.integers(1, max_bumps + 1))):
        w = float(rng.uniform(0.15, 0.5))
        c = float(rng.uniform(0.1 + w, 1.9 - w))
        b = bump(c, w, float(rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])))
        out = b if out is None else out + b
    return out


def _random_unit(rng, n=3):
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)


# criteria ------------------------------------------------------------------------------------


def criterion_1(seed=0, pairs=20):
    """Reduced 1D forms of M and P against direct sphere quadrature, n = 3."""
    rng = np.random.default_rng(seed)
    dim = Dimension(3)
    worst_m = worst_p = 0.0
    for i in range(pairs):
        f = an.random_radial_phantom(rng)
        g = sinogram_radial(f, dim)
        scale = g.scale()
        if i % 2 == 0:
            p = _random_unit(rng)
            t = float(rng.uniform(g.support[0], g.support[1]))
            direct = forward_sphere3(f, p, t)
            worst_m = max(worst_m, abs(g(np.array([t]))[0] - direct) / scale)
        else:
            x = _random_unit(rng) * float(rng.uniform(0.1, 0.9))
            reduced = backproject_radial_reduced(g, np.linalg.norm(x), dim)
            direct = backproject(lambda theta, t: g(t), x, dim)
            worst_p = max(worst_p, abs(reduced - direct) / scale)
    return {"forward_rel_err": worst_m, "backprojection_rel_err": worst_p}, \
        max(worst_m, worst_p) < 1e-8


def criterion_2(seed=0, profiles=10, radii=10):
    """Closed form of P(D^{n-2} h) against quadrature, n = 3, 5, 7."""
    rng = np.random.default_rng(seed)
    metrics, ok = {}, True
    for n in (3, 5, 7):
        dim = Dimension(n)
        worst = 0.0
        for _ in range(profiles):
            h = _random_profile(rng)
            r = np.sort(rng.uniform(0.05, 0.95, radii))
            closed = closed_form_P_Dn2(h, r, dim)
            # D^{n-2} of a narrow bump oscillates hard; the oracle gets a fine rule
            quad = backproject_radial_reduced(d_apply(h, n - 2), r, dim, _FINE)
            scale = np.max(np.abs(quad))
            if scale > 0.0:
                worst = max(worst, float(np.max(np.abs(closed - quad)) / scale))
        metrics[f"n{n}_rel_err"] = worst
        ok &= worst < 1e-8
    return metrics, ok


def criterion_3(seed=0, trials=20):
    """Range dichotomy for radial data, n = 3, 5."""
    rng = np.random.default_rng(seed)
    metrics, ok = {}, True
    for n in (3, 5):
        dim = Dimension(n)
        members = [an.range_residual_radial(sinogram_radial(an.random_radial_phantom(rng), dim), dim)
                   for _ in range(trials)]
        outsiders = [an.range_residual_radial(an.random_non_member(rng), dim)
                     for _ in range(trials)]
        wrong = sum(not r.in_range for r in members) + sum(r.in_range for r in outsiders)
        worst_in = max(r.residual_sup for r in members)
        best_out = min(r.residual_sup for r in outsiders)
        metrics[f"n{n}_member_max"] = worst_in
        metrics[f"n{n}_non_member_min"] = best_out
        metrics[f"n{n}_misclassified"] = wrong
        ok &= worst_in < 1e-7 and best_out > 1e-2 and wrong == 0
    return metrics, ok


def criterion_4(seed=0, members=10, decompositions=3, outsiders=10):
    """Kernel characterization, decomposition and moment obstruction, n = 3, 5."""
    rng = np.random.default_rng(seed)
    metrics, ok = {}, True
    for n in (3, 5):
        dim = Dimension(n)
        worst = max(
            an.kernel_residual(an.kernel_member(an.random_radial_phantom(rng), dim), dim).residual_sup
            for _ in range(members)
        )
        rec = 0.0
        for _ in range(decompositions):
            f = an.random_radial_phantom(rng)
            fh = an.kernel_decompose(an.kernel_member(f, dim), dim)
            ft = f.radial_values(fh.r)
            rec = max(rec, float(np.linalg.norm(fh.values - ft) / np.linalg.norm(ft)))
        rejected = 0
        for _ in range(outsiders):
            try:
                an.kernel_decompose(an.random_non_member(rng), dim)
            except NotInKernel:
                rejected += 1
        metrics[f"n{n}_member_max"] = worst
        metrics[f"n{n}_recovery_rel_l2"] = rec
        metrics[f"n{n}_rejected"] = rejected
        ok &= worst < 1e-7 and rec < 1e-3 and rejected == outsiders
    return metrics, ok


def criterion_5(seed=0, trials=3):
    """Generalized kernel family Ker(P D^{2k+1-l}) = Range(D^l t^{n-2} M), n = 3, 5."""
    metrics, ok = {}, True
    for n in (3, 5):
        dim = Dimension(n)
        worst_in, best_out = 0.0, np.inf
        for l in range(n - 1):
            rep = an.generalized_kernel_check(l, dim, trials=trials, seed=seed + l)
            worst_in = max(worst_in, rep.metrics[0].value)
            best_out = min(best_out, rep.metrics[1].value)
            ok &= rep.passed
        metrics[f"n{n}_member_max"] = worst_in
        metrics[f"n{n}_non_member_min"] = best_out
    return metrics, ok


def criterion_6(seed=0, phantoms=4):
    """Inversion round trip after calibration, and calibration consistency, n = 3, 5."""
    rng = np.random.default_rng(seed)
    grid = an.DEFAULT_GRID
    metrics, ok = {}, True
    for n in (3, 5):
        dim = Dimension(n)
        calib = calibrate_inversion(dim)
        others = [calibrate_inversion(dim, phantom=an.random_radial_phantom(rng)).c_hat
                  for _ in range(2)]
        spread = max(abs(c / calib.c_hat - 1.0) for c in others)
        err = 0.0
        for _ in range(phantoms):
            f = an.random_radial_phantom(rng)
            fh = fpr_invert_radial(sinogram_radial(f, dim), grid, dim, calib)
            ft = f.radial_values(grid)
            err = max(err, float(np.linalg.norm(fh - ft) / np.linalg.norm(ft)))
        metrics[f"n{n}_c_hat"] = calib.c_hat
        metrics[f"n{n}_c_hat_spread"] = spread
        metrics[f"n{n}_max_rel_l2"] = err
        ok &= err < 1e-3 and spread < 1e-4
    return metrics, ok


def criterion_7(seed=0, phantoms=3):
    """Counterexample: null filtered backprojection, range failure, null inversion, n = 3, 5."""
    rng = np.random.default_rng(seed)
    metrics, ok = {}, True
    for n in (3, 5):
        dim = Dimension(n)
        null = inv = sep = 0.0
        fail, sep = np.inf, np.inf
        for _ in range(phantoms):
            b = an.build_counterexample(an.random_radial_phantom(rng), dim)
            rep = an.verify_counterexample(b, dim)
            vals = {m.name: m.value for m in rep.metrics}
            null = max(null, vals["null_residual_sup"])
            fail = min(fail, vals["range_residual_sup"])
            inv = max(inv, vals["inversion_sup_rel"])
            sep = min(sep, vals["separation"])
            ok &= rep.passed
        metrics[f"n{n}_null_max"] = null
        metrics[f"n{n}_range_min"] = fail
        metrics[f"n{n}_inversion_max"] = inv
        metrics[f"n{n}_separation_min"] = sep
    return metrics, ok


def criterion_8(seed=0):
    """Riesz proportionality across the grid and across two phantoms, n = 3, 5."""
    rng = np.random.default_rng(seed)
    metrics, ok = {}, True
    for n in (3, 5):
        dim = Dimension(n)
        pair = [an.random_radial_phantom(rng), an.random_radial_phantom(rng)]
        rep = an.riesz_proportionality_check(pair, dim)
        metrics[f"n{n}_kappa"] = rep.details["kappa"]
        metrics[f"n{n}_deviation"] = rep.metrics[0].value
        ok &= rep.passed
    return metrics, ok


def criterion_9(seed=0, instances=10):
    """Lemma suites: Faa di Bruno, integration by parts, moments, B^m expansion, Funk-Hecke."""
    rng = np.random.default_rng(seed)
    metrics = {}

    # Faa di Bruno special case against nested D of the composite
    worst = 0.0
    for _ in range(instances):
        r = float(rng.uniform(0.1, 0.9))
        p = int(rng.integers(1, 7))
        # D^p (B^deg) vanishes identically once p > 2 deg
        deg = int(rng.integers(p // 2 + 1, 8))
        F = monomial(deg)
        G = kernel_b_fn(r)
        u = np.array([float(rng.uniform(1.0 - r, 1.0 + r))])
        composite = SmoothFn1D(lambda t, q: G.jet(t, q) ** deg)
        nested = d_apply(composite, p).jet(u, 0).value[0]
        special = faa_di_bruno_special(F, G, p, u)[0]
        worst = max(worst, abs(special - nested) / max(abs(nested), 1e-300))
    metrics["faa_di_bruno_rel"] = worst
    ok = worst < 1e-9

    # integration by parts
    worst = 0.0
    for _ in range(instances):
        F, G = _random_profile(rng), _random_profile(rng)
        a, b = 0.05, 1.95
        k = int(rng.integers(0, 4))
        scale = max(F.scale(order=k), 1.0) * max(G.scale(order=k), 1.0)
        worst = max(worst, ibp_residual(F, G, a, b, k, nodes=MOMENT_NODES) / scale)
    metrics["ibp_rel"] = worst
    ok &= worst < 1e-10

    # moments vanish exactly on D-power images, and only there
    worst, wrong = 0.0, 0
    for _ in range(instances):
        V = _random_profile(rng)
        order = int(rng.integers(1, 5))
        p = d_apply(V, order)
        for j in range(order):
            worst = max(worst, abs(moment(p, j)) / abs_moment(p, j))
        try:
            d_antiderivative(p, order)
        except NotInDPowerImage:
            wrong += 1
        try:
            d_antiderivative(an.random_non_member(rng), order)
            wrong += 1
        except NotInDPowerImage:
            pass
    metrics["moment_rel"] = worst
    metrics["moment_misclassified"] = wrong
    ok &= worst < 1e-11 and wrong == 0

    # B^m expansion: degree law and pointwise identity
    degree_ok = all(
        b_power_expand(m).degree(j) == 2 * m - j and b_power_expand(m).leading_coefficient(j) != 0
        for m in range(7) for j in range(2 * m + 1)
    )
    exact_ok, float_worst = True, 0.0
    for _ in range(instances * 5):
        m = int(rng.integers(1, 7))
        r, u = float(rng.uniform(0.0, 1.0)), float(rng.uniform(0.0, 2.0))
        e = b_power_expand(m)
        b_exact = 4 * Fraction(r) ** 2 - (1 + Fraction(r) ** 2 - Fraction(u) ** 2) ** 2
        exact_ok &= e.evaluate_exact(r, u) == b_exact**m
        err = abs(e.evaluate(r, u) - kernel_b(r, u) ** m) / e.term_magnitude(r, u)
        float_worst = max(float_worst, float(err))
    metrics["b_degree_law"] = degree_ok
    metrics["b_exact_identity"] = exact_ok
    metrics["b_float_rel"] = float_worst
    ok &= degree_ok and exact_ok and float_worst < 1e-10

    # Funk-Hecke on S^2 against direct product quadrature
    dim = Dimension(3)
    theta, w = sphere_grid(512, 1024)
    worst = 0.0
    for _ in range(instances):
        m = int(rng.integers(0, 5))
        l = int(rng.integers(1, 2 * m + 2))
        c, width = float(rng.uniform(-0.3, 0.3)), float(rng.uniform(0.3, 0.6))
        prof = bump(1.0 + c, width)
        F = lambda s, prof=prof: prof(1.0 + s)  # noqa: E731
        eta = _random_unit(rng)
        lam = funk_hecke_coefficient(F, m, dim)
        direct = np.sum(w * F(theta @ eta) * spherical_harmonic_eval(m, l, theta))
        expected = lam * spherical_harmonic_eval(m, l, eta)
        scale = np.sum(w * np.abs(F(theta @ eta)))
        worst = max(worst, abs(direct - expected) / scale)
    metrics["funk_hecke_rel"] = worst
    ok &= worst < 1e-8
    return metrics, ok


def criterion_10(seed=0):
    """Harmonic range conditions for n = 3 data from a two-bump phantom."""
    rng = np.random.default_rng(seed)
    bumps = []
    for _ in range(2):
        width = float(rng.uniform(0.25, 0.35))
        c = _random_unit(rng) * float(rng.uniform(0.1, 0.9 - width))
        bumps.append(Bump3D(tuple(c), width, float(rng.uniform(0.5, 1.5))))
    g = an.SphereTimeFunction.from_sum3d(Sum3DPhantom(bumps), m_max=an.M_MAX)
    rep = an.range_check_harmonic(g)
    bad = an.SphereTimeFunction({(1, 1): bump(1.0, 0.3)})
    bad_rep = an.range_check_harmonic(bad)
    grc0_failed = bad_rep.details["harmonics"]["m=1,l=1"]["grc0"] == an.FAIL
    metrics = {
        "harmonics": len(g.coefficients),
        "grc_residual_max": rep.residual_sup,
        "non_member_grc0_failed": grc0_failed,
    }
    return metrics, rep.in_range and grc0_failed


CRITERIA = {
    1: ("reduced forms of M and P match sphere quadrature (n=3)", criterion_1),
    2: ("closed form of P(D^{n-2}h) matches quadrature (n=3,5,7)", criterion_2),
    3: ("range characterization dichotomy (n=3,5)", criterion_3),
    4: ("kernel characterization and decomposition (n=3,5)", criterion_4),
    5: ("generalized kernel family (n=3,5)", criterion_5),
    6: ("inversion round trip after calibration (n=3,5)", criterion_6),
    7: ("counterexample to sufficiency (n=3,5)", criterion_7),
    8: ("Riesz proportionality (n=3,5)", criterion_8),
    9: ("lemma suites", criterion_9),
    10: ("harmonic range check (n=3)", criterion_10),
}


def run_criterion(number, seed=0):
    title, fn = CRITERIA[number]
    start = time.perf_counter()
    metrics, passed = fn(seed)
    return CriterionResult(number, title, bool(passed), metrics, time.perf_counter() - start)


def run_all(seed=0, numbers=None):
    return [run_criterion(k, seed) for k in (numbers or sorted(CRITERIA))]
