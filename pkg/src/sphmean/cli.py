"""Command-line front end.

    sphmean <command> [--config FILE] [--n N] [--grid G] [--quad-order Q]
                      [--sphere-order S] [--tol-null T] [--tol-fail T] [--seed S]
                      [--phantom FILE] [--out DIR] [--format csv|json|both]

Exit status: 0 when every verdict passes, 1 on a failed or inconclusive
verdict, 2 on a usage or input error, 3 when output cannot be written.
"""

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import analysis as an
from .errors import SphMeanError
from .special import Dimension
from .transform import (
    Bump3D,
    QuadratureSpec,
    RadialBump,
    RadialPhantom,
    Sum3DPhantom,
    backproject_radial_reduced,
    forward_sphere3,
    fpr_invert_radial,
    sinogram_radial,
)

__all__ = [
    "COMMANDS",
    "ConfigError",
    "RunConfig",
    "parse_config",
    "parse_phantom",
    "emit_report",
    "emit_curve",
    "cmd_run",
    "main",
]

COMMANDS = (
    "forward",
    "backproject",
    "invert",
    "range-test",
    "kernel-test",
    "counterexample",
    "riesz-check",
    "verify-all",
)
FORMATS = ("csv", "json", "both")
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

DEFAULT_PHANTOM = RadialPhantom([RadialBump(0.0, 0.7, 1.0)])


class ConfigError(SphMeanError):
    """Invalid configuration or phantom file; maps to exit status 2."""


@dataclass(frozen=True)
class RunConfig:
    n: int = 3
    grid: int = 200
    quad_order: int = 1600
    sphere_order: int = 512
    tol_null: float = an.TOL_NULL
    tol_fail: float = an.TOL_FAIL
    seed: int = 0
    out: str = "out"
    format: str = "csv"
    phantom: str = ""

    def __post_init__(self):
        if self.n % 2 == 0 or not 3 <= self.n <= 7:
            raise ConfigError(f"n: must be odd and in 3..7, got {self.n}")
        for name in ("grid", "quad_order", "sphere_order"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name}: must be positive")
        if not 0.0 < self.tol_null < self.tol_fail:
            raise ConfigError("tol_null, tol_fail: need 0 < tol_null < tol_fail")
        if self.format not in FORMATS:
            raise ConfigError(f"format: must be one of {', '.join(FORMATS)}")

    @property
    def dim(self):
        return Dimension(self.n)

    @property
    def quad(self):
        return QuadratureSpec(
            radial_nodes=self.quad_order,
            polar_nodes=self.sphere_order,
            azimuth_nodes=2 * self.sphere_order,
        )

    @property
    def radii(self):
        return np.linspace(0.05, 0.95, self.grid)

    def to_dict(self):
        return asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CASTS = {"int": int, "float": float, "str": str, int: int, float: float, str: str}


def _coerce(name, value):
    cast = _CASTS[_FIELD_TYPES[name]]
    if cast is int and isinstance(value, float) and not value.is_integer():
        raise ConfigError(f"{name}: expected an integer, got {value!r}")
    if cast in (int, float) and isinstance(value, bool):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    try:
        return cast(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot interpret {value!r}") from None


def parse_config(path=None, overrides=None):
    """``RunConfig`` from an optional JSON file, then explicit overrides."""
    values = {}
    if path:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        try:
            loaded = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be an object")
        values.update(loaded)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = sorted(set(values) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
    return RunConfig(**{k: _coerce(k, v) for k, v in values.items()})


def _bump_field(bump, i, key, kind):
    if key not in bump:
        raise ConfigError(f"bumps[{i}].{key}: missing")
    value = bump[key]
    if kind == "vector":
        if not (isinstance(value, list) and len(value) == 3
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
            raise ConfigError(f"bumps[{i}].{key}: expected a list of 3 numbers")
        return tuple(float(v) for v in value)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"bumps[{i}].{key}: expected a number")
    return float(value)


def parse_phantom(source):
    """Radial or Sum3D phantom from a JSON document (text or path)."""
    text = source
    if not str(source).lstrip().startswith("{"):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read phantom {source}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"phantom:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("phantom: top level must be an object")
    kind = doc.get("kind")
    if kind not in ("radial", "sum3d"):
        raise ConfigError('kind: must be "radial" or "sum3d"')
    bumps = doc.get("bumps")
    if not isinstance(bumps, list) or not bumps:
        raise ConfigError("bumps: expected a non-empty list")
    parsed = []
    for i, b in enumerate(bumps):
        if not isinstance(b, dict):
            raise ConfigError(f"bumps[{i}]: expected an object")
        center = _bump_field(b, i, "center", "scalar" if kind == "radial" else "vector")
        width = _bump_field(b, i, "width", "scalar")
        amplitude = _bump_field(b, i, "amplitude", "scalar") if "amplitude" in b else 1.0
        parsed.append((center, width, amplitude))
    try:
        if kind == "radial":
            return RadialPhantom([RadialBump(*p) for p in parsed])
        return Sum3DPhantom([Bump3D(*p) for p in parsed])
    except SphMeanError as exc:
        raise ConfigError(f"bumps: {exc}") from None


# output ------------------------------------------------------------------------------


def _num(v):
    return repr(float(v))


def _rows(report):
    return [
        {"metric": m.name, "value": float(m.value), "threshold": float(m.threshold),
         "verdict": m.verdict}
        for m in report.metrics
    ]


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_num(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _json_text(obj):
    return json.dumps(obj, indent=2) + "\n"


def emit_report(report, fmt, stem):
    """Write ``stem.csv`` and/or ``stem.json`` with one row per metric."""
    rows = _rows(report)
    stem = Path(stem)
    written = []
    if fmt in ("csv", "both"):
        text = _csv_text(("metric", "value", "threshold", "verdict"),
                         [(r["metric"], r["value"], r["threshold"], r["verdict"]) for r in rows])
        _write(stem.with_suffix(".csv"), text)
        written.append(stem.with_suffix(".csv"))
    if fmt in ("json", "both"):
        _write(stem.with_suffix(".json"), _json_text(rows))
        written.append(stem.with_suffix(".json"))
    return written


def emit_curve(r, values, fmt, stem):
    """Write a sampled curve as ``r,value`` rows."""
    r = np.asarray(r, dtype=float).ravel()
    values = np.asarray(values, dtype=float).ravel()
    stem = Path(stem)
    written = []
    if fmt in ("csv", "both"):
        _write(stem.with_suffix(".csv"), _csv_text(("r", "value"), zip(map(float, r), map(float, values))))
        written.append(stem.with_suffix(".csv"))
    if fmt in ("json", "both"):
        rows = [{"r": float(a), "value": float(b)} for a, b in zip(r, values)]
        _write(stem.with_suffix(".json"), _json_text(rows))
        written.append(stem.with_suffix(".json"))
    return written


class _Suite:
    """Report adapter for the acceptance suite: one metric per criterion value."""

    def __init__(self, results):
        self.metrics = []
        for res in results:
            verdict = an.PASS if res.passed else an.FAIL
            for name, value in res.metrics.items():
                self.metrics.append(_Row(f"criterion_{res.number}.{name}", float(value),
                                         float("nan"), verdict))

    @property
    def passed(self):
        return all(m.verdict == an.PASS for m in self.metrics)


@dataclass(frozen=True)
class _Row:
    name: str
    value: float
    threshold: float
    verdict: str


# commands ------------------------------------------------------------------------------


def _load_phantom(config):
    ph = parse_phantom(config.phantom) if config.phantom else DEFAULT_PHANTOM
    if isinstance(ph, Sum3DPhantom) and config.n != 3:
        raise ConfigError("phantom: sum3d phantoms require n = 3")
    return ph


def _radial_only(ph, command):
    if not isinstance(ph, RadialPhantom):
        raise ConfigError(f"{command}: needs a radial phantom")
    return ph


def cmd_run(command, config, stdout=None):
    """Run one command; returns ``(exit_code, written_paths)``."""
    stdout = stdout or sys.stdout
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    dim, quad, out = config.dim, config.quad, Path(config.out)
    stem = out / command.replace("-", "_")
    curve = report = None

    if command == "verify-all":
        from .verification import run_all

        results = run_all(seed=config.seed)
        for res in results:
            print(res.line(), file=stdout)
        report = _Suite(results)
    else:
        ph = _load_phantom(config)
        if command == "forward":
            t = np.linspace(0.02, 1.98, config.grid)
            if isinstance(ph, RadialPhantom):
                curve = (t, sinogram_radial(ph, dim, quad)(t))
            else:
                curve = (t, forward_sphere3(ph, np.array([0.0, 0.0, 1.0]), t, quad))
        elif command == "backproject":
            g = sinogram_radial(_radial_only(ph, command), dim, quad)
            curve = (config.radii, backproject_radial_reduced(g, config.radii, dim, quad))
        elif command == "invert":
            ph = _radial_only(ph, command)
            r = config.radii
            fh = fpr_invert_radial(sinogram_radial(ph, dim, quad), r, dim, quad=quad)
            ft = ph.radial_values(r)
            err = float(np.linalg.norm(fh - ft) / np.linalg.norm(ft))
            curve = (r, fh)
            report = an.CheckReport(name="invert",
                                    metrics=[an.Metric("relative_l2_error", err, 1e-3)])
        elif command == "range-test":
            if isinstance(ph, Sum3DPhantom):
                g = an.SphereTimeFunction.from_sum3d(ph, an.M_MAX, quad)
                report = an.range_check_harmonic(g, dim, tol=config.tol_null)
            else:
                report = an.range_residual_radial(sinogram_radial(ph, dim, quad), dim,
                                                  config.radii, config.tol_null, quad)
        elif command == "kernel-test":
            g = an.kernel_member(_radial_only(ph, command), dim)
            report = an.kernel_residual(g, dim, config.radii, config.tol_null, quad)
        elif command == "counterexample":
            b = an.build_counterexample(_radial_only(ph, command), dim, quad)
            report = an.verify_counterexample(b, dim, config.radii, config.tol_null,
                                              config.tol_fail, quad=quad)
        elif command == "riesz-check":
            report = an.riesz_proportionality_check(_radial_only(ph, command), dim,
                                                    config.radii, quad=quad)

    written = [out / "config.json"]
    _write(written[0], _json_text(config.to_dict()))
    if curve is not None:
        written += emit_curve(curve[0], curve[1], config.format, str(stem) + "_curve")
    if report is not None:
        written += emit_report(report, config.format, str(stem) + "_report")
        for m in report.metrics:
            print(f"{m.name}: {m.value!r} (threshold {m.threshold!r}) {m.verdict}", file=stdout)
    code = EXIT_OK if report is None or report.passed else EXIT_FAIL
    return code, written


def _parser():
    p = argparse.ArgumentParser(
        prog="sphmean",
        description="Spherical mean transform with centers on the unit sphere (odd n).",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with RunConfig fields")
    p.add_argument("--n", type=int)
    p.add_argument("--grid", type=int, help="number of radii in [0.05, 0.95]")
    p.add_argument("--quad-order", type=int, dest="quad_order",
                   help="Gauss-Legendre nodes for radial integrals")
    p.add_argument("--sphere-order", type=int, dest="sphere_order",
                   help="polar nodes of the S^2 product rule (azimuth gets twice as many)")
    p.add_argument("--tol-null", type=float, dest="tol_null")
    p.add_argument("--tol-fail", type=float, dest="tol_fail")
    p.add_argument("--seed", type=int)
    p.add_argument("--phantom", help="phantom JSON file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=FORMATS)
    return p


def main(argv=None):
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        config = parse_config(args.config, overrides)
        code, _ = cmd_run(args.command, config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    except SphMeanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return code


if __name__ == "__main__":
    sys.exit(main())
