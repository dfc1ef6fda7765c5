"""Command-line front end.

Settings are resolved in the order: built-in defaults, ``key=value`` config
file, ``H2VDW_*`` environment variables, command-line flags (last wins).

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import perturbation, sos, validation
from .angular import Channel, Surd, gc_surd
from .arithmetic import PRECISIONS
from .radial import RadialFunction, sample_grid, sample_over_rr

__all__ = ["RunConfig", "main", "build_parser", "resolve_config", "EXIT_OK", "EXIT_VALIDATION",
           "EXIT_USAGE", "EXIT_NUMERICAL"]

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3
ENV_PREFIX = "H2VDW_"
COMMANDS = ("coeffs", "convergence", "sos", "dump-grid", "validate")
FORMATS = ("json", "csv", "table")
GRID_POINTS = 101
GRID_EXTENT = 20.0


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "coeffs"
    n_max: int = 19
    degree: int = 11
    precision: str = "extended"
    output_format: str = "json"
    output_path: str | None = None
    seed: int = 0
    degrees: list[int] = field(default_factory=lambda: list(range(4, 12)))
    order: int = 4
    l1: int = 2
    l2: int = 1
    sos_nmax: int = 300
    debug_tamper: bool = False

    def validate(self) -> None:
        if not 6 <= self.n_max <= 19:
            raise UsageError(f"n_max must lie in [6, 19], got {self.n_max}")
        if not 4 <= self.degree <= 16:
            raise UsageError(f"degree must lie in [4, 16], got {self.degree}")
        if self.precision not in PRECISIONS:
            raise UsageError(f"precision must be one of {PRECISIONS}")
        if self.output_format not in FORMATS:
            raise UsageError(f"format must be one of {FORMATS}")
        if not self.degrees or any(not 4 <= d <= 16 for d in self.degrees):
            raise UsageError("degrees must be a nonempty list within [4, 16]")
        if self.degrees != sorted(self.degrees):
            raise UsageError("degrees must be sorted ascending")
        if self.sos_nmax < 2:
            raise UsageError("sos-nmax must be >= 2")

    def public(self) -> dict:
        d = asdict(self)
        d.pop("debug_tamper")
        d.pop("output_path")
        return d


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


# setting name -> (config attribute, parser)
_KEYS = {
    "n_max": ("n_max", int),
    "degree": ("degree", int),
    "precision": ("precision", str),
    "format": ("output_format", str),
    "out": ("output_path", str),
    "seed": ("seed", int),
    "degrees": ("degrees", _int_list),
    "order": ("order", int),
    "l1": ("l1", int),
    "l2": ("l2", int),
    "sos_nmax": ("sos_nmax", int),
}


def _apply(cfg: RunConfig, key: str, raw, source: str) -> None:
    key = key.strip().lower().replace("-", "_")
    if key not in _KEYS:
        raise UsageError(f"unknown setting {key!r} in {source}")
    attr, conv = _KEYS[key]
    try:
        setattr(cfg, attr, conv(raw) if isinstance(raw, str) else raw)
    except ValueError as exc:
        raise UsageError(f"bad value for {key} in {source}: {raw!r}") from exc


def read_config_file(path: str | os.PathLike) -> dict[str, str]:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="h2vdw", description="Hydrogen-hydrogen dispersion coefficients.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key=value settings file (flags take precedence)")
    p.add_argument("--n-max", type=int)
    p.add_argument("--degree", type=int)
    p.add_argument("--precision", choices=PRECISIONS)
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--degrees", help="comma-separated Galerkin degrees")
    p.add_argument("--order", type=int)
    p.add_argument("--l1", type=int)
    p.add_argument("--l2", type=int)
    p.add_argument("--sos-nmax", type=int)
    p.add_argument("--debug-tamper", action="store_true", help=argparse.SUPPRESS)
    return p


def resolve_config(args: argparse.Namespace, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    cfg = RunConfig(command=args.command)
    config_path = args.config or environ.get(ENV_PREFIX + "CONFIG")
    if config_path:
        for k, v in read_config_file(config_path).items():
            _apply(cfg, k, v, str(config_path))
    for key in _KEYS:
        env_val = environ.get(ENV_PREFIX + key.upper())
        if env_val is not None:
            _apply(cfg, key, env_val, "environment")
    for key in _KEYS:
        val = getattr(args, key, None)
        if val is not None:
            _apply(cfg, key, val, "command line")
    cfg.debug_tamper = bool(args.debug_tamper)
    cfg.validate()
    return cfg


# formatting
def fmt_json_number(x: float | None, digits: int = 12):
    if x is None:
        return None
    return float(f"{x:.{digits}g}")


def fmt_csv_number(x: float | None) -> str:
    return "" if x is None else f"{x:.10g}"


def _coefficients_payload(cfg: RunConfig, table: perturbation.CoefficientTable) -> dict:
    coeffs = [{"n": e.n, "value": fmt_json_number(e.value), "method": e.method, "degree": e.degree,
               "cross_check_delta": fmt_json_number(e.cross_check_delta)} for e in table]
    forces = [{"n": e.n, "value": fmt_json_number(e.n * e.value)} for e in table]
    diag = {
        "compatibility_residuals": {str(k): fmt_json_number(v) for k, v in sorted(table.compatibility_residuals.items())},
        "solver_residuals": {str(k): fmt_json_number(v) for k, v in sorted(table.solver_residuals.items())},
    }
    return {"config": cfg.public(), "coefficients": coeffs, "forces": forces, "diagnostics": diag}


def _render(cfg: RunConfig, payload: dict, rows: list[dict], columns: list[str]) -> str:
    if cfg.output_format == "json":
        return json.dumps(payload, indent=2, sort_keys=False) + "\n"
    if cfg.output_format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt_csv_number(r[c]) if isinstance(r[c], float) or r[c] is None else r[c]
                        for c in columns])
        return buf.getvalue()
    widths = {c: max(len(c), *(len(_cell(r[c])) for r in rows)) if rows else len(c) for c in columns}
    lines = ["  ".join(c.rjust(widths[c]) for c in columns)]
    lines += ["  ".join(_cell(r[c]).rjust(widths[c]) for c in columns) for r in rows]
    return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _emit(cfg: RunConfig, text: str, stdout) -> None:
    if cfg.output_path:
        Path(cfg.output_path).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)


# commands
def cmd_coeffs(cfg: RunConfig, stdout) -> int:
    table = perturbation.run(cfg.n_max, cfg.degree, cfg.precision)
    payload = _coefficients_payload(cfg, table)
    rows = [{"n": e.n, "value": e.value, "method": e.method, "degree": e.degree,
             "cross_check_delta": e.cross_check_delta, "force": e.n * e.value} for e in table]
    _emit(cfg, _render(cfg, payload, rows, ["n", "value", "method", "degree", "cross_check_delta", "force"]), stdout)
    return EXIT_OK


def cmd_convergence(cfg: RunConfig, stdout) -> int:
    values: dict[int, dict[int, float]] = {}
    for k in cfg.degrees:
        table = perturbation.run(cfg.n_max, k, cfg.precision)
        values[k] = {e.n: e.value for e in table if e.method != "structural_zero"}
    orders = sorted(values[cfg.degrees[0]])
    rows = []
    series = []
    for n in orders:
        prev = None
        entries = []
        for k in cfg.degrees:
            v = values[k][n]
            delta = None if prev is None else v - prev
            rel = None if delta is None else abs(delta) / abs(v)
            rows.append({"n": n, "degree": k, "value": v, "delta": delta, "relative_delta": rel})
            entries.append({"degree": k, "value": fmt_json_number(v), "delta": fmt_json_number(delta),
                            "relative_delta": fmt_json_number(rel)})
            prev = v
        series.append({"n": n, "degrees": entries})
    payload = {"config": cfg.public(), "convergence": series}
    _emit(cfg, _render(cfg, payload, rows, ["n", "degree", "value", "delta", "relative_delta"]), stdout)
    return EXIT_OK


def cmd_sos(cfg: RunConfig, stdout) -> int:
    # reference C6 from the perturbation pipeline at the configured degree
    table = perturbation.run(6, cfg.degree, cfg.precision)
    rep = sos.report(cfg.sos_nmax, table.value(6))
    data = {k: (fmt_json_number(v) if isinstance(v, float) else v) for k, v in rep.to_dict().items()}
    payload = {"config": cfg.public(), "sos": data}
    _emit(cfg, _render(cfg, payload, [rep.to_dict()], list(rep.to_dict())), stdout)
    return EXIT_OK


def reduced_radial(ws: perturbation.Workspace, order: int, l1: int, l2: int) -> RadialFunction:
    """m = 0 radial part of a channel; for orders <= 5 the angular weight is divided out."""
    wave = ws.phi(order)
    ch = Channel(l1, l2, 0)
    if ch not in wave.channels:
        raise UsageError(f"phi_{order} has no channel {(l1, l2)}")
    t = wave.channels[ch]
    if 3 <= order <= 5:
        with ws.arith.context():
            alpha = ws.surd(Surd(-1, Fraction(1), -2) * gc_surd(l1, l2, 0))
            t = t.scaled(1 / alpha)
    return t


def cmd_dump_grid(cfg: RunConfig, stdout) -> int:
    if cfg.order < 3:
        raise UsageError("order must be >= 3")
    ws = perturbation.build_history(max(cfg.n_max, 6), cfg.degree, cfg.precision,
                                    depth=max(cfg.order, 3))
    t = reduced_radial(ws, cfg.order, cfg.l1, cfg.l2)
    r = np.linspace(0.0, GRID_EXTENT, GRID_POINTS)
    vals = sample_grid(t, r, r)
    over = sample_over_rr(t, r, r)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r1", "r2", "T", "T_over_r1r2"])
    for i in range(GRID_POINTS):
        for j in range(GRID_POINTS):
            w.writerow([fmt_csv_number(r[i]), fmt_csv_number(r[j]), fmt_csv_number(vals[i, j]),
                        fmt_csv_number(over[i, j])])
    _emit(cfg, buf.getvalue(), stdout)
    return EXIT_OK


def cmd_validate(cfg: RunConfig, stdout) -> int:
    scale = 0.0 if cfg.debug_tamper else 1.0
    results = validation.run_all(cfg.seed, cfg.degree, cfg.precision, scale, cfg.n_max)
    lines = []
    for res in results:
        lines.append(f"{'PASS' if res.passed else 'FAIL'}  {res.name}")
        lines += [f"      {d}" for d in res.details[:5]]
    _emit(cfg, "\n".join(lines) + "\n", stdout)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


HANDLERS = {
    "coeffs": cmd_coeffs,
    "convergence": cmd_convergence,
    "sos": cmd_sos,
    "dump-grid": cmd_dump_grid,
    "validate": cmd_validate,
}


def main(argv=None, stdout=None, stderr=None, environ=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = resolve_config(args, environ)
        return HANDLERS[cfg.command](cfg, stdout)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return EXIT_NUMERICAL


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()
