"""Command-line front end.

Exit codes: 0 success, 1 a verification batch contains a refuted verdict,
2 usage error, 3 I/O failure.  Every JSON output carries a ``reproducibility``
block (config echo, package version, grid specs) and no timestamps, so
repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .conjugate import conjugate_nd, psi_star_table, read_csv, write_csv
from .fourier import QuadratureError, fourier_transform
from .grids import GridBox
from .seminorms import (ComplexProbe, g_norm, gs_seminorm, h_seminorm, p_seminorm,
                        phi_star_on_probe, psi_biconjugate, r_seminorm)
from .weights import CONDITIONS, ConditionReport, check_condition, family_from_spec
from .verify import CLAIMS, REFUTED, Caps, VerificationReport, run_batch, summary_rows
from .zoo import exact_fourier, from_id

EXIT_OK, EXIT_REFUTED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
WORKERS_ENV = "WSPACE_WORKERS"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything a run depends on; echoed verbatim into the reproducibility block."""

    command: str
    family: dict = field(default_factory=lambda: {"kind": "quadratic"})
    functions: list = field(default_factory=list)
    overrides: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.format not in ("json", "csv"):
            raise UsageError(f"format must be json or csv, not {self.format!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise UsageError(f"unknown config keys {sorted(unknown)}")
        if "command" not in d:
            raise UsageError("config needs a 'command'")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def _dump(obj) -> str:
    # repr of a Python float is the shortest string that round-trips bit for bit
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _emit_json(payload: dict, cfg: RunConfig, grids) -> str:
    payload = {**payload, "reproducibility": {"config": cfg.to_dict(), "version": __version__,
                                              "grids": grids}}
    return _dump(payload)


def _write_text(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def _write_rows(rows: list[dict], path: str | None) -> None:
    keys = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    fh = sys.stdout if path is None else open(path, "w", newline="")
    try:
        w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in r.items()})
    finally:
        if path is not None:
            fh.close()


def _sidecar(path: str | None, cfg: RunConfig, grids) -> None:
    """CSV outputs keep their reproducibility block next to them."""
    if path is not None:
        _write_text(_emit_json({}, cfg, grids), str(path) + ".repro.json")


def _family_spec(args) -> dict:
    if getattr(args, "family_config", None):
        try:
            spec = json.loads(Path(args.family_config).read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.family_config}: {exc}") from exc
    else:
        spec = {"kind": args.family, "n": args.n, "M_max": args.M_max}
        if args.p is not None:
            spec["p"] = args.p
        if args.c is not None:
            spec["c"] = [float(v) for v in args.c.split(",")]
    try:
        family_from_spec(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return spec


def _split(text: str | None) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


def _function_ids(values) -> list[str]:
    ids = []
    for v in values or []:
        ids += [t for t in v.split(";") if t]
    return ids


# -- subcommands ---------------------------------------------------------------

def cmd_check_family(args) -> int:
    spec = _family_spec(args)
    fam = family_from_spec(spec)
    conds = _split(args.conditions) or list(CONDITIONS)
    bad = [c for c in conds if c not in CONDITIONS]
    if bad:
        raise UsageError(f"unknown conditions {bad}")
    ms = [args.m] if args.m else list(range(1, fam.M_max))
    reports = [check_condition(fam, c, m).to_dict() for c in conds for m in ms]
    cfg = RunConfig("check-family", spec, [], {"conditions": conds, "m": ms}, args.output, "json")
    grids = sorted({json.dumps(r["grid"], sort_keys=True) for r in reports})
    _write_text(_emit_json({"reports": reports}, cfg, [json.loads(g) for g in grids]), args.output)
    return EXIT_OK


def cmd_conjugate(args) -> int:
    g, names = read_csv(args.input)
    gstar = conjugate_nd(g)
    dual_names = [f"{n}*" if not n.endswith("*") else n[:-1] for n in names]
    write_csv(gstar, args.output, dual_names)
    cfg = RunConfig("conjugate", {}, [], {"input": args.input}, args.output, "csv")
    _sidecar(args.output, cfg, [{"axis": n, "nodes": len(a)} for n, a in zip(names, g.axes)])
    return EXIT_OK


def cmd_seminorm(args) -> int:
    spec = _family_spec(args)
    fam = family_from_spec(spec)
    f = from_id(args.function)
    if f.n != fam.n:
        raise UsageError("function and family dimensions differ")
    nu, order = args.nu, args.order
    if args.functional in ("p", "h"):
        probe = ComplexProbe.square(args.box, args.step, f.n)
        if args.functional == "p":
            est = p_seminorm(f, fam[nu], order, probe)
        else:
            psi = fam.psi(nu)
            bic, _ = psi_biconjugate(psi, math.log1p(args.box))
            est = h_seminorm(f, psi, order, probe, bic=bic)
    else:
        probe = GridBox(args.box, args.step, f.n)
        if args.functional == "r":
            est = r_seminorm(f, psi_star_table(fam.psi(nu), args.cap), order, probe, args.cap)
        elif args.functional == "g":
            f_hat = f if args.direct else exact_fourier(f)
            if f_hat is None:
                raise UsageError(f"{f.id} has no transform as a function; use --direct")
            est = g_norm(f_hat, psi_star_table(fam.psi(nu), args.cap), order, probe, args.cap)
        else:
            est = gs_seminorm(f, phi_star_on_probe(fam[nu], probe), order, probe)
    cfg = RunConfig("seminorm", spec, [args.function],
                    {"functional": args.functional, "nu": nu, "order": order, "box": args.box,
                     "step": args.step, "cap": args.cap, "direct": args.direct},
                    args.output, "json")
    _write_text(_emit_json({"estimate": est.to_dict()}, cfg, [probe.to_dict()]), args.output)
    return EXIT_OK


def cmd_fourier(args) -> int:
    f = from_id(args.function)
    if f.n != 1:
        raise UsageError("the fourier subcommand samples one-dimensional functions only")
    lo, hi, count = args.range
    x = np.linspace(lo, hi, int(count))
    values, error = fourier_transform(f, x)
    exact = exact_fourier(f)
    ref = np.asarray(exact.evaluate(x)) if exact is not None else None
    rows = []
    for i, xi in enumerate(x):
        row = {"x": float(xi), "re": float(values[i].real), "im": float(values[i].imag),
               "error_estimate": float(error[i])}
        if ref is not None:
            row["exact_re"] = float(ref[i].real)
            row["exact_im"] = float(ref[i].imag)
        rows.append(row)
    cfg = RunConfig("fourier", {}, [args.function], {"range": list(args.range)}, args.output, "csv")
    _write_rows(rows, args.output)
    _sidecar(args.output, cfg, [{"targets": [lo, hi, int(count)]}])
    return EXIT_OK


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return os.cpu_count() or 1
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc


def cmd_verify(args) -> int:
    spec = _family_spec(args)
    claims = _split(args.claim)
    bad = [c for c in claims if c not in CLAIMS + ("P12",)]
    if bad or not claims:
        raise UsageError(f"claims must be drawn from {CLAIMS}")
    functions = sorted(set(_function_ids(args.function)))
    if not functions:
        raise UsageError("at least one --function is required")
    for fid in functions:
        try:
            from_id(fid)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    overrides = json.loads(args.caps) if args.caps else {}
    try:
        Caps.from_dict(overrides)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"caps: {exc}") from exc
    reports = run_batch(claims, functions, spec, overrides, workers=_workers(), direct=args.direct)
    cfg = RunConfig("verify", spec, functions, {"claims": claims, "caps": overrides,
                                                "direct": args.direct}, args.output, args.format)
    grids = [Caps.for_dimension(spec.get("n", 1), **overrides).to_dict()]
    if args.format == "csv":
        _write_rows(summary_rows(reports), args.output)
        _sidecar(args.output, cfg, grids)
    else:
        _write_text(_emit_json({"reports": [r.to_dict() for r in reports]}, cfg, grids),
                    args.output)
    for r in reports:
        print(f"{r.claim} {r.function}: {r.verdict}", file=sys.stderr)
    return EXIT_REFUTED if any(r.verdict == REFUTED for r in reports) else EXIT_OK


# -- plot data -----------------------------------------------------------------

def _load_reports(paths) -> list[dict]:
    out = []
    for p in paths:
        try:
            data = json.loads(Path(p).read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"{p}: not a JSON report ({exc})") from exc
        out += data.get("reports", [data] if "kind" in data else [])
    return out


def plot_series(reports: list[dict]) -> dict[str, list[dict]]:
    """CSV series keyed by file stem."""
    series: dict[str, list[dict]] = {}
    order = lambda r: (r.get("kind", ""), r.get("claim", ""), r.get("function", ""),
                       r.get("condition_id", ""), r.get("m", 0))
    for rep in sorted(reports, key=order):
        if rep.get("kind") == "condition":
            cr = ConditionReport.from_dict(rep)
            boxes = cr.grid["boxes"]
            rows = series.setdefault("deficit_vs_box", [])
            rows += [{"condition": cr.condition_id, "m": cr.m, "box": float(b), "deficit": t}
                     for b, t in zip(boxes, cr.margin_trend)]
        elif rep.get("kind") == "verification":
            vr = VerificationReport.from_dict(rep)
            claim = vr.claim
            for en in vr.evidence:
                if "values" not in en:
                    continue
                rows = series.setdefault(f"{claim}_value_vs_box", [])
                rows += [{"function": vr.function, "label": en["label"], "box": b, "value": v}
                         for b, v in zip(en["boxes"], en["values"])]
                prof = en["estimate"].get("profile") or []
                if en["estimate"]["functional"] == "r" and prof:
                    rows = series.setdefault(f"{claim}_R_term_log_vs_order", [])
                    rows += [{"function": vr.function, "label": en["label"], "order": o,
                              "log_term": v} for o, v in prof]
    return series


def cmd_plot_data(args) -> int:
    series = plot_series(_load_reports(args.reports))
    out = Path(args.output_dir)
    if series:
        out.mkdir(parents=True, exist_ok=True)
    for stem, rows in sorted(series.items()):
        _write_rows(rows, str(out / f"{stem}.csv"))
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def _add_family(p):
    p.add_argument("--family", "--builtin", dest="family", default="quadratic",
                   help="builtin family kind (quadratic, power, anisotropic, doubling, linear)")
    p.add_argument("--family-config", help="JSON file with a family spec")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--M-max", dest="M_max", type=int, default=6)
    p.add_argument("--p", type=float)
    p.add_argument("--c", help="comma-separated anisotropic coefficients")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wspace", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-family", help="check structural conditions of a weight family")
    _add_family(p)
    p.add_argument("--conditions", help="comma-separated ids, default all")
    p.add_argument("--m", type=int, help="member index, default every m < M_max")
    p.add_argument("--output")
    p.set_defaults(func=cmd_check_family)

    p = sub.add_parser("conjugate", help="discrete convex conjugate of a CSV grid")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_conjugate)

    p = sub.add_parser("seminorm", help="evaluate one weighted seminorm on a probe box")
    _add_family(p)
    p.add_argument("--functional", choices=["p", "h", "r", "g", "gs"], required=True)
    p.add_argument("--function", required=True)
    p.add_argument("--nu", type=int, default=1)
    p.add_argument("--order", type=int, default=0, help="k for p/h, m for r/g/gs")
    p.add_argument("--box", type=float, default=4.0)
    p.add_argument("--step", type=float, default=0.04)
    p.add_argument("--cap", type=int, default=40, help="alpha/beta order cap for r and g")
    p.add_argument("--direct", action="store_true", help="g: use the function itself as f^")
    p.add_argument("--output")
    p.set_defaults(func=cmd_seminorm)

    p = sub.add_parser("fourier", help="quadrature Fourier transform on a target range")
    p.add_argument("--function", required=True)
    p.add_argument("--range", nargs=3, type=float, default=(-5.0, 5.0, 101),
                   metavar=("LO", "HI", "COUNT"))
    p.add_argument("--output")
    p.set_defaults(func=cmd_fourier)

    p = sub.add_parser("verify", help="run theorem verifications on zoo functions")
    _add_family(p)
    p.add_argument("--claim", required=True, help="comma-separated claim ids")
    p.add_argument("--function", action="append", required=True,
                   help="zoo id; repeat or separate with ';'")
    p.add_argument("--caps", help="JSON object overriding verification caps")
    p.add_argument("--direct", action="store_true", help="T4: treat the function as f^ itself")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot-data", help="CSV series from saved reports")
    p.add_argument("reports", nargs="*")
    p.add_argument("--output-dir", default="plot-data")
    p.set_defaults(func=cmd_plot_data)

    run = sub.add_parser("run", help="execute a JSON RunConfig")
    run.add_argument("config")
    run.set_defaults(func=cmd_run)
    return parser


def cmd_run(args) -> int:
    try:
        raw = json.loads(Path(args.config).read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.config}: {exc}") from exc
    cfg = RunConfig.from_dict(raw)
    argv = [cfg.command]
    if cfg.command in ("check-family", "seminorm", "verify"):
        argv += ["--family", cfg.family.get("kind", "quadratic"), "--n", str(cfg.family.get("n", 1)),
                 "--M-max", str(cfg.family.get("M_max", 6))]
        if "p" in cfg.family:
            argv += ["--p", str(cfg.family["p"])]
        if "c" in cfg.family:
            argv += ["--c", ",".join(str(v) for v in cfg.family["c"])]
    for fid in cfg.functions:
        argv += ["--function", fid]
    for key, value in sorted(cfg.overrides.items()):
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            argv += [flag] if value else []
        elif isinstance(value, (dict, list)) and key == "caps":
            argv += [flag, json.dumps(value)]
        elif isinstance(value, list):
            argv += [flag, ",".join(str(v) for v in value)]
        else:
            argv += [flag, str(value)]
    if cfg.command == "verify":
        argv += ["--format", cfg.format]
    if cfg.output and cfg.command != "plot-data":
        argv += ["--output", cfg.output]
    return main(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"wspace: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, FileNotFoundError) as exc:
        print(f"wspace: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, QuadratureError) as exc:
        print(f"wspace: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
