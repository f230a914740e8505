"""Command-line entry point.

Commands::

    lplab verify --target functional_lp_bm --preset indicator-equal --seed 7
    lplab sweep --preset segment-lp-bm --vary p=1,1.5,2,3
    lplab demo --list
    lplab demo indicator-equal

Parameter precedence (highest first): command-line flags, the
``LPLAB_SEED`` environment variable (seed only), the ``--config`` file,
the preset's defaults.

Exit status: 0 when every verdict is ``holds`` or ``holds_with_tolerance``;
2 when any verdict is anything else; 1 on configuration or domain errors.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from pathlib import Path

from . import io as lio
from .errors import LplabError
from .presets import catalog, resolve, run_target
from .report import CSV_FIELDS, jsonable, reports_to_csv

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2


def _real(text: str) -> float:
    value = float(text)  # accepts "inf", "-inf"
    if math.isnan(value):
        raise ValueError("nan is not a valid parameter")
    return value


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _real_list(text: str) -> list[float]:
    return [_real(tok) for tok in text.split(",") if tok.strip()]


PARAM_TYPES = {
    "p": _real,
    "s": _real,
    "lam": _real,
    "mu": _real,
    "omega": _real,
    "alpha": _real,
    "f_scale": _real,
    "samples": int,
    "resolution": int,
    "resolutions": _int_list,
    "lambda_resolution": int,
    "epsilons": _real_list,
    "seed": int,
    "condition": str,
    "M": str,
}
FUNCTION_INPUTS = ("f", "g", "h")
SET_INPUTS = ("K", "L")
RUN_KEYS = ("target", "preset", "output", "format", "emit_profile", "vary")


def _convert(key: str, raw: str, where: str):
    try:
        return PARAM_TYPES[key](raw)
    except (ValueError, TypeError):
        raise LplabError(f"{where}: invalid value {raw!r} for {key}") from None


def _load_input(key: str, path) -> object:
    return lio.read_grid_function(path) if key in FUNCTION_INPUTS else lio.read_point_set(path)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--target", help="verifier name")
    common.add_argument("--preset", help="named scenario (see 'demo --list')")
    common.add_argument("--config", help="flat key = value file")
    for key in FUNCTION_INPUTS:
        common.add_argument(f"--{key}", metavar="FILE", help=f"grid function file for {key}")
    for key in SET_INPUTS:
        common.add_argument(f"--{key}", metavar="FILE", help=f"point set file (CSV or JSON) for {key}")
    for key in PARAM_TYPES:
        common.add_argument(f"--{key.replace('_', '-')}", dest=key, metavar="VALUE")
    common.add_argument("--output", "-o", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--emit-profile", metavar="FILE", help="write the constructed h as per-node CSV")

    parser = argparse.ArgumentParser(prog="lplab", description="Numerical verification of L_p Brunn-Minkowski type inequalities.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run one verifier")
    sweep = sub.add_parser("sweep", parents=[common], help="cross product of parameter values, one row each")
    sweep.add_argument("--vary", action="append", default=[], metavar="KEY=V1,V2,...")
    demo = sub.add_parser("demo", parents=[common], help="run a preset, or list them")
    demo.add_argument("name", nargs="?", help="preset name")
    demo.add_argument("--list", action="store_true", help="print the preset catalog")
    return parser


def _gather(args, environ) -> tuple[dict, dict]:
    """Run options and verifier parameters after applying precedence."""
    run = {"format": None, "output": None, "emit_profile": None, "vary": [], "target": None, "preset": None}
    params: dict = {}
    if args.config:
        base = Path(args.config).parent
        for key, (raw, lineno) in lio.read_config(args.config).items():
            where = f"{args.config}:{lineno}"
            if key in RUN_KEYS:
                run[key] = [v.strip() for v in raw.split(";") if v.strip()] if key == "vary" else raw
            elif key in PARAM_TYPES:
                params[key] = _convert(key, raw, where)
            elif key in FUNCTION_INPUTS + SET_INPUTS:
                params[key] = _load_input(key, base / raw)
            else:
                raise LplabError(f"{where}: unknown key {key!r}")
    if environ.get("LPLAB_SEED") is not None:
        params["seed"] = _convert("seed", environ["LPLAB_SEED"], "LPLAB_SEED")
    for key in PARAM_TYPES:
        raw = getattr(args, key, None)
        if raw is not None:
            params[key] = _convert(key, raw, f"--{key.replace('_', '-')}")
    for key in FUNCTION_INPUTS + SET_INPUTS:
        path = getattr(args, key, None)
        if path is not None:
            params[key] = _load_input(key, path)
    for key in ("target", "preset", "output", "format", "emit_profile"):
        if getattr(args, key, None) is not None:
            run[key] = getattr(args, key)
    if getattr(args, "vary", None):
        run["vary"] = list(args.vary)
    if getattr(args, "name", None):
        run["preset"] = args.name
    return run, params


def _parse_vary(items: list[str]) -> list[tuple[str, list]]:
    if not items:
        raise LplabError("sweep needs at least one --vary KEY=V1,V2,...")
    axes = []
    for item in items:
        key, sep, values = item.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in PARAM_TYPES or key in ("resolutions", "epsilons", "condition", "M"):
            raise LplabError(f"bad --vary {item!r}: expected KEY=V1,V2,... with a scalar parameter KEY")
        tokens = [t.strip() for t in values.split(",") if t.strip()]
        if not tokens:
            raise LplabError(f"empty range for {key!r}")
        converted = sorted({_convert(key, t, f"--vary {key}") for t in tokens})
        axes.append((key, converted))
    return axes


def _emit(text: str, output, stdout):
    if output:
        Path(output).write_text(text)
    else:
        stdout.write(text)


def _run_single(run, params, stdout) -> int:
    target, defaults = resolve(run["target"], run["preset"])
    report = run_target(target, {**defaults, **params})
    fmt = run["format"] or "json"
    text = report.to_json() if fmt == "json" else reports_to_csv([report.csv_row()], list(CSV_FIELDS))
    _emit(text, run["output"], stdout)
    if run["emit_profile"]:
        h = report.artifacts.get("h")
        if h is None:
            raise LplabError(f"target {target!r} constructs no function to emit")
        Path(run["emit_profile"]).write_text(lio.profile_csv(h))
    return EXIT_OK if report.passed else EXIT_FAILED


def _run_sweep(run, params, stdout) -> int:
    target, defaults = resolve(run["target"], run["preset"])
    axes = _parse_vary(run["vary"])
    keys = [k for k, _ in axes]
    rows, records, ok = [], [], True
    # rows come out in lexicographic order of the (sorted) parameter tuples
    for combo in itertools.product(*(values for _, values in axes)):
        setting = dict(zip(keys, combo))
        report = run_target(target, {**defaults, **params, **setting})
        ok &= report.passed
        rows.append({**jsonable(setting), **report.csv_row()})
        records.append({"parameters": jsonable(setting), "report": report.to_dict()})
    if (run["format"] or "csv") == "csv":
        text = reports_to_csv(rows, keys + [f for f in CSV_FIELDS])
    else:
        text = json.dumps(records, sort_keys=True, indent=2) + "\n"
    _emit(text, run["output"], stdout)
    return EXIT_OK if ok else EXIT_FAILED


def main(argv=None, environ=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    environ = os.environ if environ is None else environ
    args = build_parser().parse_args(argv)
    try:
        if args.command == "demo" and args.list:
            stdout.write(catalog())
            return EXIT_OK
        run, params = _gather(args, environ)
        if args.command == "sweep":
            return _run_sweep(run, params, stdout)
        if args.command == "demo" and run["preset"] is None:
            raise LplabError("demo needs a preset name or --list")
        return _run_single(run, params, stdout)
    except LplabError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
