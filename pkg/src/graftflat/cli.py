"""Command line driver for the experiments.

Config files are TOML::

    [surface]                 # optional; each experiment has a default fixture
    genus = 2
    decomposition = "theta"   # theta | dumbbell | chain
    lengths = [2.0, 2.5, 3.0]
    twists = [0.3, -0.7, 1.1]

    [multicurve]
    weights = [1.0, 0.8, 1.2]

    [experiment]
    name = "deflate-rate"
    seed = 0
    nPairs = 500
    netStep = 0.02
    ts = [1.0, 0.5, 0.25, 0.125]

    [output]
    path = "deflate-rate.csv"  # relative to the output directory

The output directory is --out-dir, else $GRAFTFLAT_OUT_DIR, else ./results.
Exit codes: 0 pass, 1 contract violation, 2 config error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import jsonschema

from .deflate import deflate, export_flat
from .errors import BudgetExceeded, ConfigError, ContractViolation, GraftFlatError
from .experiments import EXPERIMENTS, Params, Result
from .fixtures import decomposition
from .graft import GraftedComplex, WeightedMulticurve
from .pants import FNSurface

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

OUT_DIR_ENV = "GRAFTFLAT_OUT_DIR"
MIN_LENGTH = 0.05  # thinner pants are outside the thick regime the experiments assume
EXIT_OK, EXIT_CONTRACT, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3

_pos = {"type": "number", "exclusiveMinimum": 0}
_pos_int = {"type": "integer", "minimum": 1}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment"],
    "properties": {
        "surface": {
            "type": "object",
            "additionalProperties": False,
            "required": ["genus", "decomposition", "lengths", "twists"],
            "properties": {
                "genus": {"type": "integer", "minimum": 2},
                "decomposition": {"enum": ["theta", "dumbbell", "chain"]},
                "lengths": {"type": "array", "items": _pos, "minItems": 3},
                "twists": {"type": "array", "items": {"type": "number"}, "minItems": 3},
            },
        },
        "multicurve": {
            "type": "object",
            "additionalProperties": False,
            "required": ["weights"],
            "properties": {"weights": {"type": "array", "items": {"type": "number", "minimum": 0}}},
        },
        "experiment": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": sorted(EXPERIMENTS)},
                "seed": {"type": "integer", "minimum": 0},
                "nPairs": _pos_int,
                "netStep": _pos,
                "ts": {"type": "array", "items": _pos, "minItems": 1},
                "scales": {"type": "array", "items": _pos, "minItems": 1},
                "gridStep": _pos,
                "samples": _pos_int,
                "configs": _pos_int,
                "depths": {"type": "array", "items": _pos_int, "minItems": 1},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"path": {"type": "string", "minLength": 1}},
        },
    },
}


def load_config(path: str | Path) -> dict:
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {where}: {exc.message}") from exc
    return cfg


def build_surface(cfg: dict) -> GraftedComplex | None:
    s = cfg.get("surface")
    if s is None:
        if "multicurve" in cfg:
            raise ConfigError("a multicurve block needs a surface block")
        return None
    if min(s["lengths"]) < MIN_LENGTH:
        raise ConfigError(f"curve lengths below {MIN_LENGTH} give degenerate thin pants")
    try:
        fn = FNSurface(
            decomposition(s["decomposition"], s["genus"]),
            tuple(float(x) for x in s["lengths"]),
            tuple(float(x) for x in s["twists"]),
        )
        n = fn.decomposition.n_curves
        weights = cfg.get("multicurve", {}).get("weights", [0.0] * n)
        return GraftedComplex(fn, WeightedMulticurve(tuple(float(a) for a in weights)))
    except (GraftFlatError, ValueError) as exc:
        raise ConfigError(f"invalid surface: {exc}") from exc


def build_params(cfg: dict, seed: int | None = None, jobs: int = 1) -> Params:
    e = cfg["experiment"]
    p = Params(surface=build_surface(cfg), jobs=jobs)
    updates = {}
    for key in ("seed", "nPairs", "netStep", "gridStep", "samples", "configs"):
        if key in e:
            updates[key] = e[key]
    for key in ("ts", "scales", "depths"):
        if key in e:
            updates[key] = tuple(e[key])
    if seed is not None:
        updates["seed"] = seed
    return replace(p, **updates)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return "%.12g" % v
    if hasattr(v, "item"):
        return _fmt(v.item())
    return str(v)


def to_csv(res: Result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(res.columns)
    for row in res.rows:
        w.writerow([_fmt(row[c]) for c in res.columns])
    return buf.getvalue()


def out_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get(OUT_DIR_ENV) or "results")


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    params = build_params(cfg, args.seed, args.jobs)
    name = cfg["experiment"]["name"]
    res = EXPERIMENTS[name](params)
    target = out_dir(args.out_dir) / cfg.get("output", {}).get("path", f"{name}.csv")
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(to_csv(res))
    for check, ok in res.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}: {check}")
    print(f"wrote {target}")
    if not res.passed:
        raise ContractViolation(f"{name}: {sum(not ok for ok in res.checks.values())} check(s) failed")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    build_params(cfg)
    print(f"{args.config}: ok")
    return EXIT_OK


def cmd_export_flat(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    g = build_surface(cfg)
    if g is None:
        raise ConfigError("export-flat needs a surface and a multicurve")
    flat, _ = deflate(g)
    Path(args.out).write_text(export_flat(flat))
    print(f"wrote {args.out}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graftflat", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=None, help="override the experiment seed")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for independent items")
    parser.add_argument("--out-dir", default=None, help=f"output directory (default ${OUT_DIR_ENV} or ./results)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the experiment in a config file")
    p_run.add_argument("config")
    p_run.set_defaults(func=cmd_run)
    p_val = sub.add_parser("validate", help="check a config file")
    p_val.add_argument("config")
    p_val.set_defaults(func=cmd_validate)
    p_exp = sub.add_parser("export-flat", help="write the deflated flat surface as text")
    p_exp.add_argument("config")
    p_exp.add_argument("out")
    p_exp.set_defaults(func=cmd_export_flat)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ContractViolation, GraftFlatError) as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
