"""``predmmo`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import sys

from .. import __version__
from ..errors import ConfigError, PredMMOError
from ..analysis import default_threads
from . import config as cfgmod
from . import recipes
from .runner import run

MODEL_FLAGS = ("zeta", "beta1", "beta2", "c", "d", "a12", "a21", "h")


def _common(parser):
    g = parser.add_argument_group("output")
    g.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                   help="worker threads for scans (default: available CPUs)")
    g.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    g.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS)


def _model_flags(parser):
    g = parser.add_argument_group("model parameters")
    g.add_argument("--params", help="JSON file with model parameters")
    for k in MODEL_FLAGS:
        g.add_argument(f"--{k}", type=float, dest=f"m_{k}")
    g.add_argument("--rtol", type=float)
    g.add_argument("--atol", type=float)


def _floats(n):
    def conv(text):
        vals = [float(v) for v in text.split(",")]
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers")
        return vals
    return conv


def _ints(n):
    def conv(text):
        vals = [int(v) for v in text.split(",")]
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated integers")
        return vals
    return conv


# experiment flags per subcommand: (flag, key, type, help)
EXPERIMENT_FLAGS = {
    "simulate": [("--y0", "y0", _floats(3), "initial state x,y,z"),
                 ("--span", "span", _floats(2), "time span t0,t1"),
                 ("--time-scale", "time_scale", str, "slow or fast"),
                 ("--store", "store", str, "nodes or dense"),
                 ("--transient", "transient", float, "signature ignores t below this"),
                 ("--lao-threshold", "lao_threshold", float, None),
                 ("--normal-form-alpha", "_nf_alpha", float,
                  "integrate the normal form with this alpha")],
    "equilibria": [],
    "folded": [],
    "fsn2": [("--h-bracket", "h_bracket", _floats(2), "search bracket h0,h1"),
             ("--n-scan", "n_scan", int, None)],
    "normalform": [("--nf-zeta", "zeta", float, "normal-form zeta"),
                   ("--nf-h", "h", float, "normal-form h"),
                   ("--printed", "printed", "flag", "printed coefficient variant")],
    "hopf": [("--nf-zeta", "zeta", float, "normal-form zeta"),
             ("--printed", "printed", "flag", "printed coefficient variant")],
    "poincare": [("--y0", "y0", _floats(3), "initial state"),
                 ("--n-returns", "n_returns", int, None),
                 ("--transient", "transient", float, None),
                 ("--t-max", "t_max", float, None),
                 ("--normal-form-alpha", "_nf_alpha", float,
                  "use the normal form with this alpha")],
    "basin": [("--x0", "x0", float, None),
              ("--rect", "rect", _floats(4), "y0,y1,z0,z1"),
              ("--resolution", "resolution", _ints(2), "ny,nz")],
    "scan": [("--h-range", "h_range", _floats(2), None),
             ("--n-h", "n_h", int, None),
             ("--transient", "transient", float, None),
             ("--window", "window", float, None),
             ("--y0", "y0", _floats(3), None),
             ("--warm-start", "warm_start", "flag", None)],
    "navg": [("--h-range", "h_range", _floats(2), None),
             ("--n-h", "n_h", int, None),
             ("--transient", "transient", float, None),
             ("--window", "window", float, None),
             ("--y0", "y0", _floats(3), None)],
    "twopar": [("--h-range", "h_range", _floats(2), None),
               ("--beta1-range", "beta1_range", _floats(2), None),
               ("--resolution", "resolution", _ints(2), "nb1,nh")],
}

DEFAULTS = {
    "simulate": {"y0": [0.01, 0.01, 0.12], "span": [0.0, 4000.0]},
    "poincare": {"y0": [0.4641, 0.0978, 0.3272], "n_returns": 50, "transient": 20000.0},
    "basin": {"x0": 0.3428, "rect": [[0.08, 0.115], [0.325, 0.36]], "resolution": [12, 12]},
    "scan": {"h_range": [0.78, 1.0], "n_h": 111},
    "navg": {"h_range": [0.8, 0.95], "n_h": 61},
    "twopar": {"h_range": [0.4, 1.2], "beta1_range": [0.15, 0.45], "resolution": [13, 41]},
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _common(common)
    ap = argparse.ArgumentParser(prog="predmmo", parents=[common],
                                 description="Mixed-mode oscillations in a "
                                             "two-predator, one-prey model.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--config", help="run an experiment config (or manifest) file")
    sub = ap.add_subparsers(dest="command")
    p = sub.add_parser("run", parents=[common], help="run an experiment config file")
    p.add_argument("--config", required=True, dest="run_config")
    p = sub.add_parser("reproduce", parents=[common], help="run a bundled recipe")
    p.add_argument("name", nargs="?")
    p.add_argument("--list", action="store_true", help="list recipe names")
    for kind, flags in EXPERIMENT_FLAGS.items():
        p = sub.add_parser(kind, parents=[common], help=f"{kind} experiment")
        _model_flags(p)
        for flag, key, typ, hlp in flags:
            if typ == "flag":
                p.add_argument(flag, dest=f"e_{key}", action="store_true",
                               default=None, help=hlp)
            else:
                p.add_argument(flag, dest=f"e_{key}", type=typ, help=hlp)
    return ap


def _config_from_args(args) -> dict:
    kind = args.command
    model = {}
    if args.params:
        try:
            with open(args.params) as fh:
                model = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read parameters: {exc}", "/model") from None
        model = model.get("model", model) if isinstance(model, dict) else model
    for k in MODEL_FLAGS:
        v = getattr(args, f"m_{k}")
        if v is not None:
            model[k] = v
    exp = {"kind": kind, **DEFAULTS.get(kind, {})}
    for _, key, _, _ in EXPERIMENT_FLAGS[kind]:
        v = getattr(args, f"e_{key}")
        if v is not None:
            exp[key] = v
    if "_nf_alpha" in exp:
        exp["system"] = {"type": "normal-form", "alpha": exp.pop("_nf_alpha")}
    if kind == "basin" and len(exp["rect"]) == 4:
        r = exp["rect"]
        exp["rect"] = [r[:2], r[2:]]
    cfg = {"schema_version": cfgmod.SCHEMA_VERSION, "experiment": exp}
    if model:
        cfg["model"] = model
    integ = {k: getattr(args, k) for k in ("rtol", "atol") if getattr(args, k) is not None}
    if integ:
        cfg["integration"] = integ
    return cfgmod.validate(cfg)


def _execute(configs, args):
    threads = getattr(args, "threads", None) or default_threads()
    for cfg in configs:
        res = run(cfg, threads=threads, out=getattr(args, "out", None),
                  fmt=getattr(args, "format", None))
        print(res.summary)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "reproduce":
            if args.list or not args.name:
                print("\n".join(recipes.names()))
                return 0
            _execute(recipes.recipe(args.name), args)
        elif args.command == "run" or (args.command is None and args.config):
            path = args.run_config if args.command == "run" else args.config
            _execute([cfgmod.load(path)], args)
        elif args.command is None:
            ap.print_help()
            return 2
        else:
            _execute([_config_from_args(args)], args)
    except ConfigError as exc:
        print(f"predmmo: config error: {exc}", file=sys.stderr)
        return 2
    except PredMMOError as exc:
        print(f"predmmo: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
