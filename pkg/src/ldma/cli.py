"""Command-line entry point ``ldma``.

Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
numerical failures (singular channels, non-converging solvers).
"""

import argparse
import csv
import json
import math
import os
import sys
import warnings

import numpy as np

from .array import ArrayGeometry
from .codebook import CodebookFormatError, export_codebook, import_codebook
from .config import ConfigError, NearFieldValidityWarning, ScenarioConfig, load_config
from .experiment import default_out_dir, run_experiment, scheme_codebook, write_result
from .metrics import linear_users_bound, three_user_linear_bound
from .recipes import FIGURE_IDS, Recipe, figure_recipes, run_recipe

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for numeric failures here.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _u64(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="TOML scenario file")
    p.add_argument("--out", help="output directory (default $LDMA_OUT_DIR or ./results)")
    p.add_argument("--seed", type=_u64, help="master seed")
    p.add_argument("--drops", type=_positive_int, help="number of Monte-Carlo drops")
    p.add_argument("--threads", type=_positive_int, default=1, help="worker threads")
    return p


def build_parser():
    common = _common()
    parser = _Parser(prog="ldma", description="Near-field location division multiple access toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    cb = sub.add_parser("codebook", help="build, export or inspect codebooks")
    cb_sub = cb.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name, text in (("build", "build and summarize"), ("export", "write the text format")):
        p = cb_sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--kind", choices=("ldma", "sdma", "uniform"), default="ldma")
    p = cb_sub.add_parser("inspect", parents=[common], help="summarize a codebook file")
    p.add_argument("path")

    p = sub.add_parser("correlate", parents=[common], help="correlation versus array size")
    p.add_argument("--r1", type=float, default=5.0)
    p.add_argument("--r2", type=float, default=15.0)
    p.add_argument("--phi", type=float, default=math.pi / 6)
    p.add_argument("--n-min", type=_positive_int, default=64)
    p.add_argument("--n-max", type=_positive_int, default=4096)
    p.add_argument("--n-step", type=_positive_int, default=64)
    p.add_argument("--frequency", type=float, default=30e9)

    sub.add_parser("simulate", parents=[common], help="run a Monte-Carlo experiment")

    p = sub.add_parser("bound", parents=[common], help="rate bounds for users along one direction")
    p.add_argument("--users-max", type=_positive_int, default=14)
    p.add_argument("--n", type=_positive_int, default=512)
    p.add_argument("--r-min", type=float, default=4.0)
    p.add_argument("--r-max", type=float, default=150.0)
    p.add_argument("--snr-db", type=float, default=12.0)
    p.add_argument("--three-user", action="store_true",
                   help="evaluate the three-user balance-point bound instead")

    p = sub.add_parser("sweep", parents=[common], help="regenerate one figure's data")
    p.add_argument("figure", help="one of " + ", ".join(FIGURE_IDS))
    return parser


def _config(args):
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.drops is not None:
        changes["drops"] = args.drops
    return cfg.replace(**changes) if changes else cfg


def _out(args):
    return args.out or default_out_dir()


def _summary(cb):
    return {
        "kind": cb.kind, "layout": cb.geometry.layout, "n1": cb.geometry.n1,
        "n2": cb.geometry.n2, "codewords": len(cb), "rings": cb.n_rings,
        "delta": cb.delta, "rho_min": cb.rho_min,
    }


def _cmd_codebook(args):
    if args.action == "inspect":
        cb = import_codebook(args.path)
        print(json.dumps(_summary(cb), indent=2, sort_keys=True))
        return EXIT_OK
    cfg = _config(args)
    cb = scheme_codebook(cfg, args.kind)
    out = _out(args)
    os.makedirs(out, exist_ok=True)
    if args.action == "export":
        path = os.path.join(out, f"codebook_{args.kind}.txt")
        export_codebook(cb, path)
        print(path)
    else:
        path = os.path.join(out, f"codebook_{args.kind}.json")
        with open(path, "w") as fh:
            json.dump(_summary(cb), fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(json.dumps(_summary(cb), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_correlate(args):
    if args.n_min > args.n_max:
        raise ConfigError("--n-min must not exceed --n-max")
    recipe = figure_recipes("fig4")
    recipe = Recipe(
        "correlate", "Correlation of two same-angle focusing beams versus array size.",
        "correlation",
        params={**recipe.params, "r1": args.r1, "r2": args.r2, "phi": args.phi,
                "frequency": args.frequency,
                "n_sweep": list(range(args.n_min, args.n_max + 1, args.n_step))},
    )
    meta = run_recipe(recipe, _out(args))
    print(os.path.join(_out(args), meta["files"][0]))
    return EXIT_OK


def _cmd_simulate(args):
    cfg = _config(args)
    res = run_experiment(cfg, args.threads)
    paths = write_result(res, _out(args))
    for s in res.summary:
        print(f"{s['snr_db']:g} dB  {s['scheme']:<14} {s['mean']:.4f} bit/s/Hz")
    print(paths["summary"])
    return EXIT_OK


def _cmd_bound(args):
    if not 0 < args.r_min < args.r_max:
        raise ConfigError("need 0 < --r-min < --r-max")
    geom = ArrayGeometry.ula(args.n)
    snr = 10.0 ** (args.snr_db / 10.0)
    if args.three_user:
        header = ["r_mid", "r_aub"]
        r_mid, bound = three_user_linear_bound(geom, args.r_min, args.r_max, snr)
        rows = [[repr(r_mid), repr(bound)]]
    else:
        header = ["K", "delta_abs", "gamma", "r_aub"]
        rows = []
        for k in range(1, args.users_max + 1):
            bound, delta, gamma, _ = linear_users_bound(k, geom, args.r_min, args.r_max, snr)
            rows.append([k, repr(float(delta)), " ".join(repr(float(g)) for g in gamma), repr(bound)])
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        fh = open(os.path.join(args.out, "bound.csv"), "w", newline="")
    else:
        fh = sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def _cmd_sweep(args):
    try:
        recipe = figure_recipes(args.figure)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None
    meta = run_recipe(recipe, _out(args), args.drops, args.seed, args.threads)
    for f in meta["files"]:
        print(os.path.join(_out(args), f))
    return EXIT_OK


_COMMANDS = {
    "codebook": _cmd_codebook,
    "correlate": _cmd_correlate,
    "simulate": _cmd_simulate,
    "bound": _cmd_bound,
    "sweep": _cmd_sweep,
}


def main(argv=None):
    """Run the CLI and return an exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_CONFIG
    with warnings.catch_warnings():
        warnings.simplefilter("always", NearFieldValidityWarning)
        try:
            return _COMMANDS[args.command](args)
        except (ConfigError, CodebookFormatError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except (np.linalg.LinAlgError, FloatingPointError, RuntimeError, ValueError) as exc:
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC


def entry_point():
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
