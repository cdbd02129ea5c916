"""Command-line driver: ``ridge``, ``ggm`` and ``boundcheck`` subcommands.

Settings resolve as command-line flag, then config file (flat ``key = value``
lines, ``#`` comments), then built-in default.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import oracle
from .baselines import GridSpec
from .core import InvalidInputError
from .experiments import (
    GGM_METHODS,
    RIDGE_METHODS,
    GgmConfig,
    RidgeConfig,
    check_methods,
    format_csv,
    run_ggm,
    run_ridge,
    summarize,
    worker_count,
    write_csv,
)

log = logging.getLogger("mdlpenalty")


class UsageError(Exception):
    pass


def _int_list(text: str) -> tuple:
    try:
        vals = tuple(int(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise UsageError(f"expected positive integers, got {text!r}")
    return vals


def _float_list(text: str) -> tuple:
    try:
        vals = tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise UsageError("empty list")
    return vals


def _str_list(text: str) -> tuple:
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file; dashes in keys are read as underscores."""
    out = {}
    p = Path(path)
    if not p.exists():
        raise UsageError(f"config file not found: {p}")
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{p}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


# key -> (parser, default) per subcommand
RIDGE_KEYS = {
    "synthetic": (str, "uncorrelated"),
    "csv": (str, None),
    "target": (str, None),
    "n": (_int_list, (30, 60, 120, 240)),
    "seeds": (int, 10),
    "methods": (_str_list, RIDGE_METHODS),
    "test_size": (int, 1000),
    "test_fraction": (float, 0.1),
    "noise_sd": (float, 1.0),
    "folds": (int, 10),
    "grid_lo": (float, 1e-4),
    "grid_hi": (float, 1.0),
    "grid_count": (int, 20),
    "box_lo": (float, 1e-6),
    "box_hi": (float, 1e6),
    "max_iter": (int, 200),
    "timing": (_bool, False),
    "out": (str, None),
    "json": (str, None),
}

GGM_KEYS = {
    "m": (_int_list, (10, 20)),
    "n": (_int_list, (100, 400, 1600)),
    "seeds": (int, 10),
    "methods": (_str_list, GGM_METHODS),
    "folds": (int, 10),
    "gamma": (float, 0.5),
    "grid_lo": (float, 1e-4),
    "grid_hi": (float, 1.0),
    "grid_count": (int, 20),
    "box_lo": (float, 1e-6),
    "box_hi": (float, 1e6),
    "max_iter": (int, 200),
    "timing": (_bool, False),
    "out": (str, None),
    "json": (str, None),
}

BOUND_KEYS = {
    "domain": (str, "both"),
    "B": (float, 1.0),
    "lambda_": (_float_list, None),
    "neighbor": (float, None),
    "lambda_star": (float, None),
}


def resolve(args: argparse.Namespace, keys: dict) -> dict:
    cfg_file = read_config(args.config) if getattr(args, "config", None) else {}
    unknown = set(cfg_file) - set(keys) - {"lambda"}
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    out = {}
    for key, (parse, default) in keys.items():
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = parse(flag) if isinstance(flag, str) else flag
        elif key in cfg_file or (key == "lambda_" and "lambda" in cfg_file):
            raw = cfg_file.get(key, cfg_file.get("lambda"))
            try:
                out[key] = parse(raw)
            except ValueError:
                raise UsageError(f"config key {key}: cannot parse {raw!r}") from None
        else:
            out[key] = default
    return out


def _emit(results, opts) -> None:
    if opts["out"]:
        write_csv(results, opts["out"])
        log.info("wrote %d rows to %s", len(results), opts["out"])
    else:
        sys.stdout.write(format_csv(results))
    if opts["json"]:
        Path(opts["json"]).write_text(json.dumps(summarize(results), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_ridge(args) -> int:
    o = resolve(args, RIDGE_KEYS)
    if o["synthetic"] not in ("uncorrelated", "correlated"):
        raise UsageError("--synthetic must be 'uncorrelated' or 'correlated'")
    if o["csv"] and not o["target"]:
        raise UsageError("--csv needs --target")
    methods = check_methods(o["methods"], RIDGE_METHODS)
    cfg = RidgeConfig(
        n_values=o["n"],
        seeds=o["seeds"],
        methods=methods,
        synthetic=o["synthetic"],
        csv_path=o["csv"],
        target=o["target"],
        test_size=o["test_size"],
        test_fraction=o["test_fraction"],
        noise_sd=o["noise_sd"],
        box=(o["box_lo"], o["box_hi"]),
        grid=GridSpec(o["grid_lo"], o["grid_hi"], o["grid_count"]),
        folds=o["folds"],
        max_iter=o["max_iter"],
        timing=o["timing"],
    )
    if o["seeds"] < 1:
        raise UsageError("--seeds must be >= 1")
    log.info("ridge: %s", {k: v for k, v in o.items() if k not in ("out", "json")})
    _emit(run_ridge(cfg, worker_count()), o)
    return 0


def cmd_ggm(args) -> int:
    o = resolve(args, GGM_KEYS)
    methods = check_methods(o["methods"], GGM_METHODS)
    bad = [m for m in o["m"] if m < 5]
    if bad:
        raise UsageError(f"--m: the double-ring model needs m >= 5, got {bad[0]}")
    if o["seeds"] < 1:
        raise UsageError("--seeds must be >= 1")
    cfg = GgmConfig(
        m_values=o["m"],
        n_values=o["n"],
        seeds=o["seeds"],
        methods=methods,
        box=(o["box_lo"], o["box_hi"]),
        grid=GridSpec(o["grid_lo"], o["grid_hi"], o["grid_count"]),
        folds=o["folds"],
        gamma=o["gamma"],
        max_iter=o["max_iter"],
        timing=o["timing"],
    )
    log.info("ggm: %s (baselines search the scalar quadratic-penalty family)", {k: v for k, v in o.items() if k not in ("out", "json")})
    _emit(run_ggm(cfg, worker_count()), o)
    return 0


def default_lambda_grid() -> tuple:
    return tuple(np.logspace(-2, 2, 20))


def cmd_boundcheck(args) -> int:
    o = resolve(args, BOUND_KEYS)
    lams = o["lambda_"] or default_lambda_grid()
    for v in lams:
        if not (v > 0 and math.isfinite(v)):
            raise UsageError(f"--lambda values must be positive and finite, got {v}")
    if o["domain"] not in ("bounded", "unbounded", "both"):
        raise UsageError("--domain must be bounded, unbounded or both")
    if not (o["B"] > 0 and math.isfinite(o["B"])):
        raise UsageError("--B must be positive")
    domains = ["unbounded", "bounded"] if o["domain"] == "both" else [o["domain"]]
    failures = 0
    for dom in domains:
        model = oracle.Scalar1DModel(o["B"] if dom == "bounded" else None)
        lam_star = o["lambda_star"] if o["lambda_star"] is not None else min(lams)
        # validity of the plain closed-form bound (neighbor = whole line)
        rep = oracle.gap_check(model, lams, neighbor=o["neighbor"], lambda_star=lam_star)
        print(f"# domain={dom} B={o['B'] if model.bounded else 'inf'} neighbor={rep.neighbor:.6g} "
              f"lambda_star={rep.lambda_star:.6g} gap_bound={rep.bound:.10g}")
        print("lambda,log_z,log_zbar_line,log_zbar_neighbor,gap,log_lower,upper_ok,gap_ok,lower_ok")
        for i, lam in enumerate(rep.lambdas):
            log_line = oracle.log_upper_bound(model, lam)
            log_low = oracle.log_lower_bound(model, lam, rep.lambda_star, rep.neighbor)
            up_ok = log_line >= rep.log_z[i] - 1e-8
            gap_ok = bool(rep.passed[i])
            low_ok = rep.log_z[i] >= log_low - 1e-8
            ok = up_ok and gap_ok and low_ok
            failures += not ok
            print(
                f"{lam:.6g},{rep.log_z[i]:.12g},{log_line:.12g},{rep.log_zbar[i]:.12g},{rep.gaps[i]:.6e},"
                f"{log_low:.12g},{'PASS' if up_ok else 'FAIL'},{'PASS' if gap_ok else 'FAIL'},{'PASS' if low_ok else 'FAIL'}"
            )
    print(f"# {'all checks passed' if failures == 0 else f'{failures} grid point(s) failed'}")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mdlpenalty", description="Penalty-weight selection by minimizing an upper bound of the LNML code length.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--n", help="comma-separated sample sizes")
        p.add_argument("--seeds", type=int, help="number of seeds (0 .. seeds-1)")
        p.add_argument("--methods", help="comma-separated method ids")
        p.add_argument("--folds", type=int)
        p.add_argument("--grid-lo", dest="grid_lo", type=float)
        p.add_argument("--grid-hi", dest="grid_hi", type=float)
        p.add_argument("--grid-count", dest="grid_count", type=int)
        p.add_argument("--box-lo", dest="box_lo", type=float)
        p.add_argument("--box-hi", dest="box_hi", type=float)
        p.add_argument("--max-iter", dest="max_iter", type=int)
        p.add_argument("--timing", action="store_const", const=True, help="record wall time (output is then not reproducible)")
        p.add_argument("--out", help="CSV output path (default: stdout)")
        p.add_argument("--json", help="write a JSON summary of median metrics here")

    r = sub.add_parser("ridge", help="linear regression comparison")
    common(r)
    r.add_argument("--synthetic", choices=["uncorrelated", "correlated"])
    r.add_argument("--csv", help="headered numeric CSV instead of synthetic data")
    r.add_argument("--target", help="target column of --csv")
    r.add_argument("--test-size", dest="test_size", type=int, help="synthetic test rows")
    r.add_argument("--test-fraction", dest="test_fraction", type=float, help="CSV holdout fraction")
    r.add_argument("--noise-sd", dest="noise_sd", type=float)
    r.set_defaults(func=cmd_ridge)

    g = sub.add_parser("ggm", help="double-ring precision-matrix comparison")
    common(g)
    g.add_argument("--m", help="comma-separated dimensions (>= 5)")
    g.add_argument("--gamma", type=float, help="extended BIC gamma")
    g.set_defaults(func=cmd_ggm)

    b = sub.add_parser("boundcheck", help="check the normalizer bounds against quadrature")
    b.add_argument("--config")
    b.add_argument("--domain", choices=["bounded", "unbounded", "both"])
    b.add_argument("--B", type=float, help="half-width of the bounded parameter domain")
    b.add_argument("--lambda", dest="lambda_", help="comma-separated weights (default: 20 log-spaced in [1e-2, 1e2])")
    b.add_argument("--neighbor", type=float, help="neighbor half-width (default: the one minimizing the gap bound)")
    b.add_argument("--lambda-star", dest="lambda_star", type=float)
    b.set_defaults(func=cmd_boundcheck)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, InvalidInputError, KeyError, FileNotFoundError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        ap.print_usage(sys.stderr)
        print(f"mdlpenalty: error: {msg}", file=sys.stderr)
        return 2
    except oracle.QuadratureError as exc:
        print(f"mdlpenalty: quadrature failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
