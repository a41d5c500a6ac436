"""Command-line front end: ``arlasso {generate,select,benchmark,evaluate}``.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .benchmark import benchmark
from .config import RunConfig, load_config
from .data import example_config, generate, load_csv, load_dataset, preprocess, save_dataset
from .evaluation import group_confusion, logistic_refit_eval, ols_refit_eval, precision_recall_f1
from .exceptions import ConfigError
from .groups import MODES
from .methods import ARL_METHODS, METHODS, base_of, run_base
from .rescue import arl_select
from .rng import derive_seed

log = logging.getLogger("arlasso")


def _workers(flag):
    if flag is not None:
        return flag
    env = os.environ.get("ARL_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"ARL_WORKERS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return cfg.with_overrides(seed=args.seed, method=getattr(args, "method", None), mode=args.mode,
                              tau_corr=args.tau_corr, tau_sil=args.tau_sil, m=args.m, tau_co=args.tau_co)


def _datasets(cfg):
    return cfg.datasets or {"data": example_config("1", seed=cfg.seed)}


def _load_data(args, cfg):
    """Dataset from ``--data DIR``, ``--csv FILE --target COL`` or the config's first [data] section."""
    if args.data:
        return load_dataset(args.data)
    if args.csv:
        if not args.target:
            raise ConfigError("--csv requires --target")
        raw = load_csv(args.csv, args.target)
        return preprocess(raw, split_seed=cfg.seed, test_fraction=args.test_fraction, task=args.task,
                          log_target=args.log_target), None
    name, gen = next(iter(_datasets(cfg).items()))
    return generate(gen)


def _select(cfg, ds):
    X, y = ds.X_train, ds.y_train
    if cfg.method in ARL_METHODS:
        params = replace(cfg.arl, base=base_of(cfg.method), seed=cfg.seed, ensemble=cfg.ensemble)
        return arl_select(X, y, params)
    return run_base(cfg.method, X, y, derive_seed(cfg.seed, "global"), cfg.arl.global_phase, cfg.ensemble), None


def cmd_generate(args, cfg):
    out = Path(args.out)
    sets = _datasets(cfg)
    for name, gen in sets.items():
        ds, truth = generate(gen)
        target = out if len(sets) == 1 else out / name
        for path in save_dataset(ds, target, truth):
            log.info("wrote %s", path)
    return 0


def cmd_select(args, cfg):
    ds, _ = _load_data(args, cfg)
    res, report = _select(cfg, ds)
    blob = {"method": cfg.method, "support": [int(j) for j in res.support],
            "coefficients": {str(int(j)): float(res.coefficients[j]) for j in res.support},
            "intercept": res.intercept, "lambda": res.lam}
    if report is not None:
        blob["report"] = report.to_dict()
    text = json.dumps(blob, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_benchmark(args, cfg):
    if args.reps is not None:
        cfg.reps = args.reps
    if args.methods:
        cfg.methods = args.methods
    cfg.datasets = _datasets(cfg)
    summary = benchmark(cfg, args.out, workers=_workers(args.workers))
    for row in summary:
        log.info("%s %-12s F1 %.3f  precision %.3f  recall %.3f  selected %.1f%s", row["example"],
                 row["method"], row["f1_mean"], row["precision_mean"], row["recall_mean"],
                 row["n_selected_mean"], "  (partial)" if row["partial"] else "")
    return 0


def cmd_evaluate(args, cfg):
    ds, truth = _load_data(args, cfg)
    res, _ = _select(cfg, ds)
    blob = {"method": cfg.method, "n_selected": res.n_selected}
    if truth is not None:
        cc = group_confusion(res.support, truth)
        prec, rec, f1 = precision_recall_f1(cc)
        blob.update(tp=cc.tp, fp=cc.fp, fn=cc.fn, precision=prec, recall=rec, f1=f1)
    if len(ds.test_idx):
        if ds.task == "binary-classification":
            blob["accuracy"] = logistic_refit_eval(ds, res.support)
        else:
            blob["normalized_rmse"] = ols_refit_eval(ds, res.support)
    print(json.dumps(blob, indent=1))
    return 0


COMMANDS = {"generate": cmd_generate, "select": cmd_select, "benchmark": cmd_benchmark, "evaluate": cmd_evaluate}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file")
    common.add_argument("--out", help="output file or directory")
    common.add_argument("--seed", type=int, help="master seed (default 42)")
    common.add_argument("--workers", type=int, help="parallel workers (default $ARL_WORKERS or all cores)")
    common.add_argument("--method", choices=METHODS)
    common.add_argument("--mode", choices=MODES, help="problem-group mode")
    common.add_argument("--tau-corr", type=float)
    common.add_argument("--tau-sil", type=float)
    common.add_argument("--m", type=int, help="number of data subsets")
    common.add_argument("--tau-co", type=int)
    common.add_argument("-v", "--verbose", action="store_true")
    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", help="directory holding X.csv and y.csv")
    data.add_argument("--csv", help="raw CSV file with a header row")
    data.add_argument("--target", help="target column of --csv")
    data.add_argument("--task", default="regression", choices=("regression", "binary-classification"))
    data.add_argument("--log-target", action="store_true")
    data.add_argument("--test-fraction", type=float, default=0.2)

    parser = argparse.ArgumentParser(prog="arlasso", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="write synthetic datasets")
    sub.add_parser("select", parents=[common, data], help="run one method, print JSON")
    b = sub.add_parser("benchmark", parents=[common], help="repeated-simulation tables")
    b.add_argument("--reps", type=int)
    b.add_argument("--methods", type=lambda s: [m.strip() for m in s.split(",") if m.strip()])
    sub.add_parser("evaluate", parents=[common, data], help="select then score a dataset")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.command in ("generate", "benchmark") and not args.out:
        parser.error(f"{args.command} requires --out")
    if args.command == "benchmark" and args.methods:
        bad = [m for m in args.methods if m not in METHODS]
        if bad:
            parser.error(f"unknown method(s) {bad}; choose from {list(METHODS)}")
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"arlasso: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures map to exit 1
        log.debug("traceback", exc_info=True)
        print(f"arlasso: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
