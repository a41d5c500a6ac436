"""Repeated-simulation benchmark: per-rep records, resumable, worker-count independent."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import time
import traceback
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from .data import generate
from .evaluation import group_confusion, precision_recall_f1
from .methods import ARL_METHODS, base_of, run_base
from .rescue import arl_select
from .rng import derive_seed

log = logging.getLogger(__name__)

TABLE_COLUMNS = ["example", "method", "reps", "failed", "f1_mean", "f1_std", "precision_mean", "precision_std",
                 "recall_mean", "recall_std", "n_selected_mean", "n_selected_std", "partial"]


def _fingerprint(gen, methods, arl, ensemble) -> str:
    blob = json.dumps([asdict(gen), list(methods), repr(arl), repr(ensemble)], sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def run_rep(name, gen, rep, methods, arl, ensemble, seed):
    """Generate one dataset and score every method on it.

    ARL methods reuse the matching baseline fit so both see the same P_G.
    """
    gen = replace(gen, seed=derive_seed(seed, "dataset", name, rep))
    ds, truth = generate(gen)
    rep_seed = derive_seed(seed, "rep", name, rep)
    X, y = ds.X_train, ds.y_train
    baselines, rows = {}, []
    ens = arl.ensemble or ensemble

    def baseline(m):
        if m not in baselines:
            baselines[m] = run_base(m, X, y, derive_seed(rep_seed, "global"), arl.global_phase, ens)
        return baselines[m]

    for method in methods:
        t0 = time.perf_counter()
        row = {"example": name, "rep": rep, "method": method}
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                if method in ARL_METHODS:
                    params = replace(arl, base=base_of(method), seed=rep_seed, ensemble=ens)
                    res, report = arl_select(X, y, params, baseline=baseline(base_of(method)))
                    row["rescued"] = report.rescued
                else:
                    res = baseline(method)
            cc = group_confusion(res.support, truth)
            prec, rec, f1 = precision_recall_f1(cc)
            row.update(tp=cc.tp, fp=cc.fp, fn=cc.fn, precision=prec, recall=rec, f1=f1,
                       n_selected=res.n_selected, support=[int(j) for j in res.support], error=None)
        except Exception as exc:
            log.warning("%s rep %d %s failed: %s", name, rep, method, exc)
            row.update(error=f"{type(exc).__name__}: {exc}", traceback=traceback.format_exc())
        row["seconds"] = round(time.perf_counter() - t0, 3)
        rows.append(row)
    return rows


def _unit(args):
    name, gen, rep, methods, arl, ensemble, seed, path, fp = args
    rows = run_rep(name, gen, rep, methods, arl, ensemble, seed)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps({"fingerprint": fp, "rows": rows}, indent=1))
    os.replace(tmp, path)
    return rows


def _load_done(path, fp):
    try:
        blob = json.loads(path.read_text())
    except (OSError, ValueError):
        return None
    return blob["rows"] if blob.get("fingerprint") == fp else None


def summarize(rows, datasets, methods):
    """One table row per (dataset, method) cell, in config order."""
    out = []
    for name in datasets:
        for method in methods:
            cell = [r for r in rows if r["example"] == name and r["method"] == method]
            ok = [r for r in cell if r.get("error") is None]
            stat = {}
            for key in ("f1", "precision", "recall", "n_selected"):
                v = np.array([r[key] for r in ok], dtype=float)
                stat[f"{key}_mean"] = float(v.mean()) if v.size else float("nan")
                stat[f"{key}_std"] = float(v.std()) if v.size else float("nan")
            out.append({"example": name, "method": method, "reps": len(ok), "failed": len(cell) - len(ok),
                        **stat, "partial": len(ok) < len(cell)})
    return out


def table_csv(summary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for row in summary:
        w.writerow([f"{row[c]:.6f}" if isinstance(row[c], float) else row[c] for c in TABLE_COLUMNS])
    return buf.getvalue()


def benchmark(cfg, out_dir, workers: int = 1):
    """Run every (dataset, rep) unit, reusing finished units found in ``out_dir``.

    Writes ``table.csv`` (cell means/stds) and ``detail.json`` (per-rep rows)
    and returns the summary rows.
    """
    out = Path(out_dir)
    (out / "reps").mkdir(parents=True, exist_ok=True)
    jobs, rows_by_key = [], {}
    for name, gen in cfg.datasets.items():
        fp = _fingerprint(gen, cfg.methods, cfg.arl, cfg.ensemble) + f"-{cfg.seed}"
        for rep in range(cfg.reps):
            path = out / "reps" / f"{name}__{rep:04d}.json"
            done = _load_done(path, fp)
            if done is not None:
                rows_by_key[(name, rep)] = done
            else:
                jobs.append((name, gen, rep, cfg.methods, cfg.arl, cfg.ensemble, cfg.seed, path, fp))
    log.info("%d units cached, %d to run on %d worker(s)", len(rows_by_key), len(jobs), workers)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_unit, jobs))
    else:
        results = [_unit(j) for j in jobs]
    for job, rows in zip(jobs, results):
        rows_by_key[(job[0], job[2])] = rows
    rows = [r for key in sorted(rows_by_key, key=lambda k: (list(cfg.datasets).index(k[0]), k[1]))
            for r in rows_by_key[key]]
    summary = summarize(rows, list(cfg.datasets), cfg.methods)
    (out / "table.csv").write_text(table_csv(summary))
    (out / "detail.json").write_text(json.dumps({"seed": cfg.seed, "reps": cfg.reps, "rows": rows}, indent=1))
    return summary
