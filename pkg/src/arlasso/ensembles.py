"""Resampling ensembles over a base Lasso: Stability Selection and Random Lasso."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import PreconditionError
from .rng import derive_seed, substream
from .solvers import (GLOBAL_TOL, MAX_ITER, CvSpec, SelectionResult, adaptive_lasso,
                      cv_lasso, lasso_cd, ols)

MODES = ("bootstrap", "subsample-half", "identity")


@dataclass
class EnsembleSpec:
    """Resampling settings.

    ``threshold`` is the selection-frequency cutoff for Stability Selection.
    ``ridge_alpha`` fixes the ridge stage of the adaptive-Lasso base learner
    used by Stability Selection; ``None`` substitutes the global CV-Lasso
    penalty (the large-sample variant).
    """

    B: int = 200
    mode: str = "subsample-half"
    threshold: float = 0.75
    q1: float = 0.10
    q2: float = 0.10
    seed: int = 42
    folds: int = 5
    tol: float = GLOBAL_TOL
    ridge_alpha: Optional[float] = 1.0

    def __post_init__(self):
        if self.B < 1:
            raise PreconditionError("B must be >= 1")
        if self.mode not in MODES:
            raise PreconditionError(f"mode must be one of {MODES}")
        if not 0 < self.threshold <= 1:
            raise PreconditionError("threshold must lie in (0, 1]")
        if not (0 < self.q1 <= 1 and 0 < self.q2 <= 1):
            raise PreconditionError("q1 and q2 must lie in (0, 1]")


def _rows(rng, n, mode):
    if mode == "bootstrap":
        return rng.integers(0, n, size=n)
    if mode == "subsample-half":
        return np.sort(rng.choice(n, size=n // 2, replace=False))
    return np.arange(n)


def stable_support(hits, B: int, threshold: float) -> np.ndarray:
    """Indices selected in at least ``threshold * B`` runs (integer comparison)."""
    # ceil on counts avoids 150/200 landing a hair under 0.75 in floating point
    return np.flatnonzero(np.asarray(hits) >= math.ceil(threshold * B - 1e-9))


def stability_selection(X, y, spec: Optional[EnsembleSpec] = None, lam: Optional[float] = None) -> SelectionResult:
    """Keep features whose adaptive-Lasso selection frequency reaches the threshold.

    The Lasso penalty is fixed once, by CV on the full data, and reused on
    every half-sample. Each resample visits the columns in a fresh random
    order, so ties between near-collinear columns are not broken by column
    index. Coefficients are an OLS refit on the stable set.
    """
    spec = spec or EnsembleSpec()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    n_sub = n // 2 if spec.mode == "subsample-half" else n
    if n_sub < 3:
        raise PreconditionError(f"{n} rows are too few to fit on resamples of size {n_sub}")
    if lam is None:
        lam = cv_lasso(X, y, CvSpec(spec.folds, seed=derive_seed(spec.seed, "cv", "ss")), spec.tol).lam
    ridge_alpha = lam if spec.ridge_alpha is None else spec.ridge_alpha
    hits = np.zeros(p, dtype=np.int64)
    for b in range(spec.B):
        rng = substream(spec.seed, "ensemble", "ss", b)
        rows = _rows(rng, n, spec.mode)
        order = rng.permutation(p)
        if np.ptp(y[rows]) == 0:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = adaptive_lasso(X[np.ix_(rows, order)], y[rows], tol=spec.tol, max_iter=MAX_ITER, lam=lam,
                                 ridge_alpha=ridge_alpha)
        hits[order[res.support]] += 1
    freq = hits / spec.B
    support = stable_support(hits, spec.B, spec.threshold)
    coef, icpt = ols(X, y, support)
    return SelectionResult.from_coef(coef, icpt, float(lam), "ss", info={"frequency": freq, "hits": hits})


def _n_features(q, p):
    return max(1, min(p, int(round(q * p))))


def random_lasso(X, y, spec: Optional[EnsembleSpec] = None, lam: Optional[float] = None) -> SelectionResult:
    """Two-stage Random Lasso.

    The Lasso penalty is fixed once by CV on the full data (as for
    Stability Selection) and reused on every bootstrap draw. Stage one
    scores importance as |mean coefficient| over random feature draws;
    stage two samples features in proportion to importance and averages
    the coefficients. Features with |average| > 1/n are kept.
    """
    spec = spec or EnsembleSpec(mode="bootstrap")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if lam is None:
        lam = cv_lasso(X, y, CvSpec(spec.folds, seed=derive_seed(spec.seed, "cv", "rl")), spec.tol).lam

    def run(stage, probs, q):
        total = np.zeros(p)
        k = _n_features(q, p)
        if probs is not None:
            k = min(k, int(np.count_nonzero(probs)))
        for b in range(spec.B):
            rng = substream(spec.seed, "ensemble", f"rl{stage}", b)
            rows = _rows(rng, n, spec.mode)
            # draw order doubles as the column visiting order
            cols = rng.choice(p, size=k, replace=False, p=probs)
            if np.ptp(y[rows]) == 0:
                continue
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                res = lasso_cd(X[np.ix_(rows, cols)], y[rows], lam, spec.tol, MAX_ITER)
            total[cols] += res.coefficients
        return total / spec.B

    importance = np.abs(run(1, None, spec.q1))
    if importance.sum() == 0:
        warnings.warn("all stage-one importances are zero; sampling stage two uniformly", RuntimeWarning)
        probs = None
    else:
        probs = importance / importance.sum()
    beta = run(2, probs, spec.q2)
    beta = np.where(np.abs(beta) > 1.0 / n, beta, 0.0)
    icpt = float(y.mean() - X.mean(axis=0) @ beta)
    return SelectionResult.from_coef(beta, icpt, float(lam), "rlasso", info={"importance": importance})
