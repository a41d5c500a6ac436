"""Name-based dispatch for the selection methods used by ARL, benchmarks and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .ensembles import EnsembleSpec, random_lasso, stability_selection
from .rng import derive_seed
from .solvers import (GLOBAL_TOL, SUBSET_TOL, CvSpec, SelectionResult, adaptive_lasso,
                      cv_lasso, elastic_net_cv)

BASE_METHODS = ("cvlasso", "alasso", "enet", "ss", "rlasso")
ARL_METHODS = ("arl",) + tuple(f"arl-{m}" for m in BASE_METHODS)
METHODS = BASE_METHODS + ARL_METHODS


@dataclass(frozen=True)
class Phase:
    folds: int
    tol: float
    B: int


GLOBAL = Phase(folds=5, tol=GLOBAL_TOL, B=200)
SUBSET = Phase(folds=3, tol=SUBSET_TOL, B=50)


def run_base(method: str, X, y, seed: int, phase: Phase = GLOBAL,
             ensemble: Optional[EnsembleSpec] = None) -> SelectionResult:
    """Fit one non-ARL method; ``seed`` drives its CV folds and resampling."""
    cv = CvSpec(phase.folds, seed=derive_seed(seed, "cv", method))
    if method == "cvlasso":
        return cv_lasso(X, y, cv, phase.tol)
    if method == "alasso":
        return adaptive_lasso(X, y, cv, phase.tol)
    if method == "enet":
        return elastic_net_cv(X, y, cv, tol=phase.tol)
    if method in ("ss", "rlasso"):
        # iteration count follows the phase; threshold, q1/q2 and ridge_alpha come from EnsembleSpec
        spec = replace(ensemble or EnsembleSpec(), B=phase.B, folds=phase.folds, tol=phase.tol,
                       seed=derive_seed(seed, "ensemble", method))
        if method == "ss":
            return stability_selection(X, y, replace(spec, mode="subsample-half"))
        return random_lasso(X, y, replace(spec, mode="bootstrap"))
    raise ValueError(f"unknown base method {method!r}; choose from {BASE_METHODS}")


def base_of(method: str) -> str:
    """Baseline used by an ARL method name (``arl`` means ``arl-cvlasso``)."""
    if method == "arl":
        return "cvlasso"
    if method.startswith("arl-") and method[4:] in BASE_METHODS:
        return method[4:]
    raise ValueError(f"{method!r} is not an ARL method")
