"""Group-aware selection metrics and predictive refit evaluation."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .solvers import ols

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other):
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


def _tr_rule(k, size):
    # exactly one representative counts; extras are false positives
    if k == 0:
        return ConfusionCounts(0, 0, 1)
    return ConfusionCounts(1, k - 1, 0)


def _fr_rule(k, size):
    return ConfusionCounts(k, 0, size - k)


def group_confusion(selection, truth) -> ConfusionCounts:
    """TP/FP/FN under the group-aware scoring rules.

    TR groups score as one unit (one TP for any hit, FP for each extra);
    FR features score individually; DI hits are TP, misses FN; any selected
    unimportant feature is an FP. MR groups split into their TR and FR halves.
    """
    p = len(truth.category)
    sel = set()
    for j in selection:
        j = int(j)
        if not 0 <= j < p:
            raise IndexError(f"selected index {j} outside [0, {p})")
        sel.add(j)
    total = ConfusionCounts()
    in_group = set()
    for g in truth.groups:
        in_group.update(g.indices)
        if g.category == "TR":
            total += _tr_rule(len(sel.intersection(g.indices)), len(g.indices))
        elif g.category == "FR":
            total += _fr_rule(len(sel.intersection(g.indices)), len(g.indices))
        elif g.category == "MR":
            tr = [j for j in g.indices if truth.category[j] == "MR_TR"]
            fr = [j for j in g.indices if truth.category[j] == "MR_FR"]
            total += _tr_rule(len(sel.intersection(tr)), len(tr))
            total += _fr_rule(len(sel.intersection(fr)), len(fr))
        else:
            raise ValueError(f"unknown group category {g.category!r}")
    tp = fp = fn = 0
    for j, cat in enumerate(truth.category):
        if j in in_group:
            continue
        if cat == "DI":
            tp += j in sel
            fn += j not in sel
        elif cat in ("U", "U_corr"):
            fp += j in sel
    return total + ConfusionCounts(tp, fp, fn)


def precision_recall_f1(counts: ConfusionCounts):
    tp, fp, fn = counts.tp, counts.fp, counts.fn
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def normalized_rmse(y_true, y_pred, sigma_y: float) -> float:
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    return float(np.sqrt(np.mean((y_true - y_pred) ** 2)) / sigma_y)


def ols_refit_eval(dataset, support, ridge: float = 1e-6) -> float:
    """Normalized test RMSE of an OLS refit on the selected columns.

    The fit uses training rows; sigma_y is the (population) standard
    deviation of the training target. When the support has at least as
    many columns as there are test rows, a small ridge keeps the fit
    determined.
    """
    sup = sorted(int(j) for j in support)
    Xtr, ytr = dataset.X_train, dataset.y_train
    sigma_y = float(ytr.std())
    if not sup:
        pred = np.full(len(dataset.test_idx), ytr.mean())
        return normalized_rmse(dataset.y_test, pred, sigma_y)
    if len(sup) >= len(dataset.test_idx):
        warnings.warn("support is not smaller than the test set; using a ridge-stabilized refit", RuntimeWarning)
        A = Xtr[:, sup]
        am = A.mean(axis=0)
        Ac = A - am
        b = np.linalg.solve(Ac.T @ Ac + ridge * len(ytr) * np.eye(len(sup)), Ac.T @ (ytr - ytr.mean()))
        coef = np.zeros(dataset.p)
        coef[sup] = b
        icpt = ytr.mean() - am @ b
    else:
        coef, icpt = ols(Xtr, ytr, sup)
    return normalized_rmse(dataset.y_test, dataset.X_test @ coef + icpt, sigma_y)


def _sigmoid(z):
    return 0.5 * (1 + np.tanh(0.5 * z))


def logistic_fit(X, y, ridge: float = 1e-8, tol: float = 1e-6, max_iter: int = 100):
    """Newton-Raphson logistic regression with intercept.

    Returns (coef, intercept, converged). A tiny ridge on the slopes keeps
    the Hessian invertible; separable data stops at the iteration cap.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    A = np.column_stack([np.ones(n), X])
    w = np.zeros(k + 1)
    pen = np.full(k + 1, ridge)
    pen[0] = 0.0
    for _ in range(max_iter):
        mu = _sigmoid(A @ w)
        grad = A.T @ (mu - y) / n + pen * w
        if np.linalg.norm(grad) < tol:
            return w[1:], float(w[0]), True
        H = (A * (mu * (1 - mu))[:, None]).T @ A / n + np.diag(pen)
        H[np.diag_indices_from(H)] += 1e-12
        w = w - np.linalg.solve(H, grad)
    warnings.warn("logistic regression hit the iteration cap (possible separation)", RuntimeWarning)
    return w[1:], float(w[0]), False


def logistic_refit_eval(dataset, support) -> float:
    """Test accuracy of a logistic refit on the selected columns (0.5 cutoff)."""
    ytr = dataset.y_train
    if len(np.unique(ytr)) < 2:
        raise ValueError("training target has a single class")
    sup = sorted(int(j) for j in support)
    coef, icpt, _ = logistic_fit(dataset.X_train[:, sup], ytr)
    prob = _sigmoid(dataset.X_test[:, sup] @ coef + icpt)
    return float(np.mean((prob >= 0.5) == (dataset.y_test == 1)))
