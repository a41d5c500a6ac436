"""Penalized least-squares solvers: Lasso, elastic net, ridge, adaptive Lasso.

All penalized fits minimize

    (1/(2n)) ||y - X b||^2 + lam * (r ||b||_1 + (1 - r)/2 ||b||_2^2)

with an unpenalized intercept handled by centering. ``r = 1`` is the Lasso.
Coordinate descent runs in a numba kernel; the Python layer handles
centering, cross-validation and bookkeeping.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .exceptions import DegenerateSignalError, PreconditionError

GLOBAL_TOL = 0.005
SUBSET_TOL = 0.01
MAX_ITER = 1000
ADAPTIVE_EPS = 1e-10
DEFAULT_L1_RATIOS = (0.1, 0.5, 0.7, 0.9, 0.95, 0.99, 1.0)


@dataclass
class SelectionResult:
    """Outcome of a feature-selection method.

    ``support`` is the sorted index set of non-zero ``coefficients``.
    ``lam`` is the regularization actually used (``None`` for methods that
    aggregate over many fits without a single penalty).
    """

    support: np.ndarray
    coefficients: np.ndarray
    intercept: float
    lam: Optional[float]
    method: str
    converged: bool = True
    n_iter: int = 0
    info: dict = field(default_factory=dict)

    @classmethod
    def from_coef(cls, coef, intercept, lam, method, **kw) -> "SelectionResult":
        coef = np.asarray(coef, dtype=float)
        return cls(np.flatnonzero(coef), coef, float(intercept), lam, method, **kw)

    @property
    def n_selected(self) -> int:
        return int(self.support.size)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "support": [int(j) for j in self.support],
            "coefficients": {str(int(j)): float(self.coefficients[j]) for j in self.support},
            "intercept": float(self.intercept),
            "lambda": None if self.lam is None else float(self.lam),
            "converged": bool(self.converged),
        }


@dataclass
class CvSpec:
    """K-fold cross-validation protocol.

    ``grid`` of ``None`` means "build the default log-spaced grid from the
    data"; otherwise it must be strictly decreasing and positive.
    """

    folds: int = 5
    grid: Optional[Sequence[float]] = None
    seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise PreconditionError(f"folds must be >= 2, got {self.folds}")
        if self.grid is not None:
            g = np.asarray(self.grid, dtype=float)
            if g.ndim != 1 or g.size == 0 or np.any(g <= 0) or np.any(np.diff(g) >= 0):
                raise PreconditionError("CV grid must be positive and strictly decreasing")
            self.grid = g


def soft_threshold(z: float, t: float) -> float:
    if t < 0:
        raise ValueError("threshold must be non-negative")
    return float(np.sign(z) * max(abs(z) - t, 0.0))


# ---------------------------------------------------------------------------
# numba kernels

@njit(cache=True)
def _soft(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@njit(cache=True)
def _kkt_violation(X, r, beta, lam, l1_ratio):
    n, p = X.shape
    worst = 0.0
    for j in range(p):
        g = 0.0
        for i in range(n):
            g += X[i, j] * r[i]
        g = g / n - lam * (1.0 - l1_ratio) * beta[j]
        if beta[j] > 0:
            v = abs(g - lam * l1_ratio)
        elif beta[j] < 0:
            v = abs(g + lam * l1_ratio)
        else:
            v = abs(g) - lam * l1_ratio
        if v > worst:
            worst = v
    return worst


@njit(cache=True)
def _cd(X, y, beta, col_sq, lam, l1_ratio, tol, max_iter):
    """Cyclic coordinate descent in place on ``beta``; X, y centered.

    Returns (sweeps, converged).  Sweeps alternate between the full
    coordinate set and the active set; convergence needs a full sweep with
    max |change| < tol and every KKT condition satisfied to within tol.
    """
    n, p = X.shape
    r = y.copy()
    for j in range(p):
        if beta[j] != 0.0:
            for i in range(n):
                r[i] -= X[i, j] * beta[j]
    l1 = n * lam * l1_ratio
    l2 = n * lam * (1.0 - l1_ratio)
    sweeps = 0
    active_only = False
    while sweeps < max_iter:
        max_delta = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            bj = beta[j]
            if active_only and bj == 0.0:
                continue
            rho = 0.0
            for i in range(n):
                rho += X[i, j] * r[i]
            rho += col_sq[j] * bj
            # relative guard so lambda == lambda_max gives exact zeros despite round-off
            new = _soft(rho, l1 * (1.0 + 1e-12)) / (col_sq[j] + l2)
            if new != bj:
                d = new - bj
                for i in range(n):
                    r[i] -= d * X[i, j]
                beta[j] = new
                if abs(d) > max_delta:
                    max_delta = abs(d)
        sweeps += 1
        if max_delta < tol:
            if active_only:
                active_only = False
            elif _kkt_violation(X, r, beta, lam, l1_ratio) < tol:
                return sweeps, True
        else:
            active_only = True
    return sweeps, False


@njit(cache=True)
def _cd_path(X, y, lams, l1_ratio, tol, max_iter):
    n, p = X.shape
    col_sq = np.zeros(p)
    for j in range(p):
        s = 0.0
        for i in range(n):
            s += X[i, j] * X[i, j]
        col_sq[j] = s
    coefs = np.zeros((lams.shape[0], p))
    sweeps = np.zeros(lams.shape[0], dtype=np.int64)
    ok = np.zeros(lams.shape[0], dtype=np.bool_)
    beta = np.zeros(p)
    for k in range(lams.shape[0]):
        it, conv = _cd(X, y, beta, col_sq, lams[k], l1_ratio, tol, max_iter)
        coefs[k] = beta
        sweeps[k] = it
        ok[k] = conv
    return coefs, sweeps, ok


# ---------------------------------------------------------------------------
# helpers

def _check_finite(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: X {X.shape}, y {y.shape}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite values in X or y")
    return X, y


def _center(X, y):
    xm = X.mean(axis=0)
    ym = float(y.mean())
    return np.asfortranarray(X - xm), y - ym, xm, ym


def objective(X, y, coef, intercept, lam, l1_ratio=1.0) -> float:
    """Penalized objective value for a fitted (coef, intercept)."""
    r = y - X @ coef - intercept
    n = len(y)
    pen = l1_ratio * np.abs(coef).sum() + 0.5 * (1 - l1_ratio) * (coef @ coef)
    return float(r @ r / (2 * n) + lam * pen)


def lambda_max(X, y, l1_ratio: float = 1.0) -> float:
    X, y = _check_finite(X, y)
    Xc, yc, _, _ = _center(X, y)
    return float(np.max(np.abs(Xc.T @ yc)) / (len(y) * l1_ratio))


def lambda_grid(X, y, n_points: int = 100, ratio: float = 1e-3, l1_ratio: float = 1.0) -> np.ndarray:
    """Log-spaced descending grid from lambda_max to lambda_max * ratio."""
    if n_points < 2:
        raise PreconditionError("n_points must be >= 2")
    if not 0 < ratio < 1:
        raise PreconditionError("ratio must lie in (0, 1)")
    y = np.asarray(y, dtype=float)
    if np.var(y) == 0:
        raise DegenerateSignalError("response has zero variance")
    lmax = lambda_max(X, y, l1_ratio)
    if lmax <= 0:
        raise DegenerateSignalError("no feature is correlated with the response")
    return np.geomspace(lmax, lmax * ratio, n_points)


# ---------------------------------------------------------------------------
# single fits

def enet_cd(X, y, lam, l1_ratio=1.0, tol=GLOBAL_TOL, max_iter=MAX_ITER,
            method="enet") -> SelectionResult:
    if lam < 0:
        raise PreconditionError("lambda must be non-negative")
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    if not 0 < l1_ratio <= 1:
        raise PreconditionError("l1_ratio must lie in (0, 1]")
    X, y = _check_finite(X, y)
    Xc, yc, xm, ym = _center(X, y)
    coefs, sweeps, ok = _cd_path(Xc, yc, np.array([float(lam)]), float(l1_ratio), float(tol), int(max_iter))
    coef = coefs[0]
    if not ok[0]:
        warnings.warn(f"coordinate descent did not converge in {max_iter} sweeps", RuntimeWarning)
    return SelectionResult.from_coef(coef, ym - xm @ coef, float(lam), method,
                                     converged=bool(ok[0]), n_iter=int(sweeps[0]),
                                     info={"l1_ratio": float(l1_ratio)})


def lasso_cd(X, y, lam, tol=GLOBAL_TOL, max_iter=MAX_ITER) -> SelectionResult:
    """Lasso by cyclic coordinate descent at a single penalty ``lam``."""
    return enet_cd(X, y, lam, 1.0, tol, max_iter, method="lasso")


def enet_path(X, y, lams, l1_ratio=1.0, tol=GLOBAL_TOL, max_iter=MAX_ITER):
    """Warm-started path. Returns (coefs[L, p], intercepts[L], converged[L])."""
    X, y = _check_finite(X, y)
    Xc, yc, xm, ym = _center(X, y)
    lams = np.asarray(lams, dtype=float)
    coefs, _, ok = _cd_path(Xc, yc, lams, float(l1_ratio), float(tol), int(max_iter))
    return coefs, ym - coefs @ xm, ok


def ols(X, y, support=None):
    """Least squares with intercept on the given columns (min-norm if rank deficient).

    Returns (coef over all p columns, intercept).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    p = X.shape[1]
    coef = np.zeros(p)
    sup = np.arange(p) if support is None else np.asarray(sorted(support), dtype=int)
    if sup.size == 0:
        return coef, float(y.mean())
    Xs = X[:, sup]
    xm = Xs.mean(axis=0)
    ym = y.mean()
    b, _, rank, _ = np.linalg.lstsq(Xs - xm, y - ym, rcond=None)
    if rank < sup.size:
        warnings.warn("rank-deficient OLS design; using minimum-norm solution", RuntimeWarning)
    coef[sup] = b
    return coef, float(ym - xm @ b)


# ---------------------------------------------------------------------------
# cross-validation

def kfold_indices(n: int, folds: int, seed: int):
    if folds > n:
        raise PreconditionError(f"cannot split {n} rows into {folds} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, folds)


def _cv_mse_path(X, y, lams, l1_ratio, cv: CvSpec, tol, max_iter):
    n = len(y)
    chunks = kfold_indices(n, cv.folds, cv.seed)
    errs = []
    for k, test in enumerate(chunks):
        train = np.setdiff1d(np.arange(n), test)
        if np.ptp(y[train]) == 0:
            warnings.warn(f"CV fold {k} has constant training response; skipped", RuntimeWarning)
            continue
        coefs, icpt, _ = enet_path(X[train], y[train], lams, l1_ratio, tol, max_iter)
        pred = X[test] @ coefs.T + icpt
        errs.append(np.mean((y[test][:, None] - pred) ** 2, axis=0))
    if not errs:
        raise DegenerateSignalError("every CV fold was skipped")
    return np.mean(errs, axis=0)


def _pick(mse):
    # grid is descending, so the first minimizer is the largest lambda
    return int(np.flatnonzero(mse == mse.min())[0])


def cv_lasso(X, y, cv: Optional[CvSpec] = None, tol=GLOBAL_TOL, max_iter=MAX_ITER) -> SelectionResult:
    """Lasso with lambda chosen by K-fold CV mean squared error, refit on all rows."""
    cv = cv or CvSpec()
    X, y = _check_finite(X, y)
    if cv.folds > len(y):
        raise PreconditionError(f"cannot split {len(y)} rows into {cv.folds} folds")
    grid = lambda_grid(X, y) if cv.grid is None else cv.grid
    mse = _cv_mse_path(X, y, grid, 1.0, cv, tol, max_iter)
    best = _pick(mse)
    coefs, icpt, ok = enet_path(X, y, grid[: best + 1], 1.0, tol, max_iter)
    return SelectionResult.from_coef(coefs[-1], icpt[-1], float(grid[best]), "cvlasso",
                                     converged=bool(ok[-1]),
                                     info={"grid": grid, "cv_mse": mse})


def elastic_net_cv(X, y, cv: Optional[CvSpec] = None, l1_ratios=DEFAULT_L1_RATIOS,
                   tol=GLOBAL_TOL, max_iter=MAX_ITER) -> SelectionResult:
    """Elastic net with (lambda, l1_ratio) chosen jointly by CV."""
    cv = cv or CvSpec()
    X, y = _check_finite(X, y)
    if cv.folds > len(y):
        raise PreconditionError(f"cannot split {len(y)} rows into {cv.folds} folds")
    ratios = [float(r) for r in l1_ratios]
    if not ratios or any(not 0 < r <= 1 for r in ratios):
        raise PreconditionError("l1_ratios must lie in (0, 1]")
    best = None
    for r in ratios:
        grid = lambda_grid(X, y, l1_ratio=r) if cv.grid is None else cv.grid
        mse = _cv_mse_path(X, y, grid, r, cv, tol, max_iter)
        k = _pick(mse)
        # strict improvement only: ties keep the earlier (sparser-leaning) ratio
        if best is None or mse[k] < best[0]:
            best = (mse[k], r, grid, k)
    _, r, grid, k = best
    coefs, icpt, ok = enet_path(X, y, grid[: k + 1], r, tol, max_iter)
    return SelectionResult.from_coef(coefs[-1], icpt[-1], float(grid[k]), "enet",
                                     converged=bool(ok[-1]), info={"l1_ratio": r})


# ---------------------------------------------------------------------------
# ridge and adaptive lasso

@dataclass
class RidgeFit:
    coefficients: np.ndarray
    intercept: float
    alpha: float


def default_ridge_grid() -> np.ndarray:
    return np.logspace(-5, 5, 100)


def _ridge_svd(Xc, yc, alphas):
    n = Xc.shape[0]
    U, s, Vt = np.linalg.svd(Xc, full_matrices=False)
    uty = U.T @ yc
    # rows: alphas, cols: features
    shrink = s[None, :] / (s[None, :] ** 2 + n * np.asarray(alphas)[:, None])
    return (shrink * uty[None, :]) @ Vt


def ridge(X, y, alpha: float) -> RidgeFit:
    """Closed-form ridge solving (Xc'Xc + n alpha I) b = Xc'yc."""
    if alpha <= 0:
        raise PreconditionError("ridge alpha must be positive")
    X, y = _check_finite(X, y)
    Xc, yc, xm, ym = _center(X, y)
    b = _ridge_svd(Xc, yc, [alpha])[0]
    return RidgeFit(b, float(ym - xm @ b), float(alpha))


def ridge_cv(X, y, grid=None, folds: int = 5, seed: int = 0) -> RidgeFit:
    alphas = default_ridge_grid() if grid is None else np.asarray(grid, dtype=float)
    if np.any(alphas <= 0):
        raise PreconditionError("ridge alphas must be positive")
    X, y = _check_finite(X, y)
    n = len(y)
    err = np.zeros(len(alphas))
    for test in kfold_indices(n, folds, seed):
        train = np.setdiff1d(np.arange(n), test)
        Xc, yc, xm, ym = _center(X[train], y[train])
        B = _ridge_svd(Xc, yc, alphas)
        pred = (X[test] - xm) @ B.T + ym
        err += np.mean((y[test][:, None] - pred) ** 2, axis=0)
    # ties -> stronger shrinkage
    a = float(alphas[err == err.min()].max())
    return ridge(X, y, a)


def adaptive_lasso(X, y, cv: Optional[CvSpec] = None, tol=GLOBAL_TOL, max_iter=MAX_ITER,
                   lam: Optional[float] = None, ridge_alpha: Optional[float] = None,
                   ridge_coef=None) -> SelectionResult:
    """Two-stage adaptive Lasso with ridge-derived weights.

    Weights are ``1 / (|b_ridge| + 1e-10)``. The ridge stage uses CV over
    ``logspace(-5, 5, 100)`` unless ``ridge_alpha`` or ``ridge_coef`` is given.
    The Lasso stage runs at ``lam``, defaulting to the CV-Lasso choice on
    the unweighted problem.
    """
    cv = cv or CvSpec()
    X, y = _check_finite(X, y)
    if ridge_coef is None:
        if ridge_alpha is None:
            ridge_coef = ridge_cv(X, y, folds=cv.folds, seed=cv.seed).coefficients
        else:
            ridge_coef = ridge(X, y, ridge_alpha).coefficients
    scale = np.abs(np.asarray(ridge_coef, dtype=float)) + ADAPTIVE_EPS
    if lam is None:
        lam = cv_lasso(X, y, cv, tol, max_iter).lam
    Xw = X * scale
    Xc, yc, _, ym = _center(Xw, y)
    coefs, sweeps, ok = _cd_path(Xc, yc, np.array([float(lam)]), 1.0, float(tol), int(max_iter))
    coef = coefs[0] * scale
    xm = X.mean(axis=0)
    return SelectionResult.from_coef(coef, ym - xm @ coef, float(lam), "alasso",
                                     converged=bool(ok[0]), n_iter=int(sweeps[0]),
                                     info={"weights": 1.0 / scale})
