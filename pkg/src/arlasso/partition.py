"""Sample partitioning: k-means, silhouette, clustering-basis heuristic."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import NoUsableSubsetsError, PreconditionError
from .rng import derive_seed

DROPPED = -1


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    n_iter: int


def _sq_dists(P, C):
    d = (P ** 2).sum(1)[:, None] - 2 * P @ C.T + (C ** 2).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _kmeans_pp(P, k, rng):
    n = len(P)
    centers = np.empty((k, P.shape[1]))
    centers[0] = P[rng.integers(n)]
    d2 = _sq_dists(P, centers[:1])[:, 0]
    for c in range(1, k):
        total = d2.sum()
        idx = rng.integers(n) if total == 0 else rng.choice(n, p=d2 / total)
        centers[c] = P[idx]
        d2 = np.minimum(d2, _sq_dists(P, centers[c:c + 1])[:, 0])
    return centers


def _lloyd(P, centers, max_iter, tol):
    k = len(centers)
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d = _sq_dists(P, centers)
        labels = d.argmin(axis=1)
        new = np.empty_like(centers)
        counts = np.bincount(labels, minlength=k)
        for c in range(k):
            if counts[c]:
                new[c] = P[labels == c].mean(axis=0)
        if (counts == 0).any():
            # reseed each empty cluster at the point farthest from its own center
            far = d[np.arange(len(P)), labels]
            for c in np.flatnonzero(counts == 0):
                i = int(np.argmax(far))
                new[c] = P[i]
                far[i] = -1.0
        shift = np.sqrt(((new - centers) ** 2).sum(axis=1)).max()
        centers = new
        if shift < tol:
            break
    d = _sq_dists(P, centers)
    labels = d.argmin(axis=1)
    return labels, centers, float(d[np.arange(len(P)), labels].sum()), n_iter


def kmeans(points, k: int, seed: int = 0, n_init: int = 10, max_iter: int = 300, tol: float = 1e-6) -> KMeansResult:
    """Lloyd's algorithm from k-means++ seeds, best of ``n_init`` restarts."""
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if not 1 <= k <= len(P):
        raise PreconditionError(f"k={k} must lie in [1, {len(P)}]")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        res = _lloyd(P, _kmeans_pp(P, k, rng), max_iter, tol)
        if best is None or res[2] < best[2]:
            best = res
    return KMeansResult(*best)


def silhouette_score(points, labels, chunk: int = 1024) -> float:
    """Mean silhouette over points (Euclidean); singletons score 0."""
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    uniq, lab = np.unique(np.asarray(labels), return_inverse=True)
    k = len(uniq)
    if k < 2:
        raise PreconditionError("silhouette needs at least two clusters")
    n = len(P)
    sizes = np.bincount(lab, minlength=k).astype(float)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), lab] = 1.0
    s = np.zeros(n)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        D = np.sqrt(_sq_dists(P[lo:hi], P))
        sums = D @ onehot  # (chunk, k) distance totals per cluster
        own = lab[lo:hi]
        rows = np.arange(hi - lo)
        own_size = sizes[own]
        a = np.where(own_size > 1, sums[rows, own] / np.maximum(own_size - 1, 1), 0.0)
        means = sums / sizes[None, :]
        means[rows, own] = np.inf
        b = means.min(axis=1)
        denom = np.maximum(a, b)
        si = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
        s[lo:hi] = np.where(own_size > 1, si, 0.0)
    return float(s.mean())


def group_silhouettes(groups, X, seed: int = 0, n_init: int = 10):
    """Silhouette of k-means with k = |group| on each group's own columns."""
    X = np.asarray(X, dtype=float)
    out = {}
    for g in groups:
        cols = list(g.indices)
        k = min(len(cols), len(X))
        res = kmeans(X[:, cols], k, seed=derive_seed(seed, "kmeans", "basis", g.group_id), n_init=n_init)
        out[g.group_id] = silhouette_score(X[:, cols], res.labels) if len(np.unique(res.labels)) > 1 else 0.0
    return out


def select_clustering_basis(groups, X, tau_sil: float = 0.5, seed: int = 0, scores=None) -> list:
    """Union of the groups whose own clustering has silhouette > tau_sil."""
    if scores is None:
        scores = group_silhouettes(groups, X, seed)
    K = set()
    for g in groups:
        if scores[g.group_id] > tau_sil:
            K.update(g.indices)
    return sorted(K)


@dataclass
class PartitionResult:
    assignments: np.ndarray  # subset id per row, DROPPED for rows in undersized clusters
    subsets: list
    basis: list
    m_requested: int
    m_effective: int
    min_subset_size: int
    used_fallback: bool = False
    dropped_sizes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "assignments": [int(a) for a in self.assignments],
            "basis": [int(j) for j in self.basis],
            "m_requested": self.m_requested,
            "m_effective": self.m_effective,
            "min_subset_size": self.min_subset_size,
            "used_fallback": self.used_fallback,
            "dropped_sizes": list(self.dropped_sizes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def partition_data(X, K, m: int, min_subset_size: int = 20, seed: int = 0, fallback=None,
                   n_init: int = 10) -> PartitionResult:
    """Cluster rows into ``m`` groups on columns ``K``; drop undersized clusters.

    With an empty ``K`` the ``fallback`` columns are used instead.
    """
    if m < 2:
        raise PreconditionError("m must be >= 2")
    X = np.asarray(X, dtype=float)
    basis = sorted(int(j) for j in K)
    used_fallback = False
    if not basis:
        basis = sorted(int(j) for j in (fallback or ()))
        used_fallback = True
        if not basis:
            raise PreconditionError("empty clustering basis and no fallback features")
    res = kmeans(X[:, basis], m, seed=derive_seed(seed, "kmeans", "partition"), n_init=n_init)
    members = [np.flatnonzero(res.labels == c) for c in range(m)]
    kept = [idx for idx in members if len(idx) >= min_subset_size]
    dropped = sorted(len(idx) for idx in members if len(idx) < min_subset_size)
    kept.sort(key=lambda idx: idx[0])
    if not kept:
        raise NoUsableSubsetsError(f"no cluster reached the minimum subset size {min_subset_size}")
    assign = np.full(len(X), DROPPED, dtype=int)
    for d, idx in enumerate(kept):
        assign[idx] = d
    return PartitionResult(assign, kept, basis, m, len(kept), min_subset_size, used_fallback, dropped)
