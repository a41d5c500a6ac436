"""Problem groups: sets of features linked by high absolute correlation."""

from __future__ import annotations

import json
import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np

MODES = ("component", "clique")


@dataclass(frozen=True)
class ProblemGroup:
    indices: tuple
    mode: str
    group_id: int

    def __post_init__(self):
        if len(self.indices) < 2:
            raise ValueError("a problem group needs at least two features")

    def __len__(self):
        return len(self.indices)

    def to_json(self) -> str:
        return json.dumps({"group_id": self.group_id, "mode": self.mode, "indices": list(self.indices)})

    @classmethod
    def from_json(cls, line: str) -> "ProblemGroup":
        d = json.loads(line)
        return cls(tuple(int(i) for i in d["indices"]), d["mode"], int(d["group_id"]))


def correlation_matrix(X) -> np.ndarray:
    """Pearson correlations; constant columns correlate 0 with everything else."""
    X = np.asarray(X, dtype=float)
    Xc = X - X.mean(axis=0)
    norms = np.sqrt((Xc ** 2).sum(axis=0))
    const = norms == 0
    if const.any():
        warnings.warn(f"{int(const.sum())} constant columns given zero correlation", RuntimeWarning)
    Z = Xc / np.where(const, 1.0, norms)
    C = Z.T @ Z
    np.clip(C, -1.0, 1.0, out=C)
    C = (C + C.T) / 2
    np.fill_diagonal(C, 1.0)
    return C


def _adjacency(corr, tau):
    A = np.abs(np.asarray(corr)) > tau
    np.fill_diagonal(A, False)
    return [set(np.flatnonzero(row).tolist()) for row in A]


def _components(adj):
    seen = [False] * len(adj)
    out = []
    for s in range(len(adj)):
        if seen[s] or not adj[s]:
            continue
        comp, q = [], deque([s])
        seen[s] = True
        while q:
            v = q.popleft()
            comp.append(v)
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    q.append(w)
        out.append(sorted(comp))
    return out


def maximal_cliques(adj):
    """Bron-Kerbosch with Tomita pivoting; iterative to avoid deep recursion."""
    out = []
    stack = [(set(), {v for v in range(len(adj)) if adj[v]}, set())]
    while stack:
        R, P, X = stack.pop()
        if not P and not X:
            out.append(sorted(R))
            continue
        if not P:
            continue
        pivot = max(P | X, key=lambda u: len(adj[u] & P))
        for v in sorted(P - adj[pivot]):
            stack.append((R | {v}, P & adj[v], X & adj[v]))
            P = P - {v}
            X = X | {v}
    return out


def identify_problem_groups(corr, tau_corr: float = 0.8, mode: str = "component"):
    """Groups of features joined by edges where |corr| > tau_corr.

    ``component`` mode returns connected components, ``clique`` mode the
    maximal cliques; both keep only groups of size >= 2, ordered by their
    smallest index.
    """
    if not 0 < tau_corr < 1:
        raise ValueError("tau_corr must lie in (0, 1)")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    adj = _adjacency(corr, tau_corr)
    found = _components(adj) if mode == "component" else maximal_cliques(adj)
    found = sorted((g for g in found if len(g) >= 2), key=lambda g: (g[0], g))
    return [ProblemGroup(tuple(g), mode, i) for i, g in enumerate(found)]


def filter_groups(groups, selected):
    """Keep only groups sharing at least one feature with ``selected``."""
    sel = set(int(j) for j in selected)
    return [g for g in groups if sel.intersection(g.indices)]


def write_groups(groups, path):
    with open(path, "w") as fh:
        for g in groups:
            fh.write(g.to_json() + "\n")


def read_groups(path):
    with open(path) as fh:
        return [ProblemGroup.from_json(line) for line in fh if line.strip()]
