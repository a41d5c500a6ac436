"""Accept-Reject Lasso: subset Lassos, co-occurrence mining, feature rescue.

The global baseline support is kept as is. Inside every problem group, a
candidate set C (|C| >= 2) is rescued when it is fully selected in more than
``tau_co`` of the per-cluster subset fits.
"""

from __future__ import annotations

import itertools
import json
import logging
import zlib
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ensembles import EnsembleSpec
from .exceptions import GroupTooLargeError, PreconditionError
from .groups import correlation_matrix, filter_groups, identify_problem_groups
from .methods import GLOBAL, SUBSET, Phase, run_base
from .partition import group_silhouettes, partition_data, select_clustering_basis
from .rng import derive_seed
from .solvers import SelectionResult, ols

log = logging.getLogger(__name__)

MINERS = ("apriori", "brute")


# ---------------------------------------------------------------------------
# co-occurrence mining

@dataclass
class GroupRescue:
    group: tuple
    counts: dict  # candidate tuple -> count, for every candidate that was counted
    frequent: dict  # candidate tuple -> count, only count > tau_co
    rescued: set
    stats: dict = field(default_factory=dict)


def _masks(subset_supports, group):
    pos = {f: i for i, f in enumerate(group)}
    out = []
    for S in subset_supports:
        m = 0
        for f in S:
            i = pos.get(int(f))
            if i is not None:
                m |= 1 << i
        out.append(m)
    return out


def _to_tuple(mask, group):
    return tuple(group[i] for i in range(len(group)) if mask >> i & 1)


def _brute(trans, group, tau_co):
    g = len(group)
    cands = np.arange(1 << g, dtype=np.int64)
    cands = cands[np.array([bin(c).count("1") >= 2 for c in range(1 << g)], dtype=bool)] if g else cands[:0]
    counts = np.zeros(len(cands), dtype=np.int64)
    for t in trans:
        counts += (cands & t) == cands
    all_counts = {_to_tuple(int(c), group): int(k) for c, k in zip(cands, counts)}
    frequent = {c: k for c, k in all_counts.items() if k > tau_co}
    stats = {"possible": (1 << g) - g - 1, "generated": len(cands), "pruned": 0, "counted": len(cands),
             "frequent": len(frequent)}
    return all_counts, frequent, stats


def _support(itemset, trans_sets):
    return sum(1 for t in trans_sets if itemset <= t)


def _apriori(trans, group, tau_co):
    g = len(group)
    trans_sets = [frozenset(_to_tuple(t, group)) for t in trans]
    level = {}
    for f in group:
        c = _support(frozenset((f,)), trans_sets)
        if c > tau_co:
            level[(f,)] = c
    counts, frequent = {}, {}
    generated = pruned = 0
    k = 2
    while len(level) >= 2:
        prev = sorted(level)
        prev_set = set(prev)
        nxt = {}
        for a, b in itertools.combinations(prev, 2):
            if a[:-1] != b[:-1]:
                continue
            cand = a + (b[-1],)
            generated += 1
            if any(sub not in prev_set for sub in itertools.combinations(cand, k - 1)):
                pruned += 1
                continue
            c = _support(frozenset(cand), trans_sets)
            counts[cand] = c
            if c > tau_co:
                nxt[cand] = c
        frequent.update(nxt)
        level = nxt
        k += 1
    stats = {"possible": (1 << g) - g - 1, "generated": generated, "pruned": pruned, "counted": len(counts),
             "frequent": len(frequent)}
    return counts, frequent, stats


def count_cooccurrence(subset_supports, group, tau_co: int = 1, method: str = "apriori",
                       brute_cap: int = 20) -> GroupRescue:
    """Count full co-selection of every candidate subset of ``group``.

    ``apriori`` grows candidates level by level from frequent smaller sets,
    skipping any candidate with an infrequent (k-1)-subset; ``brute``
    enumerates all 2^g - g - 1 candidates. Both rescue the same features.
    """
    if tau_co < 0 or int(tau_co) != tau_co:
        raise PreconditionError("tau_co must be a non-negative integer")
    if method not in MINERS:
        raise ValueError(f"method must be one of {MINERS}")
    group = tuple(sorted(int(j) for j in group))
    if method == "brute" and len(group) > brute_cap:
        raise GroupTooLargeError(f"group of {len(group)} features exceeds the brute-force cap of {brute_cap}; "
                                 "use the apriori miner or clique grouping")
    trans = _masks(subset_supports, group)
    miner = _brute if method == "brute" else _apriori
    counts, frequent, stats = miner(trans, group, int(tau_co))
    rescued = set()
    for c in frequent:
        rescued.update(c)
    return GroupRescue(group, counts, frequent, rescued, stats)


# ---------------------------------------------------------------------------
# subset fits

def subset_selections(X, y, subsets, feature_pool, base: str = "cvlasso", seed: int = 0,
                      phase: Phase = SUBSET, ensemble: Optional[EnsembleSpec] = None,
                      restandardize: bool = True):
    """Run the base selector on each row subset restricted to ``feature_pool``.

    Columns constant within a subset are left out of that fit. The CV seed
    of each fit is keyed on the subset's rows, so equal subsets give equal
    selections. Returns one frozenset of global feature indices per subset;
    a failed fit yields the empty set.
    """
    pool = np.asarray(sorted(int(j) for j in feature_pool), dtype=int)
    if pool.size == 0:
        raise PreconditionError("feature pool is empty")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    out = []
    for d, rows in enumerate(subsets):
        Xs = X[np.ix_(rows, pool)]
        sd = Xs.std(axis=0)
        live = sd > 1e-12
        cols = pool[live]
        Xs = Xs[:, live]
        if restandardize:
            Xs = (Xs - Xs.mean(axis=0)) / sd[live]
        try:
            if cols.size == 0:
                raise PreconditionError("no non-constant columns")
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                key = zlib.crc32(np.asarray(rows, dtype=np.int64).tobytes())
                res = run_base(base, Xs, y[rows], derive_seed(seed, "subset", key), phase, ensemble)
            out.append(frozenset(int(j) for j in cols[res.support]))
        except Exception as exc:  # one bad subset must not sink the run
            warnings.warn(f"subset {d}: {base} failed ({exc}); using empty support", RuntimeWarning)
            out.append(frozenset())
    return out


# ---------------------------------------------------------------------------
# pipeline

@dataclass
class ARLParams:
    tau_corr: float = 0.8
    tau_sil: float = 0.5
    m: int = 50
    tau_co: int = 1
    min_subset_size: int = 20
    mode: str = "component"
    base: str = "cvlasso"
    seed: int = 42
    filter_groups: bool = False
    miner: str = "apriori"
    max_group_size: int = 25
    restandardize_subsets: bool = True
    global_phase: Phase = GLOBAL
    subset_phase: Phase = SUBSET
    ensemble: Optional[EnsembleSpec] = None


@dataclass
class RescueReport:
    P_G: list
    P_final: list
    rescued: list
    tau_co: int
    m_effective: int
    groups: list = field(default_factory=list)
    basis: list = field(default_factory=list)
    silhouettes: dict = field(default_factory=dict)
    subset_supports: list = field(default_factory=list)
    group_results: list = field(default_factory=list)
    partition: Optional[dict] = None

    @property
    def pruning_stats(self) -> dict:
        keys = ("possible", "generated", "pruned", "counted", "frequent")
        return {k: sum(r.stats.get(k, 0) for r in self.group_results) for k in keys}

    def to_dict(self) -> dict:
        return {
            "P_G": self.P_G,
            "P_final": self.P_final,
            "rescued": self.rescued,
            "tau_co": self.tau_co,
            "m_effective": self.m_effective,
            "groups": [list(g.indices) for g in self.groups],
            "basis": self.basis,
            "silhouettes": {str(k): v for k, v in self.silhouettes.items()},
            "subset_supports": [sorted(s) for s in self.subset_supports],
            "candidate_counts": [
                {"group": list(r.group), "counts": [[list(c), k] for c, k in sorted(r.counts.items())]}
                for r in self.group_results
            ],
            "pruning_stats": self.pruning_stats,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _finish(X, y, support, method, report):
    coef, icpt = ols(X, y, support)
    res = SelectionResult(np.asarray(sorted(support), dtype=int), coef, icpt, None, method,
                          info={"report": report})
    return res, report


def arl_select(X, y, params: Optional[ARLParams] = None, baseline: Optional[SelectionResult] = None):
    """Accept-Reject Lasso on training data ``(X, y)``.

    Returns ``(SelectionResult, RescueReport)``. Final coefficients are an
    OLS refit on the final support. ``baseline`` may carry a precomputed
    global selection for ``params.base`` on the same data.
    """
    params = params or ARLParams()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    method = "arl" if params.base == "cvlasso" else f"arl-{params.base}"
    if baseline is None:
        baseline = run_base(params.base, X, y, derive_seed(params.seed, "global"), params.global_phase,
                            params.ensemble)
    P_G = sorted(int(j) for j in baseline.support)

    groups = identify_problem_groups(correlation_matrix(X), params.tau_corr, params.mode)
    if params.filter_groups:
        groups = filter_groups(groups, P_G)
    report = RescueReport(P_G, list(P_G), [], params.tau_co, 0, groups)
    if not groups:
        log.info("no problem groups; ARL reduces to the baseline")
        return _finish(X, y, P_G, method, report)
    too_big = [len(g) for g in groups if len(g) > params.max_group_size]
    if too_big:
        raise GroupTooLargeError(f"problem groups of sizes {too_big} exceed {params.max_group_size}; "
                                 "raise tau_corr or use mode='clique'")

    scores = group_silhouettes(groups, X, params.seed)
    K = select_clustering_basis(groups, X, params.tau_sil, scores=scores)
    union = sorted(set().union(*(g.indices for g in groups)))
    part = partition_data(X, K, params.m, params.min_subset_size, params.seed, fallback=union)
    pool = sorted(set(union) | set(P_G))
    supports = subset_selections(X, y, part.subsets, pool, params.base, params.seed,
                                 params.subset_phase, params.ensemble, params.restandardize_subsets)

    results = [count_cooccurrence(supports, g.indices, params.tau_co, params.miner) for g in groups]
    rescued = set().union(*(r.rescued for r in results))
    final = sorted(set(P_G) | rescued)
    report.P_final = final
    report.rescued = sorted(rescued)
    report.m_effective = part.m_effective
    report.basis = K
    report.silhouettes = scores
    report.subset_supports = supports
    report.group_results = results
    report.partition = part.to_dict()
    return _finish(X, y, final, method, report)
