"""Datasets: synthetic correlated-design generators and real CSV ingestion."""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from .exceptions import ConfigError, DegenerateSignalError, PreconditionError
from .rng import substream

log = logging.getLogger(__name__)

CATEGORIES = ("DI", "TR", "FR", "U", "U_corr", "MR_TR", "MR_FR")
MISSING_MARKERS = ["", "NA", "N/A", "NaN", "nan", "null", "NULL", "None"]


@dataclass(frozen=True)
class Dataset:
    """Standardized design matrix plus response and split.

    Columns of ``X`` are z-scored with ``means``/``stds`` computed on the
    training rows only. ``y`` is left in its original units.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple
    train_idx: np.ndarray
    test_idx: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    task: str = "regression"

    def __post_init__(self):
        n, p = self.X.shape
        if self.y.shape != (n,) or len(self.feature_names) != p:
            raise ValueError("inconsistent dataset shapes")
        if len(self.train_idx) + len(self.test_idx) != n or np.intersect1d(self.train_idx, self.test_idx).size:
            raise ValueError("train/test split must partition the rows")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise ValueError("dataset contains non-finite entries")
        for a in (self.X, self.y, self.train_idx, self.test_idx, self.means, self.stds):
            a.setflags(write=False)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def X_train(self):
        return self.X[self.train_idx]

    @property
    def y_train(self):
        return self.y[self.train_idx]

    @property
    def X_test(self):
        return self.X[self.test_idx]

    @property
    def y_test(self):
        return self.y[self.test_idx]


@dataclass
class Group:
    group_id: int
    category: str  # TR, FR or MR
    indices: list


@dataclass
class GroundTruth:
    beta: np.ndarray  # generation units
    beta_standardized: np.ndarray  # per unit of standardized column
    category: list
    groups: list
    rho: float
    shift_c: float
    snr: float
    sigma2: float

    def to_dict(self) -> dict:
        return {
            "beta": self.beta.tolist(),
            "beta_standardized": self.beta_standardized.tolist(),
            "category": list(self.category),
            "groups": [asdict(g) for g in self.groups],
            "rho": self.rho,
            "shift_c": self.shift_c,
            "snr": self.snr,
            "sigma2": self.sigma2,
        }

    @classmethod
    def from_dict(cls, d) -> "GroundTruth":
        return cls(np.asarray(d["beta"], float), np.asarray(d["beta_standardized"], float),
                   list(d["category"]), [Group(**g) for g in d["groups"]],
                   d["rho"], d["shift_c"], d["snr"], d["sigma2"])

    def groups_of(self, category: str):
        return [g for g in self.groups if g.category == category]


@dataclass
class GenConfig:
    """Synthetic design. Category sizes are feature counts, not group counts."""

    n_samples: int = 1000
    n_di: int = 100
    n_tr: int = 100
    tr_group_size: int = 10
    n_fr: int = 100
    fr_group_size: int = 10
    n_mr_groups: int = 0
    mr_tr_size: int = 10
    mr_fr_size: int = 10
    n_u_corr: int = 0
    n_u: int = 700
    rho: float = 0.95
    shift_c: float = 5.0
    snr: float = 3.0
    coef_low: float = 0.1
    coef_high: float = 10.0
    rho_noise: float = 0.5
    shock: str = "discrete"  # or "normal"
    mr_levels: int = 5
    seed: int = 42
    example_id: str = "custom"

    @property
    def p(self) -> int:
        return (self.n_di + self.n_tr + self.n_fr + self.n_mr_groups * (self.mr_tr_size + self.mr_fr_size)
                + self.n_u_corr + self.n_u)

    def validate(self):
        counts = {k: getattr(self, k) for k in ("n_samples", "n_di", "n_tr", "n_fr", "n_mr_groups",
                                                 "n_u_corr", "n_u", "mr_tr_size", "mr_fr_size")}
        for k, v in counts.items():
            if v < 0:
                raise ConfigError(f"{k} must be non-negative, got {v}")
        for total, size, name in ((self.n_tr, self.tr_group_size, "tr"), (self.n_fr, self.fr_group_size, "fr")):
            if total and (size < 2 or total % size):
                raise ConfigError(f"{name}_group_size={size} must be >= 2 and divide n_{name}={total}")
        if self.p == 0 or self.n_samples < 2:
            raise ConfigError("need at least one feature and two samples")
        if not 0 < self.rho < 1:
            raise ConfigError("rho must lie in (0, 1)")
        if self.snr <= 0:
            raise ConfigError("snr must be positive")
        if self.coef_low >= self.coef_high:
            raise ConfigError("coef_low must be below coef_high")
        if self.shock not in ("discrete", "normal"):
            raise ConfigError(f"shock must be 'discrete' or 'normal', got {self.shock!r}")
        if self.n_u_corr and not (self.n_di + self.n_tr + self.n_fr + self.n_mr_groups):
            raise ConfigError("U_corr features need an informative block to derive PC1 from")

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


_EXAMPLES = {
    "1": {},
    "2": dict(n_tr=0, n_fr=0, n_mr_groups=10),
    "3-setting1": dict(n_u_corr=350, n_u=350),
    "3-setting2": dict(n_di=300, n_u=500),
    "3-setting3": dict(n_di=200, n_tr=200, n_fr=200, n_u=400),
    "4": dict(coef_low=-10.0, coef_high=10.0),
    # reduced Example 1 used for quick acceptance runs
    "1-desk": dict(n_samples=600, n_di=20, n_tr=20, tr_group_size=5, n_fr=20, fr_group_size=5, n_u=140),
    "null": dict(n_tr=0, n_fr=0),
}


def example_config(example_id: str, **overrides) -> GenConfig:
    """Preset for one of the simulation examples, with keyword overrides."""
    example_id = str(example_id)
    if example_id not in _EXAMPLES:
        raise ConfigError(f"unknown example {example_id!r}; choose from {sorted(_EXAMPLES)}")
    kw = dict(_EXAMPLES[example_id], example_id=example_id)
    kw.update(overrides)
    return GenConfig(**kw)


def calibrate_noise(signal, snr: float) -> float:
    """Noise variance giving Var(signal)/sigma2 == snr (population variance)."""
    if snr <= 0:
        raise PreconditionError("snr must be positive")
    v = float(np.var(np.asarray(signal, dtype=float)))
    if v <= 0:
        raise DegenerateSignalError("signal has zero variance; SNR is undefined")
    return v / snr


def first_principal_component(A, tol=1e-8, max_iter=10_000, rng=None) -> np.ndarray:
    """Scores on the leading principal axis of ``A`` via power iteration."""
    Ac = A - A.mean(axis=0)
    rng = rng or np.random.default_rng(0)
    v = rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        w = Ac.T @ (Ac @ v)
        w /= np.linalg.norm(w)
        if np.linalg.norm(w - v) < tol:
            v = w
            break
        v = w
    return Ac @ v


def _shock(rng, n, kind):
    if kind == "discrete":
        return rng.integers(-2, 3, size=n).astype(float)
    return rng.standard_normal(n)


def generate(config: GenConfig):
    """Draw one synthetic dataset; returns (Dataset, GroundTruth)."""
    config.validate()
    rng = substream(config.seed, "dataset", config.example_id)
    n = config.n_samples
    cols, names, cats, groups = [], [], [], []

    def add(block, prefix, cat):
        for j in range(block.shape[1]):
            cols.append(block[:, j])
            names.append(f"{prefix}_{j}")
            cats.append(cat)

    def next_index():
        return len(cols)

    add(rng.standard_normal((n, config.n_di)), "DI", "DI")

    s = math.sqrt(1 - config.rho ** 2)
    for g in range(config.n_tr // config.tr_group_size if config.n_tr else 0):
        start = next_index()
        L = rng.standard_normal(n)
        E = rng.standard_normal((n, config.tr_group_size))
        add(config.rho * L[:, None] + s * E, f"TR{g}", "TR")
        groups.append(Group(len(groups), "TR", list(range(start, next_index()))))

    for g in range(config.n_fr // config.fr_group_size if config.n_fr else 0):
        start = next_index()
        base = rng.standard_normal((n, config.fr_group_size))
        k = _shock(rng, n, config.shock)
        add(base + (k * config.shift_c)[:, None], f"FR{g}", "FR")
        groups.append(Group(len(groups), "FR", list(range(start, next_index()))))

    for g in range(config.n_mr_groups):
        start = next_index()
        L = rng.standard_normal(n)
        tr = config.rho * L[:, None] + s * rng.standard_normal((n, config.mr_tr_size))
        fr = rng.standard_normal((n, config.mr_fr_size))
        step = np.floor(rng.random(n) * config.mr_levels) * config.shift_c
        add(tr + step[:, None], f"MR{g}_tr", "MR_TR")
        add(fr + step[:, None], f"MR{g}_fr", "MR_FR")
        groups.append(Group(len(groups), "MR", list(range(start, next_index()))))

    n_inf = next_index()
    if config.n_u_corr:
        pc1 = first_principal_component(np.column_stack(cols), rng=substream(config.seed, "pc1"))
        pc1 = (pc1 - pc1.mean()) / pc1.std()
        rn = config.rho_noise
        add(rn * pc1[:, None] + math.sqrt(1 - rn ** 2) * rng.standard_normal((n, config.n_u_corr)),
            "Ucorr", "U_corr")
    add(rng.standard_normal((n, config.n_u)), "U", "U")

    X_raw = np.column_stack(cols)
    beta = np.zeros(X_raw.shape[1])
    beta[:n_inf] = rng.uniform(config.coef_low, config.coef_high, size=n_inf)
    signal = X_raw @ beta
    sigma2 = calibrate_noise(signal, config.snr)
    y = signal + rng.normal(0.0, math.sqrt(sigma2), size=n)

    means = X_raw.mean(axis=0)
    stds = X_raw.std(axis=0)
    X = (X_raw - means) / stds
    ds = Dataset(X, y, tuple(names), np.arange(n), np.array([], dtype=int), means, stds)
    truth = GroundTruth(beta, beta * stds, cats, groups, config.rho, config.shift_c, config.snr, sigma2)
    return ds, truth


# ---------------------------------------------------------------------------
# real data

@dataclass
class RawTable:
    frame: pd.DataFrame  # predictors only; missing cells are NaN/None
    target: pd.Series
    target_name: str
    numeric: list = field(default_factory=list)
    categorical: list = field(default_factory=list)

    @property
    def n_rows(self) -> int:
        return len(self.frame)


def load_csv(path, target_column: str, categorical=None, numeric=None, drop=None,
             missing_markers=MISSING_MARKERS) -> RawTable:
    """Read a comma-separated file with a header row.

    Column types are inferred (numeric if every non-missing cell parses as a
    number) unless listed in ``categorical`` / ``numeric``. ``drop`` names
    columns to ignore, e.g. row identifiers.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such CSV file: {path}")
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, na_values=list(missing_markers),
                         encoding="utf-8", skipinitialspace=True)
    except pd.errors.ParserError as exc:
        raise ValueError(f"unparseable CSV {path}: {exc}") from exc
    if target_column not in df.columns:
        raise KeyError(f"target column {target_column!r} not found in {path}")
    categorical = set(categorical or ())
    numeric_forced = set(numeric or ())
    target = df.pop(target_column)
    for c in drop or ():
        df.pop(c)
    num_cols, cat_cols = [], []
    for c in df.columns:
        col = df[c]
        parsed = pd.to_numeric(col, errors="coerce")
        bad = parsed.isna() & col.notna()
        if c in categorical:
            cat_cols.append(c)
        elif c in numeric_forced or not bad.any():
            if bad.any():
                rows = (np.flatnonzero(bad.to_numpy()) + 2).tolist()[:10]
                raise ValueError(f"column {c!r} declared numeric has non-numeric cells at file rows {rows}")
            df[c] = parsed
            num_cols.append(c)
        else:
            cat_cols.append(c)
    return RawTable(df, target, target_column, num_cols, cat_cols)


def _split(n, test_fraction, seed):
    if not 0 < test_fraction < 1:
        raise PreconditionError("test_fraction must lie in (0, 1)")
    n_test = int(math.ceil(n * test_fraction))
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def preprocess(raw: RawTable, split_seed: int = 42, test_fraction: float = 0.2,
               task: str = "regression", log_target: bool = False) -> Dataset:
    """Impute, one-hot encode, split and standardize a raw table.

    Numeric gaps get the training-row median; categorical gaps become the
    level ``"Missing"``. One indicator per level observed anywhere in the
    table. Scaling statistics come from training rows only.
    """
    n = raw.n_rows
    train, test = _split(n, test_fraction, split_seed)
    blocks, names = [], []
    for c in raw.numeric:
        v = raw.frame[c].to_numpy(dtype=float)
        tr = v[train]
        if np.all(np.isnan(tr)):
            raise ValueError(f"numeric column {c!r} is entirely missing in the training rows")
        v = np.where(np.isnan(v), np.nanmedian(tr), v)
        blocks.append(v)
        names.append(c)
    for c in raw.categorical:
        v = raw.frame[c].astype(object).where(raw.frame[c].notna(), "Missing").astype(str)
        levels = sorted(v.unique())
        if len(levels) == 1:
            warnings.warn(f"categorical column {c!r} has a single level {levels[0]!r}", RuntimeWarning)
        for lev in levels:
            blocks.append((v == lev).to_numpy(dtype=float))
            names.append(f"{c}={lev}")
    X_raw = np.column_stack(blocks) if blocks else np.zeros((n, 0))

    if task == "regression":
        y = pd.to_numeric(raw.target, errors="coerce").to_numpy(dtype=float)
        if np.any(np.isnan(y)):
            raise ValueError(f"target {raw.target_name!r} has missing or non-numeric values")
        if log_target:
            if np.any(y <= 0):
                raise ValueError("log_target requires a strictly positive target")
            y = np.log(y)
    elif task == "binary-classification":
        if raw.target.isna().any():
            raise ValueError(f"target {raw.target_name!r} has missing values")
        levels = sorted(raw.target.unique())
        if len(levels) != 2:
            raise ValueError(f"binary target needs exactly two levels, found {levels}")
        y = (raw.target == levels[1]).to_numpy(dtype=float)
    else:
        raise ValueError(f"unknown task {task!r}")

    means = X_raw[train].mean(axis=0)
    stds = X_raw[train].std(axis=0)
    const = stds == 0
    if const.any():
        log.warning("%d columns are constant on the training rows and are left at zero", int(const.sum()))
    stds = np.where(const, 1.0, stds)
    X = (X_raw - means) / stds
    return Dataset(X, y, tuple(names), train, test, means, stds, task)


# ---------------------------------------------------------------------------
# persistence

def save_dataset(ds: Dataset, out_dir, truth: Optional[GroundTruth] = None):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "X.csv", ds.X, delimiter=",", fmt="%.17g", header=",".join(ds.feature_names), comments="")
    np.savetxt(out / "y.csv", ds.y, fmt="%.17g", header="y", comments="")
    written = [out / "X.csv", out / "y.csv"]
    if truth is not None:
        (out / "truth.json").write_text(json.dumps(truth.to_dict(), indent=1) + "\n")
        written.append(out / "truth.json")
    return written


def load_dataset(data_dir):
    """Read an ``X.csv``/``y.csv`` pair (and ``truth.json`` if present).

    All rows are treated as training rows.
    """
    d = Path(data_dir)
    with open(d / "X.csv") as fh:
        names = tuple(fh.readline().strip().split(","))
    X = np.loadtxt(d / "X.csv", delimiter=",", skiprows=1, ndmin=2)
    y = np.loadtxt(d / "y.csv", skiprows=1, ndmin=1)
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds = np.where(stds == 0, 1.0, stds)
    ds = Dataset((X - means) / stds, y, names, np.arange(len(y)), np.array([], dtype=int), means, stds)
    truth = None
    if (d / "truth.json").exists():
        truth = GroundTruth.from_dict(json.loads((d / "truth.json").read_text()))
    return ds, truth
