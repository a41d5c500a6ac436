"""Run configuration files: ``key = value`` lines under ``[section]`` headers.

Recognized sections::

    [benchmark]   methods, reps, seed
    [select]      method, seed
    [arl]         tau_corr, tau_sil, m, tau_co, min_subset_size, mode, miner,
                  filter_groups, max_group_size, restandardize_subsets
    [ensemble]    B, subset_B, threshold, q1, q2, ridge_alpha
    [data.NAME]   example plus any GenConfig field (one section per dataset)

Blank lines and lines starting with ``#`` or ``;`` are ignored. Unknown
sections and keys are errors that name the offending line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .data import GenConfig, example_config
from .ensembles import EnsembleSpec
from .exceptions import ConfigError
from .methods import GLOBAL, METHODS, SUBSET, Phase
from .rescue import ARLParams

_SECTION = re.compile(r"^\[([A-Za-z0-9_.\-]+)\]$")
_PAIR = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")

ARL_KEYS = {"tau_corr": float, "tau_sil": float, "m": int, "tau_co": int, "min_subset_size": int,
            "mode": str, "miner": str, "filter_groups": "bool", "max_group_size": int,
            "restandardize_subsets": "bool"}
ENSEMBLE_KEYS = {"B": int, "subset_B": int, "threshold": float, "q1": float, "q2": float, "ridge_alpha": str}
BENCH_KEYS = {"methods": "list", "reps": int, "seed": int}
SELECT_KEYS = {"method": str, "seed": int}
_GEN_TYPES = {f.name: f.type for f in fields(GenConfig)}


def _typed(name, fields_):
    return {f: (int if t == "int" else float if t == "float" else str) for f, t in fields_.items()}


GEN_KEYS = dict(_typed("gen", {k: v for k, v in _GEN_TYPES.items()}), example=str)


@dataclass
class Entry:
    value: str
    line: int


def parse_file(path) -> dict:
    """Raw parse: {section: {key: Entry}} with line numbers kept."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    out: dict = {}
    current = None
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = _SECTION.match(line)
        if m:
            current = m.group(1)
            if current in out:
                raise ConfigError(f"{path}:{lineno}: duplicate section [{current}]")
            out[current] = {}
            continue
        m = _PAIR.match(line)
        if not m:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        if current is None:
            raise ConfigError(f"{path}:{lineno}: key {m.group(1)!r} outside any [section]")
        key, value = m.group(1), m.group(2).strip()
        if key in out[current]:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r} in [{current}]")
        out[current][key] = Entry(value, lineno)
    return out


def _convert(path, section, key, entry, kind):
    v = entry.value
    where = f"{path}:{entry.line}: [{section}] {key}"
    try:
        if kind == "bool":
            low = v.lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(v)
            return low in ("true", "yes", "1")
        if kind == "list":
            return [s.strip() for s in v.split(",") if s.strip()]
        return kind(v)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {v!r}") from None


def _section(path, name, entries, schema):
    out = {}
    for key, entry in entries.items():
        if key not in schema:
            raise ConfigError(f"{path}:{entry.line}: unknown key {key!r} in [{name}]")
        out[key] = _convert(path, name, key, entry, schema[key])
    return out


@dataclass
class RunConfig:
    datasets: dict = field(default_factory=dict)  # name -> GenConfig
    arl: ARLParams = field(default_factory=ARLParams)
    ensemble: EnsembleSpec = field(default_factory=EnsembleSpec)
    methods: list = field(default_factory=lambda: ["cvlasso", "arl"])
    method: str = "cvlasso"
    reps: int = 1
    seed: int = 42
    source: Optional[str] = None

    def with_overrides(self, seed=None, method=None, mode=None, tau_corr=None, tau_sil=None, m=None, tau_co=None):
        cfg = replace(self)
        if seed is not None:
            cfg.seed = seed
            cfg.datasets = {k: replace(v, seed=seed) for k, v in cfg.datasets.items()}
        if method is not None:
            cfg.method = method
        arl = {k: v for k, v in dict(mode=mode, tau_corr=tau_corr, tau_sil=tau_sil, m=m, tau_co=tau_co).items()
               if v is not None}
        cfg.arl = replace(cfg.arl, **arl)
        return cfg


def load_config(path) -> RunConfig:
    raw = parse_file(path)
    cfg = RunConfig(source=str(path))
    arl_kw, ens_kw = {}, {}
    for name, entries in raw.items():
        if name == "benchmark":
            b = _section(path, name, entries, BENCH_KEYS)
            cfg.methods = b.get("methods", cfg.methods)
            cfg.reps = b.get("reps", cfg.reps)
            cfg.seed = b.get("seed", cfg.seed)
            for mth in cfg.methods:
                if mth not in METHODS:
                    raise ConfigError(f"{path}:{entries['methods'].line}: unknown method {mth!r}")
            if cfg.reps < 1:
                raise ConfigError(f"{path}:{entries['reps'].line}: reps must be >= 1")
        elif name == "select":
            s = _section(path, name, entries, SELECT_KEYS)
            if "method" in s and s["method"] not in METHODS:
                raise ConfigError(f"{path}:{entries['method'].line}: unknown method {s['method']!r}")
            cfg.method = s.get("method", cfg.method)
            cfg.seed = s.get("seed", cfg.seed)
        elif name == "arl":
            arl_kw = _section(path, name, entries, ARL_KEYS)
        elif name == "ensemble":
            ens_kw = _section(path, name, entries, ENSEMBLE_KEYS)
        elif name == "data" or name.startswith("data."):
            d = _section(path, name, entries, GEN_KEYS)
            example = d.pop("example", "1")
            label = name.split(".", 1)[1] if "." in name else "data"
            try:
                gen = example_config(example, **d)
                gen.validate()
            except (ConfigError, TypeError) as exc:
                first = min(e.line for e in entries.values()) if entries else 0
                raise ConfigError(f"{path}:{first}: [{name}] {exc}") from None
            cfg.datasets[label] = gen
        else:
            raise ConfigError(f"{path}: unknown section [{name}]")

    ridge = ens_kw.pop("ridge_alpha", "1.0")
    B = ens_kw.pop("B", GLOBAL.B)
    subset_B = ens_kw.pop("subset_B", SUBSET.B)
    try:
        ridge_alpha = None if ridge in ("lasso", "cv-lasso", "none") else float(ridge)
        cfg.ensemble = EnsembleSpec(ridge_alpha=ridge_alpha, **ens_kw)
        cfg.arl = ARLParams(**arl_kw, global_phase=Phase(GLOBAL.folds, GLOBAL.tol, B),
                            subset_phase=Phase(SUBSET.folds, SUBSET.tol, subset_B), ensemble=cfg.ensemble)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return cfg
