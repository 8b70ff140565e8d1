"""Experiment configuration and parallel, reproducible Monte Carlo replication.

Seeding: replicate ``i`` of an experiment with master seed ``s`` draws from
``numpy.random.default_rng(numpy.random.SeedSequence(s, spawn_key=(i,)))``,
i.e. a PCG64 stream whose state is derived from ``(s, i)`` by NumPy's
SeedSequence hash. Streams depend only on ``(s, i)``, so results do not
depend on how replicates are split between workers.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from . import approx, embed, sim
from .analytic import AnalyticDomainError, limit_quantities, p_rf
from .periods import Exponential, InfectiousPeriod, from_dict, parse_period
from .stats import Condition, condition_mask, equal_width_bins, summarize

ENGINES = ("direct", "embedding")
OUTCOME_COLUMNS = ("replicate", "Z_T", "Zhat_C", "Z_C", "A_T", "community0_size",
                   "community0_major", "global_epidemic")
SUMMARY_FIELDS = ("Z_T", "Z_C", "Zhat_C", "A_T", "Ztilde_T", "Zbar_C", "Atilde")


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def replicate_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def _period_value(value) -> InfectiousPeriod:
    if isinstance(value, InfectiousPeriod):
        return value
    try:
        if isinstance(value, str):
            return parse_period(value)
        if isinstance(value, dict):
            return from_dict(value)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("period", str(exc)) from None
    raise ConfigError("period", f"expected a string or an object, got {type(value).__name__}")


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    m: int
    lambda_W: float | None = None
    lambda_G: float | None = None
    beta_W: float | None = None
    beta_G: float | None = None
    period: InfectiousPeriod = field(default_factory=Exponential)
    large_outbreak_threshold: float | None = None
    global_threshold: float | None = None
    replicates: int = 1000
    master_seed: int = 0
    workers: int = 1
    condition: str = "none"
    outputs: str = "out"
    engine: str = "direct"
    bins: int = 40
    kernel: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "period", _period_value(self.period))
        for name in ("n", "m", "replicates", "master_seed", "workers", "bins"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise ConfigError(name, f"expected an integer, got {v!r}")
        if self.n < 1:
            raise ConfigError("n", "must be >= 1")
        if self.m < 0:
            raise ConfigError("m", "must be >= 0")
        if self.replicates < 1:
            raise ConfigError("replicates", "must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        if self.bins < 1:
            raise ConfigError("bins", "must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed", "must be a 64-bit unsigned integer")
        lam = (self.lambda_W, self.lambda_G)
        beta = (self.beta_W, self.beta_G)
        has_lam = any(v is not None for v in lam)
        has_beta = any(v is not None for v in beta)
        if has_lam and has_beta:
            raise ConfigError("lambda_W", "lambda and beta rates are mutually exclusive")
        if has_lam and None in lam:
            raise ConfigError("lambda_G" if self.lambda_G is None else "lambda_W", "both lambda rates are required")
        if has_beta and None in beta:
            raise ConfigError("beta_G" if self.beta_G is None else "beta_W", "both beta rates are required")
        if not (has_lam or has_beta):
            raise ConfigError("lambda_W", "infection rates are required (lambda_W/lambda_G or beta_W/beta_G)")
        for name in ("lambda_W", "lambda_G", "beta_W", "beta_G"):
            v = getattr(self, name)
            if v is not None and not (isinstance(v, (int, float)) and not isinstance(v, bool) and v >= 0
                                      and math.isfinite(v)):
                raise ConfigError(name, f"must be a finite nonnegative number, got {v!r}")
        if has_lam and self.m < 1:
            raise ConfigError("m", "lambda rates need m >= 1")
        try:
            Condition(self.condition)
        except ValueError:
            raise ConfigError("condition", f"unknown condition {self.condition!r}; "
                              f"expected one of {[c.value for c in Condition]}") from None
        if self.engine not in ENGINES:
            raise ConfigError("engine", f"unknown engine {self.engine!r}; expected one of {list(ENGINES)}")
        if self.engine == "embedding" and self.m < 1:
            raise ConfigError("engine", "the embedding engine needs m >= 1")
        if self.kernel is not None and self.kernel not in sim.KERNELS:
            raise ConfigError("kernel", f"unknown kernel {self.kernel!r}; expected one of {list(sim.KERNELS)}")

    @property
    def params(self) -> sim.ModelParams:
        kw = dict(large_outbreak_threshold=self.large_outbreak_threshold, global_threshold=self.global_threshold)
        if self.lambda_W is not None:
            return sim.ModelParams.from_lambdas(self.n, self.m, self.lambda_W, self.lambda_G, self.period, **kw)
        return sim.ModelParams(self.n, self.m, self.beta_W, self.beta_G, self.period, **kw)

    def rates(self) -> tuple[float, float]:
        """``(lambda_W, lambda_G)``, derived from beta rates when needed."""
        if self.lambda_W is not None:
            return float(self.lambda_W), float(self.lambda_G)
        p = self.params
        return p.lambda_W, (p.lambda_G if self.m >= 1 else 0.0)

    def to_dict(self) -> dict[str, Any]:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["period"] = self.period.to_dict()
        return {k: v for k, v in d.items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config", "expected a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown field")
        for name in ("n", "m"):
            if name not in d:
                raise ConfigError(name, "missing required field")
        return cls(**d)

    @classmethod
    def load(cls, path: str | os.PathLike, **overrides) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config", "expected a JSON object")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _run_one(cfg: ExperimentConfig, i: int) -> sim.Outcome:
    rng = replicate_rng(cfg.master_seed, i)
    if cfg.engine == "embedding":
        return embed.run_coupled(cfg.params, rng, kernel=cfg.kernel)
    return sim.run_multi(cfg.params, rng, cfg.kernel)


def _run_shard(cfg: ExperimentConfig, indices: range) -> list[tuple[int, sim.Outcome]]:
    return [(i, _run_one(cfg, i)) for i in indices]


def _shards(total: int, workers: int) -> list[range]:
    bounds = np.linspace(0, total, workers + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def run_replicates(cfg: ExperimentConfig) -> list[sim.Outcome]:
    """All replicates in index order; identical for any worker count."""
    shards = _shards(cfg.replicates, cfg.workers)
    if cfg.workers == 1 or len(shards) == 1:
        results = _run_shard(cfg, range(cfg.replicates))
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = pool.map(_run_shard, [cfg] * len(shards), shards)
            results = [r for part in parts for r in part]
    results.sort(key=lambda r: r[0])
    return [o for _, o in results]


def outcomes_csv(outcomes: list[sim.Outcome]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(OUTCOME_COLUMNS)
    for i, o in enumerate(outcomes):
        w.writerow([i, o.Z_T, o.Zhat_C, o.Z_C, repr(o.A_T), o.community0_size,
                    int(o.community0_major), int(o.global_epidemic)])
    return buf.getvalue()


def outcome_columns(outcomes: list[sim.Outcome]) -> dict[str, np.ndarray]:
    """Outcomes as column arrays keyed like the outcomes CSV."""
    return {
        "replicate": np.arange(len(outcomes)),
        "Z_T": np.array([o.Z_T for o in outcomes], dtype=np.int64),
        "Zhat_C": np.array([o.Zhat_C for o in outcomes], dtype=np.int64),
        "Z_C": np.array([o.Z_C for o in outcomes], dtype=np.int64),
        "A_T": np.array([o.A_T for o in outcomes], dtype=float),
        "community0_size": np.array([o.community0_size for o in outcomes], dtype=np.int64),
        "community0_major": np.array([o.community0_major for o in outcomes], dtype=np.int64),
        "global_epidemic": np.array([o.global_epidemic for o in outcomes], dtype=np.int64),
    }


def read_outcomes_csv(path: str | os.PathLike) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or set(OUTCOME_COLUMNS) - set(rows[0]):
        raise ConfigError("outcomes", f"expected columns {list(OUTCOME_COLUMNS)}")
    out = {c: np.array([float(r[c]) for r in rows]) for c in OUTCOME_COLUMNS}
    for c in OUTCOME_COLUMNS:
        if c != "A_T":
            out[c] = out[c].astype(np.int64)
    return out


def _scaled_fields(p: sim.ModelParams) -> dict:
    # scaled by the m communities that receive the epidemic from outside
    m = max(p.m, 1)
    return {
        "Z_T": "Z_T", "Z_C": "Z_C", "Zhat_C": "Zhat_C", "A_T": "A_T",
        "Ztilde_T": lambda o: o.Z_T / (p.n * m),
        "Zbar_C": lambda o: o.Z_C / m,
        "Atilde": lambda o: o.A_T / (p.n * m),
    }


def summaries(outcomes: list[sim.Outcome], params: sim.ModelParams) -> dict:
    """Conditional summaries for every condition and field; empty conditions report count 0."""
    out = {}
    sel = _scaled_fields(params)
    for cond in Condition:
        count = int(condition_mask(outcomes, cond).sum())
        entry: dict[str, Any] = {"count": count, "total": len(outcomes)}
        if count:
            for name in SUMMARY_FIELDS:
                s = summarize(outcomes, sel[name], cond, name)
                entry[name] = {"mean": s.mean, "variance": s.variance, "std_error": s.std_error}
        out[cond.value] = entry
    return out


def limits_dict(period: InfectiousPeriod, lambda_W: float, lambda_G: float, m: int | None = None) -> dict:
    q = limit_quantities(period, lambda_W, lambda_G)
    d = q.to_dict()
    d["period"] = period.to_dict()
    if m is not None and m >= 1:
        d["m"] = m
        d["p_RF"] = p_rf(lambda_G, q.pi_W, q.z_inf, q.mu_I, m)
    return d


def overlays(cfg: ExperimentConfig, grid: np.ndarray) -> dict[str, np.ndarray]:
    """Approximating densities of Z_T on ``grid``, for the laws that exist at these parameters."""
    out = {}
    if cfg.m < 1:
        return out
    lw, lg = cfg.rates()
    try:
        q = limit_quantities(cfg.period, lw, lg)
    except AnalyticDomainError:
        return out
    try:
        out["mixture"] = approx.fixed_m_mixture(cfg.n, cfg.m, q).pdf(grid)
    except (AnalyticDomainError, ValueError):
        pass
    try:
        mean, var = approx.final_size_normal(cfg.n, cfg.m, q)
        out["normal"] = approx.normal_pdf(mean, var, grid)
    except AnalyticDomainError:
        pass
    return out


def _write_xy(path: Path, header: tuple[str, str], x, y) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for a, b in zip(x, y):
            w.writerow([repr(float(a)), repr(float(b))])


def write_histogram(path: Path, sample: np.ndarray, bins: int) -> np.ndarray:
    edges = equal_width_bins(sample, bins)
    counts, _ = np.histogram(sample, edges)
    width = np.diff(edges)
    dens = counts / (sample.size * width)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("bin_left", "bin_right", "count", "empirical_density"))
        for a, b, c, d in zip(edges[:-1], edges[1:], counts, dens):
            w.writerow([repr(float(a)), repr(float(b)), int(c), repr(float(d))])
    return edges


def run_experiment(cfg: ExperimentConfig) -> dict[str, Path]:
    """Run all replicates and write every artifact to ``cfg.outputs``."""
    out = Path(cfg.outputs)
    out.mkdir(parents=True, exist_ok=True)
    outcomes = run_replicates(cfg)
    paths = {
        "config": out / "config.json",
        "outcomes": out / "outcomes.csv",
        "summaries": out / "summaries.json",
    }
    paths["config"].write_text(cfg.dumps() + "\n")
    paths["outcomes"].write_text(outcomes_csv(outcomes))
    summ = summaries(outcomes, cfg.params)
    summ["condition"] = cfg.condition
    summ["engine"] = cfg.engine
    paths["summaries"].write_text(json.dumps(summ, indent=2) + "\n")

    mask = condition_mask(outcomes, cfg.condition)
    sample = np.array([o.Z_T for o, k in zip(outcomes, mask) if k], dtype=float)
    if sample.size:
        paths["histogram"] = out / "histogram.csv"
        edges = write_histogram(paths["histogram"], sample, cfg.bins)
        grid = 0.5 * (edges[:-1] + edges[1:])
        for name, dens in overlays(cfg, grid).items():
            paths[f"overlay_{name}"] = out / f"overlay_{name}.csv"
            _write_xy(paths[f"overlay_{name}"], ("x", "density"), grid, dens)

    lw, lg = cfg.rates()
    try:
        limits = limits_dict(cfg.period, lw, lg, cfg.m)
    except AnalyticDomainError as exc:
        limits = {"available": False, "reason": str(exc)}
    paths["limits"] = out / "limits.json"
    paths["limits"].write_text(json.dumps(limits, indent=2) + "\n")
    return paths

