"""Empirical-distribution checks used to validate simulators against exact laws."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

# asymptotic two-sided Kolmogorov-Smirnov constants c(alpha)
KS_C = {0.05: 1.358, 0.01: 1.628, 0.001: 1.949}


class Condition(str, Enum):
    NONE = "none"
    COMMUNITY0_MAJOR = "community0_major"
    GLOBAL_EPIDEMIC = "global_epidemic"
    NOT_GLOBAL = "not_global"


def condition_mask(outcomes: Sequence, condition: Condition | str) -> np.ndarray:
    condition = Condition(condition)
    if condition is Condition.NONE:
        return np.ones(len(outcomes), dtype=bool)
    if condition is Condition.COMMUNITY0_MAJOR:
        return np.array([o.community0_major for o in outcomes], dtype=bool)
    glob = np.array([o.global_epidemic for o in outcomes], dtype=bool)
    return glob if condition is Condition.GLOBAL_EPIDEMIC else ~glob


def ks_distance(sample, cdf: Callable) -> float:
    """Sup distance between the empirical CDF of ``sample`` and ``cdf``.

    The lower deviation uses the left limit of ``cdf`` (evaluated one ulp
    below each point), so step-function references are handled exactly.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("ks_distance needs a nonempty sample")
    i = np.arange(1, n + 1)
    # ties: the empirical CDF jumps to its right-limit at the last copy
    last = np.r_[x[1:] != x[:-1], True]
    first = np.r_[True, x[1:] != x[:-1]]
    F = np.asarray(cdf(x[last]), dtype=float)
    F_left = np.asarray(cdf(np.nextafter(x[first], -np.inf)), dtype=float)
    upper = np.abs(i[last] / n - F)
    lower = np.abs(F_left - (i[first] - 1) / n)
    return float(max(upper.max(), lower.max()))


def ks_2samp_statistic(a, b) -> float:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("ks_2samp_statistic needs nonempty samples")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.abs(fa - fb).max())


def ks_2samp_critical(n1: int, n2: int, alpha: float = 0.01) -> float:
    return KS_C[alpha] * math.sqrt((n1 + n2) / (n1 * n2))


def ks_critical(n: int, alpha: float = 0.01) -> float:
    return KS_C[alpha] / math.sqrt(n)


def binned_tv(sample, reference, bins) -> float:
    """Total variation between binned empirical and reference masses.

    ``reference`` is either a CDF callable or an array of per-bin masses.
    Sample points and reference mass outside ``bins`` go to two overflow
    cells (below / above), which are included in the distance.
    """
    edges = np.asarray(bins, dtype=float)
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise ValueError("binned_tv needs a nonempty sample")
    counts, _ = np.histogram(x, edges)
    # np.histogram closes the last bin on the right; overflow uses the same convention
    below = np.count_nonzero(x < edges[0])
    above = np.count_nonzero(x > edges[-1])
    emp = np.r_[below, counts, above] / x.size
    if callable(reference):
        F = np.asarray(reference(edges), dtype=float)
        ref = np.r_[F[0], np.diff(F), 1.0 - F[-1]]
    else:
        masses = np.asarray(reference, dtype=float)
        if masses.size != edges.size - 1:
            raise ValueError("reference masses must have one entry per bin")
        ref = np.r_[0.0, masses, max(0.0, 1.0 - masses.sum())]
    if below or above:
        warnings.warn(f"binned_tv: {below} sample points below and {above} above the bins", stacklevel=2)
    return float(0.5 * np.abs(emp - ref).sum())


def discrete_tv(sample, pmf, offset: int = 0) -> float:
    """TV between integer ``sample`` and ``pmf`` where ``pmf[i]`` is P(X = i + offset)."""
    x = np.asarray(sample, dtype=np.int64) - offset
    pmf = np.asarray(pmf, dtype=float)
    if x.size == 0:
        raise ValueError("discrete_tv needs a nonempty sample")
    if x.min() < 0:
        raise ValueError("sample value below the pmf support")
    size = max(pmf.size, int(x.max()) + 1)
    emp = np.bincount(x, minlength=size) / x.size
    ref = np.zeros(size)
    ref[: pmf.size] = pmf
    return float(0.5 * (np.abs(emp - ref).sum() + max(0.0, 1.0 - ref.sum())))


def equal_width_bins(sample, bins: int = 40) -> np.ndarray:
    x = np.asarray(sample, dtype=float)
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, bins + 1)


@dataclass(frozen=True)
class PartialSummary:
    """Mergeable running moments (count, sum, sum of squares)."""

    count: int = 0
    total: float = 0.0
    total_sq: float = 0.0

    @classmethod
    def of(cls, values: Iterable[float]) -> "PartialSummary":
        v = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
        return cls(int(v.size), float(v.sum()), float(np.dot(v, v)))

    def merge(self, other: "PartialSummary") -> "PartialSummary":
        return PartialSummary(self.count + other.count, self.total + other.total,
                              self.total_sq + other.total_sq)

    __add__ = merge


@dataclass(frozen=True)
class ConditionalSummary:
    condition: str
    field: str
    count: int
    total: int
    mean: float
    variance: float
    std_error: float

    @classmethod
    def from_partial(cls, part: PartialSummary, condition: str, field: str, total: int) -> "ConditionalSummary":
        if part.count == 0:
            raise ValueError(f"no replicates satisfy condition {condition!r}")
        mean = part.total / part.count
        var = 0.0
        if part.count > 1:
            var = max(0.0, (part.total_sq - part.count * mean * mean) / (part.count - 1))
        return cls(condition, field, part.count, total, mean, var, math.sqrt(var / part.count))

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def field_values(outcomes: Sequence, field: str | Callable) -> np.ndarray:
    if callable(field):
        return np.array([field(o) for o in outcomes], dtype=float)
    return np.array([getattr(o, field) for o in outcomes], dtype=float)


def summarize(outcomes: Sequence, field: str | Callable, condition: Condition | str = Condition.NONE,
              name: str | None = None) -> ConditionalSummary:
    """Mean, (unbiased) variance and standard error of ``field`` over conditioned replicates."""
    if len(outcomes) == 0:
        raise ValueError("summarize needs at least one outcome")
    mask = condition_mask(outcomes, condition)
    vals = field_values([o for o, keep in zip(outcomes, mask) if keep], field)
    label = name or (field if isinstance(field, str) else getattr(field, "__name__", "field"))
    return ConditionalSummary.from_partial(PartialSummary.of(vals), Condition(condition).value, label,
                                           len(outcomes))
