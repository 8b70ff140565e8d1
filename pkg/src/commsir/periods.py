"""Infectious-period distributions.

Three laws are supported: a constant period, an exponential period and a
gamma period. Each carries its closed-form Laplace transform, mean and
variance, and can be sampled from a ``numpy.random.Generator``.

Kernels compiled with numba cannot take these objects directly, so every
period also exposes ``code``: a ``(kind, p1, p2)`` triple of plain numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

KIND_CONSTANT = 0
KIND_EXPONENTIAL = 1
KIND_GAMMA = 2


class PeriodDomainError(ValueError):
    """Raised when a Laplace transform is requested outside its finite region."""


@dataclass(frozen=True)
class InfectiousPeriod:
    """Base class; use :class:`Constant`, :class:`Exponential` or :class:`Gamma`."""

    def laplace(self, theta: float) -> float:
        raise NotImplementedError

    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def variance(self) -> float:
        raise NotImplementedError

    @property
    def code(self) -> tuple[int, float, float]:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def sum_of(self, rng: np.random.Generator, k):
        """Draw the sum of ``k`` independent periods (``k`` may be an array)."""
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(InfectiousPeriod):
    value: float = 1.0

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError(f"constant period must be positive, got {self.value}")

    def laplace(self, theta: float) -> float:
        return math.exp(-theta * self.value)

    @property
    def mean(self) -> float:
        return float(self.value)

    @property
    def variance(self) -> float:
        return 0.0

    @property
    def code(self):
        return KIND_CONSTANT, float(self.value), 0.0

    def sample(self, rng, size=None):
        if size is None:
            return float(self.value)
        return np.full(size, float(self.value))

    def sum_of(self, rng, k):
        return np.asarray(k, dtype=float) * self.value

    def to_dict(self):
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class Exponential(InfectiousPeriod):
    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"exponential rate must be positive, got {self.rate}")

    def laplace(self, theta: float) -> float:
        if theta <= -self.rate:
            raise PeriodDomainError(f"Laplace transform infinite for theta={theta} <= -rate")
        return self.rate / (self.rate + theta)

    @property
    def mean(self) -> float:
        return 1.0 / self.rate

    @property
    def variance(self) -> float:
        return 1.0 / self.rate**2

    @property
    def code(self):
        return KIND_EXPONENTIAL, float(self.rate), 0.0

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.rate, size)

    def sum_of(self, rng, k):
        return rng.gamma(np.asarray(k, dtype=float), 1.0 / self.rate)

    def to_dict(self):
        return {"kind": "exponential", "rate": self.rate}


@dataclass(frozen=True)
class Gamma(InfectiousPeriod):
    shape: float = 1.0
    rate: float = 1.0

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise ValueError(f"gamma shape and rate must be positive, got {self.shape}, {self.rate}")

    def laplace(self, theta: float) -> float:
        if theta <= -self.rate:
            raise PeriodDomainError(f"Laplace transform infinite for theta={theta} <= -rate")
        return (self.rate / (self.rate + theta)) ** self.shape

    @property
    def mean(self) -> float:
        return self.shape / self.rate

    @property
    def variance(self) -> float:
        return self.shape / self.rate**2

    @property
    def code(self):
        return KIND_GAMMA, float(self.shape), float(self.rate)

    def sample(self, rng, size=None):
        # numpy's gamma uses Marsaglia-Tsang rejection
        return rng.gamma(self.shape, 1.0 / self.rate, size)

    def sum_of(self, rng, k):
        return rng.gamma(self.shape * np.asarray(k, dtype=float), 1.0 / self.rate)

    def to_dict(self):
        return {"kind": "gamma", "shape": self.shape, "rate": self.rate}


def laplace(period: InfectiousPeriod, theta: float) -> float:
    """E[exp(-theta * I)] in closed form."""
    return period.laplace(theta)


def moments(period: InfectiousPeriod) -> tuple[float, float]:
    """Return ``(mean, variance)`` of the period."""
    return period.mean, period.variance


def sample_period(period: InfectiousPeriod, rng: np.random.Generator) -> float:
    return float(period.sample(rng))


def from_dict(d: dict[str, Any]) -> InfectiousPeriod:
    """Build a period from its config representation, e.g. ``{"kind": "exponential", "rate": 1.0}``."""
    d = dict(d)
    kind = d.pop("kind", None)
    if kind in ("constant", "const"):
        return Constant(float(d.get("value", 1.0)))
    if kind in ("exponential", "exp"):
        return Exponential(float(d.get("rate", 1.0)))
    if kind == "gamma":
        return Gamma(float(d["shape"]), float(d["rate"]))
    raise ValueError(f"unknown period kind {kind!r}")


def parse_period(text: str) -> InfectiousPeriod:
    """Parse the compact CLI form: ``exp:RATE``, ``const:VALUE`` or ``gamma:SHAPE,RATE``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind in ("const", "constant"):
            return Constant(float(rest or 1.0))
        if kind in ("exp", "exponential"):
            return Exponential(float(rest or 1.0))
        if kind == "gamma":
            shape, rate = (float(v) for v in rest.split(","))
            return Gamma(shape, rate)
    except ValueError as exc:
        raise ValueError(f"bad period spec {text!r}: {exc}") from None
    raise ValueError(f"unknown period kind in {text!r}")
