"""Direct simulation of final outcomes.

Three epidemics are provided:

* :func:`run_single` - a one-community SIR epidemic;
* :func:`run_external` - a one-community epidemic whose initial infectives are
  produced by ``t`` units of external pressure;
* :func:`run_multi` - the full epidemic on ``m + 1`` communities of size ``n``.

Two interchangeable kernels produce the same laws: ``"bfs"`` explores the
latent contact graph individual by individual (numba-compiled when available)
and ``"chain"`` runs a vectorised chain-binomial recursion on community
counts. ``kernel=None`` picks ``"bfs"`` when numba is usable, else ``"chain"``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _chain, _kernels
from ._accel import default_kernel
from .periods import Exponential, InfectiousPeriod

KERNELS = ("bfs", "chain")


def _kernel(kernel: str | None) -> str:
    kernel = kernel or default_kernel()
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")
    return kernel


@dataclass(frozen=True)
class ModelParams:
    """Model ``m + 1`` communities of ``n`` individuals with per-pair rates.

    ``beta_W`` acts between members of the same community, ``beta_G`` between
    any two individuals of the whole population. Thresholds default to
    ``ln n`` (major local outbreak) and ``ln m`` (global epidemic, needs m >= 2).
    """

    n: int
    m: int
    beta_W: float
    beta_G: float
    period: InfectiousPeriod = field(default_factory=Exponential)
    large_outbreak_threshold: float | None = None
    global_threshold: float | None = None

    def __post_init__(self):
        if self.n < 1 or self.m < 0:
            raise ValueError(f"need n >= 1 and m >= 0, got n={self.n}, m={self.m}")
        if self.beta_W < 0 or self.beta_G < 0:
            raise ValueError("infection rates must be nonnegative")

    @classmethod
    def from_lambdas(cls, n: int, m: int, lambda_W: float, lambda_G: float,
                     period: InfectiousPeriod | None = None, **kwargs) -> "ModelParams":
        """Set beta_W = lambda_W / n and beta_G = lambda_G / (n^2 m)."""
        if m < 1:
            raise ValueError("lambda_G scaling needs m >= 1")
        return cls(n=n, m=m, beta_W=lambda_W / n, beta_G=lambda_G / (n * n * m),
                   period=period or Exponential(1.0), **kwargs)

    @property
    def lambda_W(self) -> float:
        return self.beta_W * self.n

    @property
    def lambda_G(self) -> float:
        return self.beta_G * self.n**2 * self.m

    @property
    def major_threshold(self) -> float:
        if self.large_outbreak_threshold is not None:
            return float(self.large_outbreak_threshold)
        return math.log(self.n)

    @property
    def global_epidemic_threshold(self) -> float:
        if self.global_threshold is not None:
            return float(self.global_threshold)
        return math.log(self.m) if self.m >= 2 else math.inf

    def with_rates(self, beta_W: float | None = None, beta_G: float | None = None) -> "ModelParams":
        return replace(self, beta_W=self.beta_W if beta_W is None else beta_W,
                       beta_G=self.beta_G if beta_G is None else beta_G)


@dataclass(frozen=True)
class Outcome:
    """Final result of one replicate.

    ``community0_major`` refers to the purely local epidemic started in
    community 0 by the initial infective, before any global contacts.
    """

    Z_T: int
    Zhat_C: int
    Z_C: int
    A_T: float
    community_sizes: np.ndarray
    community0_major: bool
    global_epidemic: bool

    @classmethod
    def from_sizes(cls, sizes: np.ndarray, A_T: float, z0_local: int,
                   params: ModelParams) -> "Outcome":
        sizes = np.asarray(sizes, dtype=np.int64)
        thr = params.major_threshold
        zhat = int(np.count_nonzero(sizes))
        return cls(
            Z_T=int(sizes.sum()),
            Zhat_C=zhat,
            # a community needs at least one infective to count, even when thr <= 1
            Z_C=int(np.count_nonzero((sizes >= thr) & (sizes > 0))),
            A_T=float(A_T),
            community_sizes=sizes,
            community0_major=bool(z0_local >= thr),
            global_epidemic=bool(zhat >= params.global_epidemic_threshold),
        )

    @property
    def community0_size(self) -> int:
        return int(self.community_sizes[0])


def run_single(n_sus: int, a_init: int, beta_w: float, period: InfectiousPeriod,
               rng: np.random.Generator, kernel: str | None = None) -> tuple[int, float]:
    """Size ``Z`` (including the ``a_init`` initial infectives) and severity ``A``."""
    if n_sus < 0 or a_init < 1:
        raise ValueError("need n_sus >= 0 and a_init >= 1")
    if _kernel(kernel) == "chain":
        return _chain.chain_single(n_sus, a_init, beta_w, period, rng)
    kind, p1, p2 = period.code
    z, a = _kernels.bfs_single(int(n_sus), int(a_init), float(beta_w), kind, p1, p2, rng)
    return int(z), float(a)


def run_external(n: int, t: float, beta_w: float, beta_g_nm: float, period: InfectiousPeriod,
                 rng: np.random.Generator, kernel: str | None = None) -> tuple[int, float]:
    """Epidemic after ``t`` units of external pressure; ``beta_g_nm`` = beta_G * n * m.

    Each individual is independently still susceptible with probability
    ``exp(-beta_g_nm * t)``; the rest start infective.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    S = int(rng.binomial(n, math.exp(-beta_g_nm * t)))
    if S == n:
        return 0, 0.0
    return run_single(S, n - S, beta_w, period, rng, kernel)


def run_multi(params: ModelParams, rng: np.random.Generator, kernel: str | None = None) -> Outcome:
    p = params
    if _kernel(kernel) == "chain":
        _, A, sizes, z0, _ = _chain.chain_multi(p.n, p.m, p.beta_W, p.beta_G, p.period, rng)
    else:
        kind, p1, p2 = p.period.code
        _, A, sizes, z0, _ = _kernels.bfs_multi(p.n, p.m, float(p.beta_W), float(p.beta_G),
                                                kind, p1, p2, rng)
    return Outcome.from_sizes(sizes, A, z0, p)
