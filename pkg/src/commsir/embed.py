"""Embedding construction for the final outcome of the multi-community epidemic.

Each community ``i`` owns a trigger Poisson process of rate
``beta_G * n^2 * m`` on a pressure axis ``t``. At each trigger a uniform
member of the community is picked; if still susceptible, it starts an
instantaneous within-community epidemic among the current susceptibles.
``Z_i(t)`` and ``A_i(t)`` accumulate the sizes and severities of these
epidemics, so ``(Z_i(t), A_i(t))`` has the law of the epidemic after ``t``
units of external pressure (see :func:`commsir.sim.run_external`).

If every individual receives ``T0`` units of initial pressure, the final
outcome follows from the severity fixed point on the scaled axis::

    T_{k+1} = T_0 + A_total(T_k) / (n m),    T_0 = T0 / (n m),

iterated until two successive values coincide. Paths are step functions, so
the iteration stops after at most (number of jumps + 1) steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _chain, _kernels
from .sim import ModelParams, Outcome, _kernel, run_external, run_single

TAU_EPS = 1e-6


class HorizonError(RuntimeError):
    """The severity fixed point lies beyond the horizon the paths were built for."""


@dataclass(frozen=True)
class CommunityPath:
    """Right-continuous cumulative (size, severity) step path of one community."""

    jump_times: np.ndarray
    cum_sizes: np.ndarray
    cum_severities: np.ndarray
    n: int
    t_max: float

    def __post_init__(self):
        t = np.asarray(self.jump_times, dtype=float)
        z = np.asarray(self.cum_sizes, dtype=np.int64)
        a = np.asarray(self.cum_severities, dtype=float)
        if not (t.shape == z.shape == a.shape) or t.ndim != 1:
            raise ValueError("path arrays must be one-dimensional and of equal length")
        if (np.diff(t) < 0).any() or (np.diff(z) < 0).any() or (np.diff(a) < 0).any():
            raise ValueError("path arrays must be nondecreasing")
        if z.size and (z[0] < 0 or z[-1] > self.n):
            raise ValueError("cumulative sizes must lie in [0, n]")
        object.__setattr__(self, "jump_times", t)
        object.__setattr__(self, "cum_sizes", z)
        object.__setattr__(self, "cum_severities", a)

    def evaluate(self, t: float) -> tuple[int, float]:
        k = int(np.searchsorted(self.jump_times, t, side="right"))
        if k == 0:
            return 0, 0.0
        return int(self.cum_sizes[k - 1]), float(self.cum_severities[k - 1])

    @property
    def final_size(self) -> int:
        return int(self.cum_sizes[-1]) if self.cum_sizes.size else 0


def trigger_rate(params: ModelParams, n: int | None = None) -> float:
    """Trigger rate of a community of ``n`` members (default ``params.n``).

    Each member is hit at rate ``beta_G n m`` on the pressure axis, so a
    community of the model's size sees rate ``beta_G n^2 m``.
    """
    size = params.n if n is None else n
    return params.beta_G * size * params.n * params.m


def _paths_from_flat(times, cz, ca, counts, n, t_max) -> list[CommunityPath]:
    out, pos = [], 0
    for k in counts:
        k = int(k)
        out.append(CommunityPath(times[pos:pos + k], cz[pos:pos + k], ca[pos:pos + k], n, t_max))
        pos += k
    return out


def community_path(n: int, params: ModelParams, t_max: float, rng: np.random.Generator,
                   kernel: str | None = None) -> CommunityPath:
    return community_paths(1, n, params, t_max, rng, kernel)[0]


def community_paths(count: int, n: int, params: ModelParams, t_max: float,
                    rng: np.random.Generator, kernel: str | None = None) -> list[CommunityPath]:
    """``count`` independent community paths on ``[0, t_max]``."""
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    rate = trigger_rate(params, n)
    if _kernel(kernel) == "chain":
        return [CommunityPath(*_chain.chain_path(n, params.beta_W, rate, t_max, params.period, rng),
                              n, t_max) for _ in range(count)]
    kind, p1, p2 = params.period.code
    flat = _kernels.bfs_paths(int(count), int(n), float(params.beta_W), float(rate), float(t_max),
                              kind, p1, p2, rng)
    return _paths_from_flat(*flat, n, t_max)


@dataclass(frozen=True)
class SeverityFixedPoint:
    T_inf: float
    Z_total: int
    A_total: float
    X_count: int
    iterations: int
    sizes: np.ndarray
    severities: np.ndarray


def solve_severity(T0_tilde: float, paths: list[CommunityPath], n: int | None = None,
                   threshold: float | None = None) -> SeverityFixedPoint:
    """Iterate ``T <- T0_tilde + A_total(T) / (n m)`` to its exact fixed point.

    ``n`` defaults to the paths' community size; ``threshold`` (default
    ``ln n``) defines ``X_count``, the number of communities whose size at
    the fixed point reaches it.
    """
    if T0_tilde < 0:
        raise ValueError("T0_tilde must be >= 0")
    m = len(paths)
    if m == 0:
        return SeverityFixedPoint(float(T0_tilde), 0, 0.0, 0, 0, np.zeros(0, np.int64), np.zeros(0))
    n = paths[0].n if n is None else n
    thr = math.log(n) if threshold is None else threshold
    horizon = min(p.t_max for p in paths)

    times = np.concatenate([p.jump_times for p in paths])
    dA = np.concatenate([np.diff(p.cum_severities, prepend=0.0) for p in paths])
    order = np.argsort(times, kind="stable")
    times = times[order]
    cumA = np.r_[0.0, np.cumsum(dA[order])]
    scale = float(n * m)

    T = float(T0_tilde)
    iterations = 0
    while True:
        if T > horizon:
            raise HorizonError(f"severity iterate {T:.6g} exceeds path horizon {horizon:.6g}")
        nxt = T0_tilde + cumA[np.searchsorted(times, T, side="right")] / scale
        iterations += 1
        if nxt == T:
            break
        T = nxt

    vals = [p.evaluate(T) for p in paths]
    sizes = np.array([v[0] for v in vals], dtype=np.int64)
    sev = np.array([v[1] for v in vals], dtype=float)
    x_count = int(np.count_nonzero((sizes >= thr) & (sizes > 0)))
    return SeverityFixedPoint(float(T), int(sizes.sum()), float(sev.sum()), x_count, iterations, sizes, sev)


def default_horizon(T0_tilde: float, mu_I: float) -> float:
    return 2.0 * (T0_tilde + mu_I + 1.0)


def run_modified(T0: float, params: ModelParams, rng: np.random.Generator, t_max: float | None = None,
                 kernel: str | None = None) -> Outcome:
    """Final outcome of communities ``1..m`` when everyone starts with ``T0`` units of pressure.

    The returned outcome covers the ``m`` communities only; ``Z_T`` may be 0
    and ``community0_major`` is always False.
    """
    if T0 < 0:
        raise ValueError("T0 must be >= 0")
    p = params
    if p.m < 1:
        raise ValueError("run_modified needs m >= 1")
    T0_tilde = T0 / (p.n * p.m)
    t_max = default_horizon(T0_tilde, p.period.mean) if t_max is None else t_max
    paths = community_paths(p.m, p.n, p, t_max, rng, kernel)
    fp = solve_severity(T0_tilde, paths, p.n, p.major_threshold)
    return Outcome.from_sizes(fp.sizes, fp.A_total, 0, p)


def run_coupled(params: ModelParams, rng: np.random.Generator, t_max: float | None = None,
                kernel: str | None = None) -> Outcome:
    """Embedding engine for the whole epidemic.

    Community 0's local epidemic from one initial infective is run first; its
    severity is the initial pressure on communities ``1..m``. Pressure fed back
    into community 0 is ignored, which is negligible for large populations.
    """
    p = params
    z0, a0 = run_single(p.n - 1, 1, p.beta_W, p.period, rng, kernel)
    if p.m == 0 or p.beta_G <= 0.0:
        sizes = np.zeros(p.m + 1, np.int64)
        sizes[0] = z0
        return Outcome.from_sizes(sizes, a0, z0, p)
    T0_tilde = a0 / (p.n * p.m)
    t_max = default_horizon(T0_tilde, p.period.mean) if t_max is None else t_max
    paths = community_paths(p.m, p.n, p, t_max, rng, kernel)
    fp = solve_severity(T0_tilde, paths, p.n, p.major_threshold)
    return Outcome.from_sizes(np.r_[z0, fp.sizes], a0 + fp.A_total, z0, p)


@dataclass(frozen=True)
class CurveEstimate:
    """Monte Carlo estimates of ``x(t)``, ``z(t)``, ``a(t)`` and the crossing ``tau``."""

    t: np.ndarray
    x: np.ndarray
    z: np.ndarray
    a: np.ndarray
    se_x: np.ndarray
    se_z: np.ndarray
    se_a: np.ndarray
    tau_hat: float
    replicates: int

    def rows(self):
        for row in zip(self.t, self.x, self.z, self.a, self.se_x, self.se_z, self.se_a):
            yield tuple(float(v) for v in row)


def first_crossing(t, a, eps: float = TAU_EPS) -> float:
    """Smallest ``t > eps`` where ``a(t) - t`` turns nonpositive, linearly interpolated.

    Returns 0 when ``a(t) <= t`` at every grid point above ``eps`` and NaN when
    no crossing happens on the grid.
    """
    t = np.asarray(t, dtype=float)
    d = np.asarray(a, dtype=float) - t
    idx = np.flatnonzero(t > eps)
    if idx.size == 0 or not (d[idx] > 0).any():
        return 0.0
    start = idx[np.argmax(d[idx] > 0)]
    for i in range(start + 1, t.size):
        if d[i] <= 0:
            return float(t[i - 1] + (t[i] - t[i - 1]) * d[i - 1] / (d[i - 1] - d[i]))
    return math.nan


def estimate_curves(params: ModelParams, t_grid, replicates: int, rng: np.random.Generator,
                    kernel: str | None = None) -> CurveEstimate:
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    p = params
    t_grid = np.asarray(t_grid, dtype=float)
    if (t_grid < 0).any():
        raise ValueError("t_grid must be nonnegative")
    beta_g_nm = p.beta_G * p.n * p.m
    thr = p.major_threshold
    Z = np.empty((t_grid.size, replicates))
    A = np.empty_like(Z)
    for g, t in enumerate(t_grid):
        for r in range(replicates):
            Z[g, r], A[g, r] = run_external(p.n, float(t), p.beta_W, beta_g_nm, p.period, rng, kernel)
    X = (Z >= thr).astype(float)
    Z /= p.n
    A /= p.n
    ddof = 1 if replicates > 1 else 0
    se = lambda v: np.sqrt(v.var(axis=1, ddof=ddof) / replicates)  # noqa: E731
    a = A.mean(axis=1)
    return CurveEstimate(t_grid, X.mean(axis=1), Z.mean(axis=1), a, se(X), se(Z), se(A),
                         first_crossing(t_grid, a), replicates)
