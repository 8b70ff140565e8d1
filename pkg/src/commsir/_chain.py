"""Vectorised chain-binomial engine (pure numpy).

Individuals inside a community are exchangeable, so the final outcome can be
generated on counts: a batch of infectives with total period ``s`` lets each
susceptible of its community escape local infection with probability
``exp(-beta_W s)`` and each susceptible anywhere escape global infection with
probability ``exp(-beta_G s)``, independently. Batching pressure by
generation gives the same final-outcome law as exploring the contact graph
edge by edge, at a cost of O(generations x communities).
"""
from __future__ import annotations

import math

import numpy as np

from .periods import InfectiousPeriod


def chain_single(n_sus: int, a_init: int, beta_w: float, period: InfectiousPeriod,
                 rng: np.random.Generator) -> tuple[int, float]:
    S = int(n_sus)
    Z = int(a_init)
    new = float(period.sum_of(rng, a_init))
    A = new
    while S > 0 and new > 0.0 and beta_w > 0.0:
        k = int(rng.binomial(S, -math.expm1(-beta_w * new)))
        if k == 0:
            break
        S -= k
        Z += k
        new = float(period.sum_of(rng, k))
        A += new
    return Z, A


def chain_multi(n: int, m: int, beta_w: float, beta_g: float, period: InfectiousPeriod,
                rng: np.random.Generator):
    """Same contract as the BFS multi-community kernel: ``(Z_T, A_T, sizes, z0, a0)``."""
    C = m + 1
    S = np.full(C, n, dtype=np.int64)
    sizes = np.zeros(C, dtype=np.int64)
    z0, a0 = chain_single(n - 1, 1, beta_w, period, rng)
    S[0] -= z0
    sizes[0] = z0
    A = a0
    local = np.zeros(C)
    glob = a0
    if beta_g <= 0.0:
        return int(z0), float(A), sizes, int(z0), float(a0)
    while True:
        pinf = -np.expm1(-(beta_w * local + beta_g * glob))
        k = rng.binomial(S, pinf)
        if not k.any():
            break
        S -= k
        sizes += k
        sev = np.asarray(period.sum_of(rng, k), dtype=float)
        local = sev
        glob = float(sev.sum())
        A += glob
    return int(sizes.sum()), float(A), sizes, int(z0), float(a0)


def chain_path(n: int, beta_w: float, rate: float, t_max: float, period: InfectiousPeriod,
               rng: np.random.Generator):
    times, cz, ca = [], [], []
    S, t, z, a = n, 0.0, 0, 0.0
    if rate <= 0.0:
        return np.empty(0), np.empty(0, np.int64), np.empty(0)
    while S > 0:
        t += rng.exponential(1.0 / rate)
        if t > t_max:
            break
        if rng.integers(0, n) < S:
            dz, da = chain_single(S - 1, 1, beta_w, period, rng)
            S -= dz
            z += dz
            a += da
            times.append(t)
            cz.append(z)
            ca.append(a)
    return np.array(times), np.array(cz, dtype=np.int64), np.array(ca)
