"""Reed-Frost final-size laws.

``rf_pmf`` solves the classical triangular final-size system exactly (in
rational arithmetic for small populations, in high-precision floating point
for larger ones). ``rf_brute_pmf`` is an independent oracle that propagates
the chain-binomial generation process state by state. ``rf_sample`` draws
final sizes through the order-statistics (Sellke) construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy.stats import binom

M_MAX = 500
_EXACT_M_MAX = 24
_BRUTE_M_MAX = 10


class ReedFrostError(ValueError):
    pass


@dataclass(frozen=True)
class RFPmf:
    """Final-size law of a Reed-Frost epidemic with 1 initial infective and m susceptibles.

    ``probs[k - 1]`` is P(Z = k) for k = 1..m+1; Z counts the initial infective.
    """

    m: int
    p: float
    probs: np.ndarray

    def __getitem__(self, k: int) -> float:
        """P(Z = k) for 1 <= k <= m+1, zero elsewhere."""
        if 1 <= k <= self.m + 1:
            return float(self.probs[k - 1])
        return 0.0

    @property
    def support(self) -> np.ndarray:
        return np.arange(1, self.m + 2)

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    def cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.probs)])
        idx = np.clip(np.floor(x).astype(int), 0, self.m + 1)
        return np.minimum(cum[idx], 1.0)


def _check(m: int, p: float, m_max: int) -> None:
    if not (isinstance(m, (int, np.integer)) and 1 <= m <= m_max):
        raise ReedFrostError(f"m must be an integer in [1, {m_max}], got {m!r}")
    if not 0.0 <= p <= 1.0:
        raise ReedFrostError(f"p must lie in [0, 1], got {p}")


def _solve_triangular(m: int, q, comb):
    # sum_{k<=l} C(m-k, l-k) P_k / q^{(k+1)(m-l)} = C(m, l),  l = 0..m
    P = []
    for l in range(m + 1):
        acc = comb(m, l)
        for k in range(l):
            acc -= comb(m - k, l - k) * P[k] / q ** ((k + 1) * (m - l))
        P.append(acc * q ** ((l + 1) * (m - l)))
    return P


def rf_pmf(m: int, p: float) -> RFPmf:
    """Exact final-size pmf of the Reed-Frost epidemic (1 infective, ``m`` susceptibles)."""
    _check(m, p, M_MAX)
    if p == 0.0 or p == 1.0:
        probs = np.zeros(m + 1)
        probs[0 if p == 0.0 else m] = 1.0
        return RFPmf(m, p, probs)
    if m <= _EXACT_M_MAX:
        q = 1 - Fraction(p)
        P = _solve_triangular(m, q, lambda a, b: math.comb(a, b))
        probs = np.array([float(v) for v in P])
    else:
        # cancellation eats roughly log10(q^{-(m+1)^2/4}) digits
        lost = (m + 1) ** 2 / 4.0 * -math.log10(1.0 - p)
        with mpmath.workdps(int(lost) + 40):
            q = 1 - mpmath.mpf(p)
            P = _solve_triangular(m, q, lambda a, b: mpmath.mpf(math.comb(a, b)))
            probs = np.array([float(v) for v in P])
    if probs.min() < -1e-9 or abs(probs.sum() - 1.0) > 1e-8:
        raise ReedFrostError(
            f"unstable final-size solve for m={m}, p={p}: min={probs.min():.3g}, sum={probs.sum():.12g}"
        )
    probs = np.clip(probs, 0.0, None)
    return RFPmf(m, p, probs)


def rf_brute_pmf(m: int, p: float) -> RFPmf:
    """Final-size pmf by exact propagation of the chain-binomial generation process.

    States are (susceptibles, current infectives); each generation every
    susceptible escapes all current infectives with probability (1-p)^I.
    Independent of the triangular system used by :func:`rf_pmf`.
    """
    _check(m, p, _BRUTE_M_MAX)
    q = 1.0 - p
    final = np.zeros(m + 1)
    # state[s, i] = P(s susceptibles, i infectives) at the current generation
    state = np.zeros((m + 1, m + 2))
    state[m, 1] = 1.0
    for _ in range(m + 2):
        nxt = np.zeros_like(state)
        for s in range(m + 1):
            for i in range(m + 2):
                w = state[s, i]
                if w == 0.0:
                    continue
                if i == 0:
                    final[m - s] += w
                    continue
                pinf = 1.0 - q**i
                new = np.arange(s + 1)
                nxt[s - new, new] += w * binom.pmf(new, s, pinf)
        state = nxt
        if not state.any():
            break
    return RFPmf(m, p, final)


def rf_sample(m: int, lambda_G: float, pi_W: float, z_inf: float, mu_I: float,
              rng: np.random.Generator, size: int | None = None):
    """Draw Reed-Frost final sizes via the order-statistics construction.

    Each of the ``m`` susceptibles gets an Exp(lambda_G (1 - pi_W)) threshold;
    the final size is the smallest k with k * z_inf * mu_I / m < L_(k), where
    L_(k) is the k-th order statistic and L_(m+1) = inf.
    """
    if m < 1:
        raise ReedFrostError("m must be >= 1")
    n_draws = 1 if size is None else int(size)
    rate = lambda_G * (1.0 - pi_W)
    if rate <= 0.0:
        out = np.ones(n_draws, dtype=np.int64)
        return 1 if size is None else out
    L = np.sort(rng.exponential(1.0 / rate, size=(n_draws, m)), axis=1)
    L = np.concatenate([L, np.full((n_draws, 1), np.inf)], axis=1)
    k = np.arange(1, m + 2)
    escaped = k * (z_inf * mu_I / m) < L
    out = np.argmax(escaped, axis=1) + 1
    return int(out[0]) if size is None else out.astype(np.int64)
