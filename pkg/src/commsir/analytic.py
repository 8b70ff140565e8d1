"""Asymptotic quantities of the multi-community SIR epidemic.

Everything here is deterministic. Fixed points are found by bracketed
bisection; Lambert-W closed forms are kept alongside as independent
cross-checks.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .periods import InfectiousPeriod

_INV_E = math.exp(-1.0)
_BISECT_TOL = 1e-14
_TAU_EPS = 1e-12


class AnalyticDomainError(ValueError):
    pass


def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function for real ``x >= -1/e``.

    Halley iteration from a branch-point series (near -1/e) or an
    asymptotic log start (large x).
    """
    x = float(x)
    if x < -_INV_E:
        if x > -_INV_E - 1e-15:
            x = -_INV_E
        else:
            raise AnalyticDomainError(f"lambert_w0 undefined for x={x} < -1/e")
    if x == 0.0:
        return 0.0
    if x == -_INV_E:
        return -1.0
    if x < -0.25:
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif x < 3.0:
        w = math.log1p(x)
        w = w * (1.0 - math.log1p(w) / (2.0 + w))
    else:
        lx = math.log(x)
        w = lx - math.log(lx)
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w -= step
        if abs(step) <= 1e-16 * (1.0 + abs(w)):
            break
    return w


def _bisect(f: Callable[[float], float], lo: float, hi: float, tol: float = _BISECT_TOL) -> float:
    flo = f(lo)
    if flo == 0.0:
        return lo
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid in (lo, hi):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _smallest_pgf_root(pgf: Callable[[float], float]) -> float:
    """Smallest root of ``s = pgf(s)`` in [0, 1] for a convex pgf.

    s = 1 is always a root. A point with ``pgf(s) < s`` lies strictly between
    the smallest root and 1, so walk down a geometric grid from 1 to find one;
    if none exists the smallest root is 1.
    """
    g = lambda s: pgf(s) - s  # noqa: E731
    s_neg = None
    h = 0.5
    while h > 1e-15:
        s = 1.0 - h
        if g(s) < 0:
            s_neg = s
            break
        h *= 0.5
    if s_neg is None:
        return 1.0
    return _bisect(g, 0.0, s_neg)


def pi_w(period: InfectiousPeriod, lambda_W: float) -> float:
    """Probability that one introduction does not cause a major local outbreak."""
    if lambda_W <= 0:
        raise AnalyticDomainError("lambda_W must be positive")
    if period.mean * lambda_W <= 1.0:
        return 1.0
    return _smallest_pgf_root(lambda s: period.laplace(lambda_W * (1.0 - s)))


def z_inf(R0: float) -> float:
    """Largest root of z = 1 - exp(-R0 z): fraction infected in a major outbreak."""
    if R0 <= 0:
        raise AnalyticDomainError("R0 must be positive")
    if R0 <= 1.0:
        return 0.0
    h = lambda z: 1.0 - math.exp(-R0 * z) - z  # noqa: E731
    return _bisect(h, 1.0 - 1.0 / R0, 1.0)


def z_inf_lambert(R0: float) -> float:
    if R0 <= 1.0:
        return 0.0
    return 1.0 + lambert_w0(-R0 * math.exp(-R0)) / R0


def poisson_extinction(R: float) -> float:
    """Extinction probability of a Galton-Watson process with Poisson(R) offspring."""
    if R <= 1.0:
        return 1.0
    return _smallest_pgf_root(lambda s: math.exp(-R * (1.0 - s)))


def sigma2_w(lambda_W: float, mu_I: float, sigma2_I: float, z_inf: float) -> float:
    """Limiting variance of sqrt(n)(Z/n - z_inf) given a major outbreak."""
    if lambda_W * mu_I <= 1.0:
        raise AnalyticDomainError("sigma2_W is only defined when R0 > 1")
    num = z_inf * (1.0 - z_inf) + lambda_W**2 * sigma2_I * (1.0 - z_inf) ** 2 * z_inf
    den = (1.0 - lambda_W * mu_I * (1.0 - z_inf)) ** 2
    return num / den


def p_rf(lambda_G: float, pi_W: float, z_inf: float, mu_I: float, m: int) -> float:
    """Pairwise infection probability of the Reed-Frost chain of major outbreaks."""
    if m < 1:
        raise AnalyticDomainError("m must be >= 1")
    return -math.expm1(-lambda_G * (1.0 - pi_W) * z_inf * mu_I / m)


@dataclass(frozen=True)
class LimitQuantities:
    lambda_W: float
    lambda_G: float
    mu_I: float
    sigma2_I: float
    R0: float
    pi_W: float
    z_inf: float
    sigma2_W: float | None
    R_star: float
    pi_check_G: float
    tau: float
    x_tau: float
    z_tau: float
    a_tau: float
    Sigma_N: np.ndarray | None
    b: np.ndarray

    @property
    def supercritical_local(self) -> bool:
        return self.R0 > 1.0

    @property
    def supercritical_global(self) -> bool:
        return self.R_star > 1.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["Sigma_N"] = None if self.Sigma_N is None else self.Sigma_N.tolist()
        d["b"] = self.b.tolist()
        return d


def _tau(lambda_G: float, pi_W: float, z: float, mu_I: float, R_star: float) -> float:
    if R_star <= 1.0:
        return 0.0
    a = lambda t: mu_I * z * -math.expm1(-lambda_G * (1.0 - pi_W) * t)  # noqa: E731
    return _bisect(lambda t: a(t) - t, _TAU_EPS, mu_I * z)


def tau_lambert(q: LimitQuantities) -> float:
    # closed form: mu_I z_inf (1 + W0(-R* e^{-R*}) / R*), clipped at 0
    if q.R_star <= 1.0:
        return 0.0
    return max(0.0, q.mu_I * q.z_inf * (1.0 + lambert_w0(-q.R_star * math.exp(-q.R_star)) / q.R_star))


def pi_check_g_lambert(q: LimitQuantities) -> float:
    if q.R_star <= 0.0:
        return 1.0
    w = lambert_w0(-q.R_star * math.exp(-q.R_star))
    return min(1.0, q.pi_W - (1.0 - q.pi_W) * w / q.R_star)


def limit_quantities(period: InfectiousPeriod, lambda_W: float, lambda_G: float) -> LimitQuantities:
    if lambda_W <= 0 or lambda_G <= 0:
        raise AnalyticDomainError("lambda_W and lambda_G must be positive")
    mu, s2 = period.mean, period.variance
    R0 = mu * lambda_W
    piw = pi_w(period, lambda_W)
    z = z_inf(R0)
    s2w = sigma2_w(lambda_W, mu, s2, z) if R0 > 1.0 else None
    R_star = lambda_G * (1.0 - piw) * z * mu
    c = lambda_G * z * mu
    if R_star > 1.0:
        pig = _smallest_pgf_root(lambda s: piw + (1.0 - piw) * math.exp(-c * (1.0 - s)))
    else:
        pig = 1.0
    tau = _tau(lambda_G, piw, z, mu, R_star)
    x = -math.expm1(-lambda_G * (1.0 - piw) * tau)
    b = np.array([1.0, z, mu * z])
    sigma_n = None
    if R_star > 1.0:
        scale = x * (1.0 - x) / (1.0 - z * mu * lambda_G * (1.0 - piw) * (1.0 - x)) ** 2
        sigma_n = scale * np.outer(b, b)
    return LimitQuantities(
        lambda_W=float(lambda_W),
        lambda_G=float(lambda_G),
        mu_I=mu,
        sigma2_I=s2,
        R0=R0,
        pi_W=piw,
        z_inf=z,
        sigma2_W=s2w,
        R_star=R_star,
        pi_check_G=pig,
        tau=tau,
        x_tau=x,
        z_tau=z * x,
        a_tau=mu * z * x,
        Sigma_N=sigma_n,
        b=b,
    )


def xza(q: LimitQuantities, t: float) -> tuple[float, float, float]:
    """The limiting curves x(t), z(t), a(t)."""
    if t < 0:
        raise AnalyticDomainError("t must be >= 0")
    x = -math.expm1(-q.lambda_G * (1.0 - q.pi_W) * t)
    return x, q.z_inf * x, q.mu_I * q.z_inf * x


def borel_pmf(R_star: float, k: int) -> float:
    """Borel(R*) probability of total progeny ``k >= 1``, evaluated in log space."""
    if k < 1:
        raise AnalyticDomainError("borel_pmf needs k >= 1")
    if R_star < 0:
        raise AnalyticDomainError("R_star must be >= 0")
    if R_star == 0.0:
        return 1.0 if k == 1 else 0.0
    logp = (k - 1) * math.log(k * R_star) - k * R_star - math.lgamma(k + 1)
    return math.exp(logp)


def borel_pmf_array(R_star: float, k_max: int) -> np.ndarray:
    """Borel probabilities for k = 1..k_max as an array (index 0 is k=1)."""
    k = np.arange(1, k_max + 1, dtype=float)
    if R_star == 0.0:
        out = np.zeros(k_max)
        out[0] = 1.0
        return out
    return np.exp((k - 1) * np.log(k * R_star) - k * R_star - gammaln(k + 1))


def sigma_n_matrix(q: LimitQuantities) -> np.ndarray:
    """Covariance of the global-epidemic CLT limit (rank one)."""
    if q.R_star <= 1.0 or q.Sigma_N is None:
        raise AnalyticDomainError("Sigma_N is only defined when R_star > 1")
    return q.Sigma_N.copy()


def sigma_n_scale(q: LimitQuantities) -> float:
    x = q.x_tau
    return x * (1.0 - x) / (1.0 - q.z_inf * q.mu_I * q.lambda_G * (1.0 - q.pi_W) * (1.0 - x)) ** 2


def theta_escape(N: int, a: int, k: int) -> float:
    """P(a susceptible escapes | its susceptibility set has size k), with N susceptibles and a initial infectives."""
    if N < 1 or a < 1 or not 0 <= k <= N + a - 1:
        raise AnalyticDomainError(f"theta_escape needs N>=1, a>=1, 0<=k<=N+a-1; got {N}, {a}, {k}")
    if k == 0:
        return 1.0
    if k >= N:
        return 0.0
    out = 1.0
    for j in range(1, k + 1):
        out *= (N - j) / (N + a - j)
    return out
