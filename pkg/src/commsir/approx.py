"""Approximating laws for final outcomes, on the absolute scale (individuals).

* Fixed number of communities, major outbreak in community 0: the total
  final size is approximately a mixture over the Reed-Frost size K of
  Normal(K n z_inf, K n sigma2_W).
* No global epidemic, many communities: the number of communities with a
  major outbreak is 0 with probability pi_W and otherwise Borel(R*).
* Global epidemic: (Z_C / m, Z_T / (n m), A_T / (n m)) is approximately
  Normal((x(tau), z(tau), a(tau)), Sigma_N / m), so Z_T is approximately
  Normal(n m z(tau), n^2 m Sigma_N[1, 1]).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .analytic import AnalyticDomainError, LimitQuantities, borel_pmf_array, p_rf
from .reedfrost import RFPmf, rf_pmf


@dataclass(frozen=True)
class MixtureOfNormals:
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if (w < 0).any() or abs(w.sum() - 1.0) > 1e-10:
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        if (np.asarray(self.variances) <= 0).any():
            raise ValueError("mixture variances must be positive")

    @property
    def components(self) -> list[tuple[float, float, float]]:
        return [(float(w), float(mu), float(v)) for w, mu, v in zip(self.weights, self.means, self.variances)]

    def mean(self) -> float:
        return float(np.dot(self.weights, self.means))

    def pdf(self, x):
        return mixture_pdf(self, x)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)[..., None]
        return (self.weights * norm.cdf(x, self.means, np.sqrt(self.variances))).sum(axis=-1)


def fixed_m_mixture(n: int, m: int, q: LimitQuantities) -> MixtureOfNormals:
    """Law of Z_T given a major outbreak in community 0, for fixed ``m``."""
    if q.R0 <= 1.0:
        raise AnalyticDomainError("fixed_m_mixture needs R0 > 1")
    if n < 2 or m < 1:
        raise ValueError("need n >= 2 and m >= 1")
    return rf_mixture(n, rf_pmf(m, p_rf(q.lambda_G, q.pi_W, q.z_inf, q.mu_I, m)), q)


def rf_mixture(n: int, rf: RFPmf, q: LimitQuantities) -> MixtureOfNormals:
    """Mixture over an explicit Reed-Frost law: component k is Normal(k n z_inf, k n sigma2_W)."""
    k = rf.support.astype(float)
    return MixtureOfNormals(rf.probs / rf.probs.sum(), k * n * q.z_inf, k * n * q.sigma2_W)


def minor_outbreak_pmf(q: LimitQuantities, k_max: int, condition_on_extinction: bool = False) -> np.ndarray:
    """P(number of major-outbreak communities = k), k = 0..k_max, without a global epidemic.

    Unnormalised, the entries carry total mass pi_check_G when R* > 1 (up to
    truncation). ``condition_on_extinction`` divides by that mass.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    out = np.empty(k_max + 1)
    out[0] = q.pi_W
    out[1:] = (1.0 - q.pi_W) * borel_pmf_array(q.R_star, k_max)
    if condition_on_extinction:
        out /= q.pi_check_G
    return out


def global_normal(n: int, m: int, q: LimitQuantities, centering=None) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of (Z_C/m, Z_T/(n m), A_T/(n m)) given a global epidemic.

    ``centering`` optionally replaces the limiting mean with finite-n values
    ``(x_n, z_n, a_n)``, e.g. from :func:`commsir.embed.estimate_curves`.
    """
    if q.R_star <= 1.0 or q.Sigma_N is None:
        raise AnalyticDomainError("global_normal needs R_star > 1")
    mean = np.array([q.x_tau, q.z_tau, q.a_tau]) if centering is None else np.asarray(centering, float)
    return mean, q.Sigma_N / m


def final_size_normal(n: int, m: int, q: LimitQuantities, centering=None) -> tuple[float, float]:
    """(mean, variance) of the normal approximation to Z_T given a global epidemic."""
    mean, cov = global_normal(n, m, q, centering)
    return n * m * float(mean[1]), (n * m) ** 2 * float(cov[1, 1])


def mixture_pdf(mix: MixtureOfNormals, x):
    x = np.asarray(x, dtype=float)
    dens = (mix.weights * norm.pdf(x[..., None], mix.means, np.sqrt(mix.variances))).sum(axis=-1)
    return dens if dens.ndim else float(dens)


def normal_pdf(mean: float, variance: float, x):
    return norm.pdf(np.asarray(x, dtype=float), mean, np.sqrt(variance))
