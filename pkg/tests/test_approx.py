import math

import numpy as np
import pytest
from scipy import integrate

from commsir.analytic import AnalyticDomainError, limit_quantities, p_rf
from commsir.approx import (MixtureOfNormals, final_size_normal, fixed_m_mixture, global_normal,
                            minor_outbreak_pmf, mixture_pdf, normal_pdf, rf_mixture)
from commsir.periods import Exponential
from commsir.reedfrost import rf_pmf

Q = limit_quantities(Exponential(1.0), 2.0, 6.0)


def test_mixture_validation():
    with pytest.raises(ValueError):
        MixtureOfNormals(np.array([0.5, 0.6]), np.zeros(2), np.ones(2))
    with pytest.raises(ValueError):
        MixtureOfNormals(np.array([1.0]), np.zeros(1), np.zeros(1))
    with pytest.raises(AnalyticDomainError):
        fixed_m_mixture(100, 5, limit_quantities(Exponential(1.0), 0.5, 6.0))
    with pytest.raises(ValueError):
        fixed_m_mixture(1, 5, Q)


def test_mixture_single_community():
    mix = fixed_m_mixture(500, 1, Q)
    p = p_rf(6.0, Q.pi_W, Q.z_inf, 1.0, 1)
    assert np.allclose(mix.weights, [1 - p, p])
    assert np.allclose(mix.means, [500 * Q.z_inf, 1000 * Q.z_inf])


def test_mixture_figure_case():
    mix = fixed_m_mixture(500, 20, Q)
    k = np.arange(1, 22)
    assert np.allclose(mix.means, 398.4060650100094 * k)
    assert np.allclose(mix.variances, k * 500 * Q.sigma2_W)
    rf = rf_pmf(20, p_rf(6.0, Q.pi_W, Q.z_inf, 1.0, 20))
    assert mix.mean() == pytest.approx(500 * Q.z_inf * rf.mean(), rel=1e-9)
    w20, mu20, v20 = mix.components[19]
    assert mixture_pdf(mix, mu20) >= w20 / math.sqrt(2 * math.pi * v20)


def test_mixture_reduces_to_normal_as_p_tends_to_one():
    for p in (1 - 1e-12, 1.0):
        mix = rf_mixture(100, rf_pmf(5, p), Q)
        assert mix.weights[-1] == pytest.approx(1.0, abs=1e-9)
        x = np.linspace(400, 560, 9)
        assert np.allclose(mix.pdf(x), normal_pdf(6 * 100 * Q.z_inf, 6 * 100 * Q.sigma2_W, x), rtol=1e-6)


def test_mixture_pdf_examples():
    one = MixtureOfNormals(np.array([1.0]), np.array([0.0]), np.array([1.0]))
    assert mixture_pdf(one, 0.0) == pytest.approx(0.3989422804, abs=1e-10)
    sym = MixtureOfNormals(np.array([0.5, 0.5]), np.array([-1.5, 1.5]), np.array([1.0, 1.0]))
    x = np.linspace(-5, 5, 101)
    assert np.allclose(sym.pdf(x), sym.pdf(-x))


def test_mixture_integrates_to_one():
    mix = fixed_m_mixture(500, 20, Q)
    sd = np.sqrt(mix.variances)
    x = np.linspace((mix.means - 8 * sd).min(), (mix.means + 8 * sd).max(), 200001)
    assert integrate.trapezoid(mix.pdf(x), x) == pytest.approx(1.0, abs=1e-4)
    assert (mix.pdf(x) >= 0).all()
    assert mix.cdf(x[-1]) == pytest.approx(1.0, abs=1e-9)


def test_minor_outbreak_pmf():
    pmf = minor_outbreak_pmf(Q, 5000)
    assert pmf[0] == pytest.approx(0.5, abs=1e-12)
    assert pmf[1] == pytest.approx(0.5 * math.exp(-Q.R_star), abs=1e-12)
    assert pmf[1] == pytest.approx(0.04580, abs=1e-5)
    assert pmf.sum() == pytest.approx(Q.pi_check_G, abs=1e-6)
    cond = minor_outbreak_pmf(Q, 5000, condition_on_extinction=True)
    assert cond.sum() == pytest.approx(1.0, abs=1e-6)
    assert (pmf >= 0).all()
    sub = limit_quantities(Exponential(1.0), 2.0, 0.5)  # R* < 1
    assert minor_outbreak_pmf(sub, 5000).sum() == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        minor_outbreak_pmf(Q, 0)


def test_global_normal():
    mean, cov = global_normal(2000, 2000, Q)
    assert mean[2] == pytest.approx(Q.mu_I * mean[1], rel=1e-15)
    assert mean[1] == pytest.approx(Q.z_inf * mean[0], rel=1e-15)
    assert mean[2] == pytest.approx(Q.tau, abs=1e-8)
    assert abs(np.linalg.det(cov)) < 1e-12 * abs(cov).max() ** 3
    assert np.allclose(cov * 2000, Q.Sigma_N)
    zmean, zvar = final_size_normal(2000, 2000, Q)
    assert zmean == pytest.approx(2.796e6, rel=1e-3)
    assert zvar == pytest.approx(2000**2 * 2000 * Q.Sigma_N[1, 1])
    centred, _ = global_normal(500, 500, Q, centering=(0.85, 0.68, 0.68))
    assert np.allclose(centred, [0.85, 0.68, 0.68])
    with pytest.raises(AnalyticDomainError):
        global_normal(100, 100, limit_quantities(Exponential(1.0), 2.0, 0.5))
