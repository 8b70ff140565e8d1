import math

import numpy as np
import pytest

from commsir.analytic import limit_quantities, p_rf
from commsir.periods import Exponential
from commsir.reedfrost import ReedFrostError, rf_brute_pmf, rf_pmf, rf_sample
from commsir.stats import discrete_tv

from _graphs import er_cluster_pmf


def test_small_examples():
    assert np.allclose(rf_pmf(1, 0.5).probs, [0.5, 0.5])
    assert np.allclose(rf_pmf(2, 0.5).probs, [0.25, 0.25, 0.5], atol=1e-15)
    assert np.allclose(rf_brute_pmf(1, 0.3).probs, [0.7, 0.3])
    assert np.allclose(rf_brute_pmf(2, 0.5).probs, rf_pmf(2, 0.5).probs, atol=1e-12)
    brute = rf_brute_pmf(3, 1.0).probs
    assert brute[-1] == pytest.approx(1.0) and brute[:-1].sum() == pytest.approx(0.0)


@pytest.mark.parametrize("m", [1, 5, 30, 200])
def test_p_zero_point_mass(m):
    pmf = rf_pmf(m, 0.0)
    assert pmf[1] == 1.0 and pmf.probs.sum() == 1.0


@pytest.mark.parametrize("m", range(1, 9))
@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_matches_brute_force(m, p):
    assert np.abs(rf_pmf(m, p).probs - rf_brute_pmf(m, p).probs).max() < 1e-10


@pytest.mark.parametrize("m", range(1, 7))
@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_matches_random_graph_cluster(m, p):
    assert np.abs(rf_pmf(m, p).probs - er_cluster_pmf(m + 1, p)).max() < 1e-10


@pytest.mark.parametrize("m,p", [(m, p) for m in (10, 24, 25, 60, 150) for p in (0.01, 0.1, 0.5)]
                         + [(500, 0.01), (500, 0.5)])
def test_normalised_large_m(m, p):
    pmf = rf_pmf(m, p)
    assert (pmf.probs >= 0).all()
    assert abs(pmf.probs.sum() - 1) < 1e-10


def test_exact_and_high_precision_paths_agree():
    # m = 24 is solved in rationals and m = 25 in extended precision; both must be smooth in m
    a, b = rf_pmf(24, 0.1), rf_pmf(25, 0.1)
    assert abs(a.mean() - b.mean()) < 1.5


def test_stochastic_monotonicity():
    for m in (3, 10, 40):
        cdfs = [np.cumsum(rf_pmf(m, p).probs) for p in np.linspace(0.0, 0.95, 20)]
        for lo, hi in zip(cdfs, cdfs[1:]):
            assert (hi <= lo + 1e-12).all()


def test_rfpmf_accessors():
    pmf = rf_pmf(3, 0.4)
    assert pmf[0] == 0.0 and pmf[5] == 0.0
    assert list(pmf.support) == [1, 2, 3, 4]
    assert pmf.cdf(4.0) == pytest.approx(1.0)
    assert pmf.cdf(0.5) == 0.0
    assert pmf.mean() == pytest.approx(sum(k * pmf[k] for k in range(1, 5)))


@pytest.mark.parametrize("args", [(0, 0.5), (501, 0.5), (3, -0.1), (3, 1.5), (2.5, 0.1)])
def test_invalid(args):
    with pytest.raises(ReedFrostError):
        rf_pmf(*args)


def test_brute_force_guard():
    with pytest.raises(ReedFrostError):
        rf_brute_pmf(11, 0.5)


def test_sample_subcritical_returns_one():
    rng = np.random.default_rng(0)
    assert rf_sample(10, 6.0, 1.0, 0.8, 1.0, rng) == 1
    assert (rf_sample(10, 6.0, 1.0, 0.8, 1.0, rng, size=50) == 1).all()


def test_sample_m1_bernoulli():
    q = limit_quantities(Exponential(1.0), 2.0, 6.0)
    p = p_rf(6.0, q.pi_W, q.z_inf, q.mu_I, 1)
    n = 10**5
    x = rf_sample(1, 6.0, q.pi_W, q.z_inf, q.mu_I, np.random.default_rng(1), size=n)
    assert set(np.unique(x)) <= {1, 2}
    assert abs((x == 2).mean() - p) < 3 * math.sqrt(p * (1 - p) / n)


@pytest.mark.parametrize("m", [3, 20, 100])
def test_sample_matches_pmf(m):
    q = limit_quantities(Exponential(1.0), 2.0, 6.0)
    x = rf_sample(m, 6.0, q.pi_W, q.z_inf, q.mu_I, np.random.default_rng(m), size=50000)
    pmf = rf_pmf(m, p_rf(6.0, q.pi_W, q.z_inf, q.mu_I, m))
    assert discrete_tv(x, pmf.probs, offset=1) < 0.02
