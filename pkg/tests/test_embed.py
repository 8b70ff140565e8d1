import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commsir._accel import NUMBA_ENABLED
from commsir.analytic import limit_quantities
from commsir.embed import (CommunityPath, HorizonError, community_path, community_paths, estimate_curves,
                           first_crossing, run_coupled, run_modified, solve_severity)
from commsir.periods import Exponential
from commsir.sim import KERNELS, ModelParams, run_external
from commsir.stats import ks_2samp_critical, ks_2samp_statistic

FIG = ModelParams.from_lambdas(200, 20, 2.0, 6.0, Exponential(1.0))


@pytest.fixture(params=KERNELS if NUMBA_ENABLED else ("chain",))
def kernel(request):
    return request.param


def test_path_evaluation():
    p = CommunityPath(np.array([0.3, 0.7]), np.array([5, 9]), np.array([4.0, 8.5]), 10, 2.0)
    assert p.evaluate(0.0) == (0, 0.0)
    assert p.evaluate(0.29) == (0, 0.0)
    assert p.evaluate(0.3) == (5, 4.0)  # right-continuous
    assert p.evaluate(0.69) == (5, 4.0)
    assert p.evaluate(5.0) == (9, 8.5)
    assert p.final_size == 9
    with pytest.raises(ValueError):
        CommunityPath(np.array([0.5, 0.3]), np.array([1, 2]), np.array([1.0, 2.0]), 10, 1.0)
    with pytest.raises(ValueError):
        CommunityPath(np.array([0.1]), np.array([11]), np.array([1.0]), 10, 1.0)


def test_path_zero_time(kernel):
    path = community_path(50, FIG, 1.0, np.random.default_rng(0), kernel)
    assert path.evaluate(0.0) == (0, 0.0)


def test_path_saturation(kernel):
    # rate * t_max = 1000 triggers on a community of 50
    p = ModelParams(50, 20, 2.0 / 50, 1000.0 / (50**2 * 20) / 1.0)
    path = community_path(50, p, 1.0, np.random.default_rng(1), kernel)
    assert path.final_size == 50


@pytest.mark.parametrize("seed", range(3))
def test_path_invariants(kernel, seed):
    for path in community_paths(30, 40, FIG, 3.0, np.random.default_rng(seed), kernel):
        assert (np.diff(path.jump_times) > 0).all()
        assert (np.diff(path.cum_sizes) > 0).all()  # only effective jumps are recorded
        assert (np.diff(path.cum_severities) > 0).all()
        assert path.final_size <= 40
        assert (path.jump_times <= 3.0).all()


def test_path_matches_external_small(kernel):
    n, t, reps = 60, 0.5, 3000
    rng = np.random.default_rng(2)
    a = [community_path(n, FIG, t, rng, kernel).evaluate(t)[0] for _ in range(reps)]
    b = [run_external(n, t, FIG.beta_W, FIG.beta_G * FIG.n * FIG.m, FIG.period, rng, kernel)[0]
         for _ in range(reps)]
    assert ks_2samp_statistic(a, b) < ks_2samp_critical(reps, reps, 0.01)


def test_solve_severity_hand_example():
    path = CommunityPath(np.array([0.3]), np.array([10]), np.array([9.0]), 10, 10.0)
    fp = solve_severity(0.5, [path], 10)
    assert fp.T_inf == pytest.approx(1.4)
    assert (fp.Z_total, fp.A_total, fp.X_count) == (10, 9.0, 1)


def test_solve_severity_no_pressure():
    path = CommunityPath(np.array([0.3]), np.array([10]), np.array([9.0]), 10, 10.0)
    fp = solve_severity(0.0, [path], 10)
    assert (fp.T_inf, fp.Z_total, fp.A_total, fp.X_count) == (0.0, 0, 0.0, 0)


def test_solve_severity_horizon():
    path = CommunityPath(np.array([0.3]), np.array([10]), np.array([9.0]), 10, 1.0)
    with pytest.raises(HorizonError):
        solve_severity(0.5, [path], 10)
    with pytest.raises(ValueError):
        solve_severity(-0.1, [path], 10)


path_st = st.lists(st.tuples(st.floats(0.0, 5.0), st.integers(1, 5), st.floats(0.01, 6.0)), max_size=8)


def _make_path(jumps, n=40):
    jumps = sorted(jumps)
    t = np.array([j[0] for j in jumps])
    keep = np.r_[True, np.diff(t) > 0] if t.size else np.zeros(0, bool)
    t = t[keep]
    z = np.cumsum([j[1] for j in jumps])[keep] if t.size else np.zeros(0, int)
    a = np.cumsum([j[2] for j in jumps])[keep] if t.size else np.zeros(0)
    return CommunityPath(t, np.minimum(z, n), a, n, 1e6)


@given(st.lists(path_st, min_size=1, max_size=5), st.floats(0.0, 3.0), st.floats(0.0, 3.0))
@settings(max_examples=300, deadline=None)
def test_fixed_point_properties(paths, t0, t1):
    paths = [_make_path(p) for p in paths]
    n, m = 40, len(paths)
    fp = solve_severity(t0, paths, n)
    total_jumps = sum(p.jump_times.size for p in paths)
    assert fp.iterations <= total_jumps + 2
    A = sum(p.evaluate(fp.T_inf)[1] for p in paths)
    assert abs(fp.T_inf - (t0 + A / (n * m))) < 1e-9
    assert fp.Z_total == sum(p.evaluate(fp.T_inf)[0] for p in paths)
    # monotone in the initial pressure
    lo, hi = sorted((t0, t1))
    assert solve_severity(lo, paths, n).T_inf <= solve_severity(hi, paths, n).T_inf


def test_run_modified(kernel):
    p = ModelParams.from_lambdas(50, 10, 2.0, 6.0)
    o = run_modified(0.0, p, np.random.default_rng(3), kernel=kernel)
    assert o.Z_T == 0 and o.community_sizes.shape == (10,)
    o = run_modified(200.0, p, np.random.default_rng(4), kernel=kernel)
    assert o.Z_T > 0 and not o.community0_major
    with pytest.raises(ValueError):
        run_modified(-1.0, p, np.random.default_rng(0))


def test_run_coupled_isolated(kernel):
    p = ModelParams(40, 5, 2.0 / 40, 0.0)
    o = run_coupled(p, np.random.default_rng(5), kernel=kernel)
    assert o.Zhat_C == 1 and o.community_sizes.shape == (6,)


def test_run_coupled_matches_direct_engine():
    # moderate size; the two engines differ only by the feedback into community 0
    from commsir.sim import run_multi

    p = ModelParams.from_lambdas(100, 20, 2.0, 6.0)
    reps = 3000
    a = [run_coupled(p, np.random.default_rng([8, i])) for i in range(reps)]
    b = [run_multi(p, np.random.default_rng([9, i])) for i in range(reps)]
    za = [o.Z_C for o in a if o.community0_major]
    zb = [o.Z_C for o in b if o.community0_major]
    assert ks_2samp_statistic(za, zb) < ks_2samp_critical(len(za), len(zb), 0.01)


def test_coupled_large_branch_concentrates():
    # the m = n = 500 version of this check runs in the acceptance suite
    p = ModelParams.from_lambdas(200, 200, 2.0, 6.0)
    q = limit_quantities(Exponential(1.0), 2.0, 6.0)
    zt = np.array([run_coupled(p, np.random.default_rng([10, i])).Z_T / (200 * 200) for i in range(300)])
    big = zt[zt > 0.3]
    assert big.size > 100
    assert abs(big.mean() - q.z_tau) < 0.02


def test_first_crossing():
    t = np.linspace(0, 2, 21)
    assert first_crossing(t, np.zeros_like(t)) == 0.0
    assert math.isnan(first_crossing(t, t + 1.0))
    a = np.minimum(2 * t, 1.0)
    assert first_crossing(t, a) == pytest.approx(1.0)
    assert first_crossing(t, 0.9 * np.ones_like(t)) == pytest.approx(0.9)


def test_estimate_curves(kernel):
    est = estimate_curves(FIG, [0.0, 0.2, 0.6, 1.2], 600, np.random.default_rng(6), kernel)
    assert (est.x[0], est.z[0], est.a[0], est.se_z[0]) == (0.0, 0.0, 0.0, 0.0)
    assert (np.diff(est.z) > 0).all()
    # Wald identity: a(t) = mu_I z(t)
    for z, a, sz, sa in zip(est.z[1:], est.a[1:], est.se_z[1:], est.se_a[1:]):
        assert abs(a / z - 1.0) < 3 * math.hypot(sz, sa) / z
    assert 0.3 < est.tau_hat < 1.2
    assert len(list(est.rows())) == 4
    with pytest.raises(ValueError):
        estimate_curves(FIG, [0.1], 0, np.random.default_rng(0))


@pytest.mark.slow
def test_curves_tau_at_large_n():
    q = limit_quantities(Exponential(1.0), 2.0, 6.0)
    p = ModelParams.from_lambdas(2000, 2000, 2.0, 6.0)
    grid = np.linspace(0.55, 0.85, 13)
    est = estimate_curves(p, grid, 1500, np.random.default_rng(7))
    z_at_tau = np.interp(est.tau_hat, grid, est.z)
    assert abs(z_at_tau - q.z_tau) < 0.01
