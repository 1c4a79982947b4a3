import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from polarstair.construct import (CodeConfig, build_code, check_mean, dimension_for_rate,
                                  error_prob, ga_evolve, mc_density_evolution, phi,
                                  reliability_profile, select_info_set, PHI_LOW, PHI_SWITCH)
from polarstair.llr import check_combine


def test_zero_levels_pass_through():
    assert ga_evolve(0, 2.0).tolist() == [2.0]


def test_variable_branch_doubles():
    assert ga_evolve(1, 2.0)[1] == 4.0


@given(st.integers(0, 6), st.floats(0.05, 40))
@settings(max_examples=40, deadline=None)
def test_mean_doubling_every_level(n, m):
    parent = ga_evolve(n, m)
    child = ga_evolve(n + 1, m)
    # leaf index: top bit is the first operation, so the last level pairs 2i / 2i+1
    np.testing.assert_array_equal(child[1::2], 2 * parent)
    np.testing.assert_array_equal(child[0::2], [check_mean(x) for x in parent])


def test_phi_continuous_at_switch():
    lo = phi(PHI_SWITCH * (1 - 1e-12))
    hi = phi(PHI_SWITCH * (1 + 1e-12))
    assert abs(lo - hi) < 1e-9


def test_phi_continuous_and_invertible_at_low_piece():
    lo = phi(PHI_LOW * (1 - 1e-12))
    hi = phi(PHI_LOW * (1 + 1e-12))
    assert abs(lo - hi) < 1e-9
    x = np.geomspace(1e-12, 30, 4001)
    assert np.all(np.diff(phi(x)) < 0)


def test_check_mean_small_means_quadratic():
    # for tiny m the check output behaves like c * m^2 with c near 1/2
    m = np.array([1e-12, 1e-8, 1e-4])
    ratio = check_mean(m) / m ** 2
    assert np.all((ratio > 0.4) & (ratio < 0.5))
    assert np.ptp(ratio) < 1e-3


@given(st.integers(1, 10), st.floats(1e-3, 50), st.data())
@settings(max_examples=60, deadline=None)
def test_ga_respects_domination_order(n, m, data):
    # a subchannel whose index covers another's bits is never less reliable,
    # so every GA information set is closed under domination
    N = 1 << n
    mean = ga_evolve(n, m)
    i, j = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    dominated = (i & ~j) == 0
    assert not np.any(dominated & (mean[None, :] < mean[:, None]))
    K = data.draw(st.integers(1, N))
    A = select_info_set(reliability_profile(n, m), K, m).A
    in_A = np.zeros(N, bool)
    in_A[A] = True
    assert not np.any(dominated[A] & ~in_A[None, :])


def test_check_mean_matches_tanh_expectation():
    # GA matches E[tanh(L/2)] of the check output, which is what phi encodes
    rng = np.random.default_rng(3)
    for m in (1.0, 2.0, 5.0):
        a = rng.normal(m, math.sqrt(2 * m), 10**6)
        b = rng.normal(m, math.sqrt(2 * m), 10**6)
        emp = 1 - np.tanh(check_combine(a, b) / 2).mean()
        assert emp == pytest.approx(phi(check_mean(m)), rel=0.05)


@pytest.mark.xfail(strict=True, reason="a Gaussian check output cannot match the true mean "
                   "within 2% at m=2; measured gap is about 4.3%")
def test_check_branch_mean_within_two_percent_of_monte_carlo():
    rng = np.random.default_rng(1)
    a = rng.normal(2.0, 2.0, 10**6)
    b = rng.normal(2.0, 2.0, 10**6)
    mc = check_combine(a, b).mean()
    assert ga_evolve(1, 2.0)[0] == pytest.approx(mc, rel=0.02)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_ga_rejects_bad_mean(bad):
    with pytest.raises(ValueError):
        ga_evolve(3, bad)


def test_ga_rejects_too_many_levels():
    with pytest.raises(ValueError):
        ga_evolve(21, 2.0)
    with pytest.raises(ValueError):
        ga_evolve(-1, 2.0)


def test_error_prob_examples():
    assert error_prob(0.0) == 0.5
    assert error_prob(1e4) < 1e-12
    quad, _ = integrate.quad(lambda x: stats.norm.pdf(x, 2.0, 2.0), -np.inf, 0)
    assert error_prob(2.0) == pytest.approx(quad, rel=1e-12)
    assert error_prob(2.0) == pytest.approx(stats.norm.sf(1.0), rel=1e-12)


@pytest.mark.parametrize("bad", [-1e-3, math.inf, math.nan])
def test_error_prob_rejects(bad):
    with pytest.raises(ValueError):
        error_prob(bad)


@given(st.integers(1, 8), st.floats(0.1, 20))
@settings(max_examples=30, deadline=None)
def test_profile_invariants(n, m):
    prof = reliability_profile(n, m)
    assert np.all((prof.p_err >= 0) & (prof.p_err <= 0.5))
    order = np.argsort(prof.means)
    assert np.all(np.diff(prof.p_err[order]) <= 0)


def test_small_information_sets():
    assert select_info_set(reliability_profile(1, 2.0), 1).A.tolist() == [1]
    for m in (0.5, 2.0, 8.0):
        assert select_info_set(reliability_profile(2, m), 2).A.tolist() == [3, 2]


def test_full_size_code():
    K = dimension_for_rate(1024, 5 / 6)
    assert K == 853
    cfg = build_code(1024, K, 4.0)
    assert len(cfg.A) == 853 and len(cfg.A_c) == 171
    assert str(cfg.rate) == "853/1024"


@given(st.integers(1, 8), st.floats(0.2, 20), st.data())
@settings(max_examples=40, deadline=None)
def test_partition_and_ordering(n, m, data):
    N = 1 << n
    K = data.draw(st.integers(1, N))
    prof = reliability_profile(n, m)
    cfg = select_info_set(prof, K, m)
    assert sorted(np.concatenate([cfg.A, cfg.A_c]).tolist()) == list(range(N))
    rel = prof.means
    for S in (cfg.A, cfg.A_c):
        r = rel[S]
        assert np.all(np.diff(r) <= 0)
        ties = np.diff(r) == 0
        assert np.all(np.diff(S)[ties] > 0)
    if K < N:
        assert rel[cfg.A].min() >= rel[cfg.A_c].max()
    again = select_info_set(prof, K, m)
    assert np.array_equal(again.A, cfg.A) and np.array_equal(again.A_c, cfg.A_c)


def test_select_rejects_bad_k():
    prof = reliability_profile(3, 2.0)
    for K in (0, 9):
        with pytest.raises(ValueError):
            select_info_set(prof, K)


def test_json_round_trip():
    cfg = build_code(64, 53, 3.0)
    back = CodeConfig.from_json(cfg.to_json())
    assert back.N == 64 and back.K == 53
    assert np.array_equal(back.A, cfg.A) and np.array_equal(back.A_c, cfg.A_c)
    assert back.design_llr_mean == cfg.design_llr_mean


def test_mc_oracle_trivial_and_variable_branch():
    assert mc_density_evolution(0, 60.0, samples=10**5, seed=0)[0] == 0.0
    p = mc_density_evolution(1, 2.0, samples=10**5, seed=1)
    ref = error_prob(4.0)
    se = math.sqrt(ref * (1 - ref) / 10**5)
    assert abs(p[1] - ref) < 3 * se


def test_mc_oracle_fixture_n2():
    p = mc_density_evolution(2, 2.0, samples=10**5, seed=0)
    np.testing.assert_array_equal(p, [0.39204, 0.18187, 0.14658, 0.02278])


def test_mc_oracle_deterministic_and_validated():
    a = mc_density_evolution(3, 1.5, samples=10**4, seed=7)
    b = mc_density_evolution(3, 1.5, samples=10**4, seed=7)
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        mc_density_evolution(3, 1.5, samples=100)
    with pytest.raises(ValueError):
        mc_density_evolution(3, -1.0, samples=10**4)


def test_mc_confirms_n2_order():
    p = mc_density_evolution(2, 2.0, samples=10**5, seed=5)
    assert np.argsort(p)[:2].tolist() == [3, 2]
