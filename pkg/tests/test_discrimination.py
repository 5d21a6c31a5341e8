import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from usdiscord import (
    alpha_bar,
    build_d_state,
    build_two_state,
    equal_overlap_optimal,
    optimal_probability,
    run_monte_carlo,
    success_probability_d,
    success_probability_parameterized,
    success_probability_two,
)
from usdiscord.discrimination import RNG_ALGORITHM, equal_overlap_region
from usdiscord.ensembles import Ensemble
from usdiscord.errors import BadPriors, Infeasible

from oracles import binomial_sigma, grid_optimum


def test_two_state_probability():
    assert success_probability_two(0.5, 0.5, 0.25, 0.5) == pytest.approx(0.75, abs=1e-15)
    assert equal_overlap_optimal(2, 0.5) == pytest.approx(0.75, abs=1e-15)


def test_two_state_probability_orthogonal_limit():
    assert success_probability_two(0.5, 0.5, 1e-12, 1e-5) == pytest.approx(1.0, abs=1e-9)


def test_two_state_probability_errors():
    with pytest.raises(BadPriors):
        success_probability_two(1.0, 0.0, 0.25, 0.5)
    with pytest.raises(Infeasible):
        success_probability_two(0.5, 0.5, 0.5, 0.4)
    with pytest.raises(Infeasible):
        success_probability_two(0.5, 0.5, 0.5, 1.2)


def test_d_probability():
    assert success_probability_d([0.2, 0.3, 0.5], [0.4] * 3) == pytest.approx(1 - 0.16, abs=1e-15)
    # 1 - (0.5*0.04 + 0.25*0.16 + 0.25*0.36)
    assert success_probability_d([0.5, 0.25, 0.25], [0.2, 0.4, 0.6]) == pytest.approx(0.85, abs=1e-15)


def test_parameterized_matches_equal_case():
    d, g = 4, 0.6
    priors, overlaps = [1 / d] * d, [g**2] * (d - 1)
    region, a1 = equal_overlap_region(d, g)
    assert region == "interior"
    assert success_probability_parameterized(a1, priors, overlaps) == pytest.approx(equal_overlap_optimal(d, g), abs=1e-14)


def test_parameterized_matches_direct_formula():
    priors, overlaps = [0.4, 0.35, 0.25], [0.3 * np.exp(0.4j), 0.2]
    x = 0.7
    alphas = [x, 0.3 / x, 0.2 / x]
    assert success_probability_parameterized(x, priors, overlaps) == pytest.approx(
        success_probability_d(priors, alphas), abs=1e-15
    )


def test_parameterized_feasibility():
    with pytest.raises(Infeasible):
        success_probability_parameterized(0.2, [0.5, 0.5], [0.3])
    with pytest.raises(Infeasible):
        success_probability_parameterized(0.3, [0.5, 0.5], [0.3])
    with pytest.raises(Infeasible):
        success_probability_parameterized(1.1, [0.5, 0.5], [0.3])
    assert success_probability_parameterized(0.3, [0.5, 0.5], [0.3], closed=True) == pytest.approx(0.455)


def test_alpha_bar_examples():
    d, g = 5, 0.4
    assert alpha_bar([1 / d] * d, [g**2] * (d - 1)) == pytest.approx((d - 1) ** 0.25 * g, abs=1e-15)
    assert alpha_bar([0.5, 0.5], [0.36]) == pytest.approx(0.6, abs=1e-15)
    assert alpha_bar([0.5, 0.25, 0.25], [0, 0]) == 0.0


def test_alpha_bar_is_stationary_point():
    priors, overlaps = [0.3, 0.3, 0.4], [0.2, 0.25]
    x = alpha_bar(priors, overlaps)
    h = 1e-5
    left = success_probability_parameterized(x - h, priors, overlaps)
    right = success_probability_parameterized(x + h, priors, overlaps)
    assert (right - left) / (2 * h) == pytest.approx(0.0, abs=1e-8)


@pytest.mark.parametrize(
    "priors, overlaps, region",
    [
        ([1 / 3] * 3, [0.25, 0.25], "interior"),
        ([0.9, 0.05, 0.05], [0.6, 0.1], "clamped_low"),
        ([0.05, 0.5, 0.45], [0.5, 0.6], "clamped_high"),
    ],
)
def test_optimal_regions(priors, overlaps, region):
    rep = optimal_probability(priors, overlaps)
    assert rep.region == region
    x, p = grid_optimum(priors, overlaps)
    assert rep.p_opt == pytest.approx(p, abs=1e-6)
    assert rep.argmax == pytest.approx(x, abs=1e-3)


def test_optimal_equal_case_branches():
    for d in range(2, 8):
        b = (d - 1) ** -0.25
        for g in (0.5 * b, b, 0.5 * (b + 1)):
            rep = optimal_probability([1 / d] * d, [g**2] * (d - 1))
            assert rep.p_opt == pytest.approx(equal_overlap_optimal(d, g), abs=1e-12)
        assert optimal_probability([1 / d] * d, [b**2] * (d - 1)).region == "interior"
        assert equal_overlap_optimal(d, b) == pytest.approx(1 - 2 / d, abs=1e-12)


def test_equal_overlap_endpoints():
    for d in range(2, 11):
        assert equal_overlap_optimal(d, 0.0) == 1.0
        assert equal_overlap_optimal(d, 1.0) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 6))
def test_optimum_dominates_feasible_grid(seed, d):
    rng = np.random.default_rng(seed)
    priors = rng.dirichlet(np.ones(d))
    overlaps = rng.uniform(0.0, 0.95, d - 1) * np.exp(1j * rng.uniform(0, 6, d - 1))
    rep = optimal_probability(priors, overlaps)
    assert 0.0 <= rep.p_opt <= 1.0
    lo = np.abs(overlaps).max()
    for x in np.linspace(lo, 1, 501)[1:]:
        assert success_probability_parameterized(x, priors, overlaps) <= rep.p_opt + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 6))
def test_probability_increases_below_alpha_bar(seed, d):
    rng = np.random.default_rng(seed)
    priors = rng.dirichlet(np.ones(d))
    overlaps = rng.uniform(0.0, 0.95, d - 1)
    lo, abar = overlaps.max(), alpha_bar(priors, overlaps)
    hi = min(abar, 1.0)
    if hi > lo:
        xs = np.linspace(lo, hi, 200)[1:]
        vals = [success_probability_parameterized(x, priors, overlaps) for x in xs]
        assert np.all(np.diff(vals) >= -1e-12)


def test_monte_carlo_two_state():
    state = build_two_state(0.5, 0.5, 0.25, 0.5)
    stats = run_monte_carlo(state, 1_000_000, seed=1)
    assert stats.misidentifications_given_success == 0
    assert abs(stats.frequency - 0.75) <= 3 * binomial_sigma(0.75, 1_000_000)
    assert stats.rng == RNG_ALGORITHM


def test_monte_carlo_symmetric_d_state():
    stats = run_monte_carlo(build_d_state([1 / 3] * 3, [0.5] * 3), 1_000_000, seed=2)
    assert stats.misidentifications_given_success == 0
    assert abs(stats.frequency - 0.75) <= 3 * binomial_sigma(0.75, 1_000_000)


def test_monte_carlo_deterministic():
    ens = Ensemble(np.array([0.2, 0.3, 0.5]), np.array([0.3, 0.5j, 0.7]))
    a = run_monte_carlo(ens, 50_000, seed=9, workers=3)
    b = run_monte_carlo(ens, 50_000, seed=9, workers=3)
    assert a == b
    assert a.trials == 50_000
    c = run_monte_carlo(ens, 50_000, seed=10, workers=3)
    assert c.successes != a.successes


def test_monte_carlo_rejects_zero_trials():
    with pytest.raises(ValueError):
        run_monte_carlo(build_d_state([0.5, 0.5], [0.5, 0.5]), 0, seed=0)


def test_monte_carlo_statistical_gate():
    rng = np.random.default_rng(77)
    runs, within = 200, 0
    for seed in range(runs):
        d = int(rng.integers(2, 5))
        p = rng.dirichlet(np.ones(d))
        a = rng.uniform(0.05, 0.95, d) * np.exp(1j * rng.uniform(0, 6, d))
        analytic = success_probability_d(p, a)
        stats = run_monte_carlo(Ensemble(p, a), 20_000, seed=seed)
        assert stats.misidentifications_given_success == 0
        within += abs(stats.frequency - analytic) <= 4 * binomial_sigma(analytic, 20_000)
    assert within / runs >= 0.99
