import itertools
import math

import numpy as np
import pytest

from geocache import (
    CoverageDistribution,
    ParameterError,
    PopularityDistribution,
    StructuredPolicy,
    greedy_bound_check,
    greedy_disjoint,
    greedy_general,
    hit_probability_general,
    hit_probability_structured,
    independent_caching,
    most_popular,
    solve_dp,
    zipf,
)
from geocache.policy import GeneralPolicy

from conftest import random_coverage, random_instance, random_popularity

POP4 = PopularityDistribution(np.array([0.4, 0.3, 0.2, 0.1]))
DIST_1COV = CoverageDistribution(pmf=np.array([0.0, 1.0]))
DIST_P2 = CoverageDistribution(pmf=np.array([0.0, 0.0, 1.0]))
DIST_HALF = CoverageDistribution(pmf=np.array([0.0, 0.5, 0.5]))


# ---------------------------------------------------------------------------
# DP optimum
# ---------------------------------------------------------------------------


def test_dp_single_coverage_reduces_to_most_popular():
    pop = random_popularity(np.random.default_rng(1), 6)
    result = solve_dp(pop, DIST_1COV, 3)
    assert result.policy.sizes == (1, 1, 1)
    expected = math.fsum(pop.probs[:3].tolist())
    assert result.hit_prob == pytest.approx(expected, abs=1e-15)


def test_dp_prefers_singletons_under_half_double_coverage():
    result = solve_dp(POP4, DIST_HALF, 2)
    assert result.policy.sizes == (1, 1)
    assert result.hit_prob == pytest.approx(0.7, abs=1e-15)


def test_dp_codes_two_items_under_sure_double_coverage():
    result = solve_dp(POP4, DIST_P2, 1)
    assert result.policy.sizes == (2,)
    assert result.hit_prob == pytest.approx(0.7, abs=1e-15)


def test_dp_value_equals_its_table(rng):
    for _ in range(50):
        pop, dist, L = random_instance(rng)
        result = solve_dp(pop, dist, L)
        assert result.hit_prob == pytest.approx(result.diagnostics["dp_value"], abs=1e-12)


def test_dp_handles_more_blocks_than_items():
    pop = PopularityDistribution(np.array([0.6, 0.4]))
    result = solve_dp(pop, DIST_HALF, 5)
    assert result.policy.total_items <= 2
    assert result.hit_prob == pytest.approx(1.0, abs=1e-15)


# ---------------------------------------------------------------------------
# greedy with general blocks
# ---------------------------------------------------------------------------


def test_ggb_single_coverage_picks_singletons():
    pop = random_popularity(np.random.default_rng(2), 8)
    result = greedy_general(pop, DIST_1COV, 4)
    assert [sorted(b) for b in result.policy.blocks] == [[1], [2], [3], [4]]


def test_ggb_first_block_matches_single_block_dp(rng):
    for _ in range(100):
        pop, dist, _ = random_instance(rng)
        greedy = greedy_general(pop, dist, 1)
        optimum = solve_dp(pop, dist, 1)
        assert greedy.hit_prob == pytest.approx(optimum.hit_prob, abs=1e-12)


def _exhaustive_best_gain(pop, dist, prior_blocks):
    """Best marginal hit-probability increment over every nonempty subset."""
    J = pop.size
    base = (
        hit_probability_general(GeneralPolicy(tuple(prior_blocks)), pop, dist)
        if prior_blocks
        else 0.0
    )
    best = -1.0
    for size in range(1, J + 1):
        for combo in itertools.combinations(range(1, J + 1), size):
            candidate = list(prior_blocks) + [frozenset(combo)]
            value = hit_probability_general(GeneralPolicy(tuple(candidate)), pop, dist)
            best = max(best, value - base)
    return best


def test_ggb_steps_match_exhaustive_subset_search(rng):
    # validates the top-c candidate reduction on tiny instances
    for _ in range(20):
        J = int(rng.integers(2, 7))
        pop = random_popularity(rng, J)
        dist = random_coverage(rng)
        K = int(rng.integers(1, 4))
        result = greedy_general(pop, dist, K)
        blocks = list(result.policy.blocks)
        for l in range(K):
            prior = blocks[:l]
            chosen = blocks[: l + 1]
            base = (
                hit_probability_general(GeneralPolicy(tuple(prior)), pop, dist)
                if prior
                else 0.0
            )
            achieved = hit_probability_general(GeneralPolicy(tuple(chosen)), pop, dist) - base
            best = _exhaustive_best_gain(pop, dist, prior)
            assert achieved == pytest.approx(best, abs=1e-12)


# ---------------------------------------------------------------------------
# greedy with disjoint blocks
# ---------------------------------------------------------------------------


def test_gdbnc_single_coverage_is_most_popular():
    pop = random_popularity(np.random.default_rng(3), 6)
    result = greedy_disjoint(pop, DIST_1COV, 3)
    assert result.policy.sizes == (1, 1, 1)


def test_gdbnc_hand_worked_instance():
    result = greedy_disjoint(POP4, DIST_P2, 2)
    assert result.diagnostics["raw_sizes"] == [2, 2]
    assert result.hit_prob == pytest.approx(1.0, abs=1e-15)


def test_gdbnc_never_beats_dp(rng):
    for _ in range(200):
        pop, dist, L = random_instance(rng)
        assert greedy_disjoint(pop, dist, L).hit_prob <= solve_dp(pop, dist, L).hit_prob + 1e-12


def test_gdbnc_nondecreasing_flag():
    pop = zipf(12, 1.2)
    free = greedy_disjoint(pop, DIST_HALF, 3)
    constrained = greedy_disjoint(pop, DIST_HALF, 3, nondecreasing=True)
    raw = constrained.diagnostics["raw_sizes"]
    used = [m for m in raw if m > 0]
    assert all(b >= a for a, b in zip(used, used[1:]))
    assert constrained.hit_prob <= free.hit_prob + 1e-12


# ---------------------------------------------------------------------------
# most popular
# ---------------------------------------------------------------------------


def test_mp_hits_top_mass_times_tail():
    pop = zipf(4, 0.0)
    dist = CoverageDistribution(pmf=np.array([0.2, 0.8]))
    assert most_popular(pop, dist, 2).hit_prob == pytest.approx(0.4, abs=1e-15)


def test_mp_saturates_at_catalog():
    dist = CoverageDistribution(pmf=np.array([0.3, 0.7]))
    result = most_popular(POP4, dist, 9)
    assert result.hit_prob == pytest.approx(dist.tail_at(1), abs=1e-15)


def test_mp_optimal_in_single_coverage(rng):
    for _ in range(50):
        pop = random_popularity(rng, int(rng.integers(2, 10)))
        q = float(rng.random())
        dist = CoverageDistribution(pmf=np.array([1.0 - q, q]))
        L = int(rng.integers(1, 5))
        assert most_popular(pop, dist, L).hit_prob == solve_dp(pop, dist, L).hit_prob


# ---------------------------------------------------------------------------
# independent caching
# ---------------------------------------------------------------------------


def test_ind_single_coverage_is_top_l_indicator():
    ind, hit = independent_caching(POP4, DIST_1COV, 2)
    np.testing.assert_allclose(ind.b, [1.0, 1.0, 0.0, 0.0])
    assert hit == pytest.approx(0.7, abs=1e-12)


def test_ind_uniform_popularity_spreads_budget():
    pop = zipf(4, 0.0)
    ind, hit = independent_caching(pop, DIST_HALF, 2)
    np.testing.assert_allclose(ind.b, [0.5, 0.5, 0.5, 0.5], atol=1e-7)
    # 1 - G(1 - 1/2) with G(z) = 0.5 z + 0.5 z^2
    assert hit == pytest.approx(1.0 - (0.5 * 0.5 + 0.5 * 0.25), abs=1e-7)


def test_ind_budget_saturates(rng):
    for _ in range(30):
        J = int(rng.integers(3, 12))
        pop = random_popularity(rng, J)
        dist = random_coverage(rng)
        if dist.pmf[0] == 1.0:
            continue
        L = int(rng.integers(1, J))
        ind, _ = independent_caching(pop, dist, L)
        assert float(ind.b.sum()) == pytest.approx(L, abs=1e-8)
        assert np.all(np.diff(ind.b) <= 1e-9)  # nonincreasing


def test_ind_never_covered_degenerates():
    dist = CoverageDistribution(pmf=np.array([1.0]))
    ind, hit = independent_caching(POP4, dist, 2)
    assert hit == 0.0
    assert float(ind.b.sum()) <= 2 + 1e-9


def test_ind_full_budget_caches_everything():
    ind, hit = independent_caching(POP4, DIST_HALF, 4)
    np.testing.assert_allclose(ind.b, 1.0)
    assert hit == pytest.approx(DIST_HALF.tail_at(1), abs=1e-12)


def test_ind_invariant_under_equal_popularity_permutation():
    # equal-probability items must receive identical caching probabilities
    pop = PopularityDistribution(np.array([0.3, 0.3, 0.2, 0.2]))
    ind, _ = independent_caching(pop, DIST_HALF, 2)
    assert ind.b[0] == pytest.approx(ind.b[1], abs=1e-10)
    assert ind.b[2] == pytest.approx(ind.b[3], abs=1e-10)


# ---------------------------------------------------------------------------
# ordering chain and result hygiene
# ---------------------------------------------------------------------------


def test_solver_ordering_chain(rng):
    for _ in range(100):
        pop, dist, L = random_instance(rng)
        onc = solve_dp(pop, dist, L)
        assert onc.hit_prob >= greedy_disjoint(pop, dist, L).hit_prob - 1e-12
        assert onc.hit_prob >= most_popular(pop, dist, L).hit_prob - 1e-12
        assert onc.hit_prob >= greedy_general(pop, dist, L).hit_prob - 1e-12


def test_results_reevaluate_identically(rng):
    for _ in range(50):
        pop, dist, L = random_instance(rng)
        for result in (
            solve_dp(pop, dist, L),
            greedy_disjoint(pop, dist, L),
            most_popular(pop, dist, L),
        ):
            again = hit_probability_structured(result.policy, pop, dist)
            assert again == result.hit_prob
        g = greedy_general(pop, dist, L)
        assert hit_probability_general(g.policy, pop, dist) == g.hit_prob


def test_solvers_reject_bad_block_count():
    for fn in (solve_dp, greedy_general, greedy_disjoint, most_popular, independent_caching):
        with pytest.raises(ParameterError):
            fn(POP4, DIST_HALF, 0)


# ---------------------------------------------------------------------------
# greedy bound report
# ---------------------------------------------------------------------------


def test_bound_report_fields():
    report = greedy_bound_check(POP4, DIST_HALF, 2, 4)
    assert report["factor"] == pytest.approx(1.0 - math.exp(-0.5), rel=1e-12)
    assert report["satisfied"]
    assert report["greedy_hit"] >= report["bound"] - 1e-12


def test_bound_tight_case_single_coverage():
    report = greedy_bound_check(POP4, DIST_1COV, 2, 2)
    assert report["greedy_hit"] == pytest.approx(report["optimal_hit"], abs=1e-12)
    assert report["slack"] == pytest.approx(
        math.exp(-1.0) * report["optimal_hit"], abs=1e-9
    )


def test_bound_loose_factor_with_many_greedy_blocks():
    # K = 4L leaves only a (1 - e^(-1/4)) guarantee; it must still hold
    report = greedy_bound_check(POP4, DIST_HALF, 1, 4)
    assert report["factor"] == pytest.approx(0.22119921692859512, rel=1e-12)
    assert report["satisfied"]


def test_bound_rejects_k_below_l():
    with pytest.raises(ParameterError):
        greedy_bound_check(POP4, DIST_HALF, 3, 2)
