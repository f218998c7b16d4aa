"""Tests for the sampling policies and their history-only contract."""

import math

import numpy as np
import pytest

from bandit_lan import (
    Clipped,
    ConfigurationError,
    PolicyState,
    RCT,
    ThompsonGaussian,
    UCB1,
    stream,
)
from bandit_lan.policies import normal_cdf, pick_action


def state_with(pulls, rewards):
    st = PolicyState.fresh(len(pulls))
    st.pulls = list(pulls)
    st.reward_sums = [float(r) for r in rewards]
    st.t = sum(pulls)
    return st


class TestPolicyState:
    def test_update_counts(self):
        st = PolicyState.fresh(2)
        st.update(0, 2.5)
        assert st.pulls == [1, 0]
        assert st.reward_sums == [2.5, 0.0]
        assert st.t == 1

    def test_updates_commute_in_totals(self):
        a = PolicyState.fresh(2).update(0, 1.0).update(1, -2.0)
        b = PolicyState.fresh(2).update(1, -2.0).update(0, 1.0)
        assert a.pulls == b.pulls
        assert a.reward_sums == b.reward_sums

    def test_pulls_always_sum_to_t(self):
        rng = stream(3)
        st = PolicyState.fresh(3)
        for _ in range(200):
            st.update(int(rng.integers(3)), float(rng.normal()))
            assert sum(st.pulls) == st.t

    def test_out_of_range_action(self):
        with pytest.raises(ValueError):
            PolicyState.fresh(2).update(2, 0.0)


class TestThompson:
    def test_symmetric_start(self):
        pol = ThompsonGaussian(2)
        probs = pol.action_probabilities(PolicyState.fresh(2))
        np.testing.assert_allclose(probs, [0.5, 0.5], atol=0)

    def test_closed_form_value(self):
        # posterior means (0.5, 0), variances (0.5, 0.5)
        pol = ThompsonGaussian(2)
        probs = pol.action_probabilities(state_with([1, 1], [1.0, 0.0]))
        assert probs[1] == pytest.approx(normal_cdf(-0.5), abs=1e-15)
        assert probs[1] == pytest.approx(0.3085375387259869, abs=1e-12)

    def test_posterior_matches_printed_form(self):
        pol = ThompsonGaussian(2, prior_var=1.0, assumed_var=1.0)
        means, variances = pol.posterior_params(state_with([3, 0], [6.0, 0.0]))
        assert means[0] == pytest.approx(6.0 / 4.0)
        assert variances[0] == pytest.approx(1.0 / 4.0)
        assert means[1] == 0.0 and variances[1] == 1.0

    def test_closed_form_agrees_with_posterior_sampling(self):
        pol = ThompsonGaussian(2)
        rng = stream(42)
        n = 10**5
        for _ in range(5):
            st = state_with(rng.integers(0, 30, size=2), rng.normal(0, 3, size=2))
            p2 = pol.action_probabilities(st)[1]
            means, variances = pol.posterior_params(st)
            draws = np.asarray(means) + np.sqrt(variances) * rng.standard_normal((n, 2))
            freq = float(np.mean(draws[:, 1] > draws[:, 0]))
            se = math.sqrt(max(p2 * (1 - p2), 1e-12) / n)
            assert abs(freq - p2) <= 3 * se + 1e-9

    def test_three_arm_probabilities_need_estimation(self):
        pol = ThompsonGaussian(3)
        with pytest.raises(ConfigurationError):
            pol.action_probabilities(PolicyState.fresh(3))
        est = pol.estimate_action_probabilities(PolicyState.fresh(3), stream(1), 30_000)
        np.testing.assert_allclose(est, [1 / 3] * 3, atol=0.02)
        # the draw itself works for any K
        assert pol.draw_action(PolicyState.fresh(3), stream(2)) in (0, 1, 2)

    def test_invalid_params(self):
        with pytest.raises(ConfigurationError):
            ThompsonGaussian(2, prior_var=0.0)


class TestUCB1:
    def test_forced_initialization(self):
        pol = UCB1(2)
        probs0 = pol.action_probabilities(PolicyState.fresh(2))
        np.testing.assert_array_equal(probs0, [1.0, 0.0])
        st = PolicyState.fresh(2).update(0, 0.0)
        np.testing.assert_array_equal(pol.action_probabilities(st), [0.0, 1.0])

    def test_tie_breaks_to_lowest_index(self):
        pol = UCB1(2)
        st = state_with([1, 1], [0.0, 0.0])
        # both indices equal sqrt(2 ln 3)
        np.testing.assert_array_equal(pol.action_probabilities(st), [1.0, 0.0])

    def test_index_prefers_better_mean(self):
        pol = UCB1(2)
        st = state_with([5, 5], [5.0, 0.0])
        np.testing.assert_array_equal(pol.action_probabilities(st), [1.0, 0.0])


class TestRCT:
    def test_fixed_weights(self):
        pol = RCT([0.3, 0.7])
        st = PolicyState.fresh(2)
        for _ in range(5):
            np.testing.assert_array_equal(pol.action_probabilities(st), [0.3, 0.7])
            st.update(1, 1.0)

    def test_weight_validation(self):
        with pytest.raises(ConfigurationError):
            RCT([0.5, 0.6])
        with pytest.raises(ConfigurationError):
            RCT([1.0, 0.0])
        RCT([1.0, 0.0], allow_degenerate=True)


class TestClipped:
    def test_bounds_hold_for_two_arms(self):
        pol = Clipped(UCB1(2), epsilon=0.1)
        probs = pol.action_probabilities(state_with([3, 1], [3.0, 0.0]))
        np.testing.assert_allclose(probs, [0.9, 0.1])
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)

    def test_bounds_hold_for_three_arms(self):
        # inner weights that naive clip-and-renormalize would push back out
        inner = RCT([0.02, 0.49, 0.49])
        pol = Clipped(inner, epsilon=0.1)
        probs = pol.action_probabilities(PolicyState.fresh(3))
        lo, hi = 0.1, 1.0 - 2 * 0.1
        assert np.all(probs >= lo - 1e-15) and np.all(probs <= hi + 1e-15)
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)

    def test_interior_probabilities_untouched(self):
        pol = Clipped(RCT([0.4, 0.6]), epsilon=0.05)
        np.testing.assert_allclose(
            pol.action_probabilities(PolicyState.fresh(2)), [0.4, 0.6]
        )

    def test_epsilon_range(self):
        with pytest.raises(ConfigurationError):
            Clipped(RCT([0.5, 0.5]), epsilon=0.5)


@pytest.mark.parametrize(
    "policy",
    [
        ThompsonGaussian(2),
        UCB1(2),
        RCT([0.25, 0.75]),
        Clipped(ThompsonGaussian(2), epsilon=0.05),
    ],
    ids=["thompson", "ucb1", "rct", "clipped"],
)
class TestHistoryOnlyContract:
    def test_replay_gives_identical_probabilities(self, policy):
        rng = stream(17)
        history = [(int(rng.integers(2)), float(rng.normal())) for _ in range(100)]
        runs = []
        for _ in range(2):
            st = PolicyState.fresh(2)
            probs = []
            for action, reward in history:
                probs.append(policy.action_probabilities(st).tobytes())
                st.update(action, reward)
            runs.append(probs)
        assert runs[0] == runs[1]

    def test_probabilities_form_a_distribution(self, policy):
        rng = stream(23)
        st = PolicyState.fresh(2)
        for _ in range(200):
            probs = policy.action_probabilities(st)
            assert abs(probs.sum() - 1.0) <= 1e-12
            assert np.all(probs >= 0.0) and np.all(probs <= 1.0)
            st.update(int(rng.integers(2)), float(rng.normal()))

    def test_draws_are_reproducible(self, policy):
        st1 = state_with([2, 3], [1.0, -0.5])
        st2 = state_with([2, 3], [1.0, -0.5])
        assert policy.draw_action(st1, stream(5)) == policy.draw_action(st2, stream(5))


class TestDrawAction:
    def test_degenerate_always_first(self):
        pol = RCT([1.0, 0.0], allow_degenerate=True)
        rng = stream(9)
        assert all(pol.draw_action(PolicyState.fresh(2), rng) == 0 for _ in range(100))

    def test_fair_coin_frequency(self):
        pol = RCT([0.5, 0.5])
        rng = stream(10)
        st = PolicyState.fresh(2)
        draws = np.array([pol.draw_action(st, rng) for _ in range(10**5)])
        assert abs(np.mean(draws == 0) - 0.5) < 0.01

    def test_pick_action_edges(self):
        assert pick_action([1.0, 0.0], 0.999999) == 0
        assert pick_action([0.5, 0.5], 0.5) == 1
        assert pick_action([0.5, 0.5], 0.0) == 0
        # cumulative shortfall from rounding falls through to the last arm
        assert pick_action([0.3, 0.3], 0.99) == 1
