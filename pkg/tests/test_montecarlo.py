"""Tests for the replication harness and its summary statistics."""

import math

import numpy as np
import pytest
from scipy.special import ndtri

from bandit_lan import (
    ConfigurationError,
    RCT,
    RateRegime,
    StudyConfig,
    ThompsonGaussian,
    Trajectory,
    convergence_diag,
    histogram,
    ks_distance,
    location_arms,
    run_study,
    run_trajectory,
    summarize_records,
    t_stat_arm,
    t_stat_diff,
)

GAUSS_ARMS = location_arms("gaussian", 2)
LOGIS_ARMS = location_arms("logistic_unit_var", 2)


def fixed_trajectory(pulls, sums, T=None):
    T = T if T is not None else sum(pulls)
    actions = np.repeat(np.arange(len(pulls)), pulls).astype(np.int64)
    rewards = np.zeros(T)
    return Trajectory(
        actions, rewards, np.asarray(pulls, dtype=np.int64), np.asarray(sums, dtype=float)
    )


def small_study(**overrides):
    params = dict(
        T=50,
        arms=GAUSS_ARMS,
        policy=ThompsonGaussian(2),
        m1_grid=(2.0,),
        replications=20,
        base_seed=99,
        regime=RateRegime.CASE_B,
    )
    params.update(overrides)
    return StudyConfig(**params)


class TestTStats:
    def test_arm_statistic_value(self):
        traj = fixed_trajectory([4, 6], [10.0, 0.0])
        assert t_stat_arm(traj, 0, 2.0) == pytest.approx(1.0)

    def test_unpulled_arm_is_missing(self):
        traj = fixed_trajectory([10, 0], [5.0, 0.0])
        assert t_stat_arm(traj, 1, 0.0) is None

    def test_centered_sample_mean_gives_zero(self):
        traj = fixed_trajectory([5, 5], [2.5, 0.0])
        assert t_stat_arm(traj, 0, 0.5) == 0.0

    def test_difference_statistic_zero_at_truth(self):
        traj = fixed_trajectory([100, 100], [100.0, 0.0])
        assert t_stat_diff(traj, 1.0) == pytest.approx(0.0, abs=1e-15)

    def test_difference_statistic_value(self):
        traj = fixed_trajectory([4, 1], [5.0, 0.0])
        assert t_stat_diff(traj, 0.0) == pytest.approx(1.25 / math.sqrt(1.25), rel=1e-12)

    def test_difference_missing_when_an_arm_is_unpulled(self):
        traj = fixed_trajectory([5, 0], [5.0, 0.0])
        assert t_stat_diff(traj, 0.0) is None

    def test_difference_requires_two_arms(self):
        traj = fixed_trajectory([2, 2, 2], [0.0, 0.0, 0.0])
        with pytest.raises(ConfigurationError):
            t_stat_diff(traj, 0.0)


class TestKsDistance:
    def test_single_sample_at_zero(self):
        assert ks_distance([0.0]) == pytest.approx(0.5)

    def test_plug_in_normal_quantiles(self):
        n = 1000
        samples = ndtri((np.arange(1, n + 1) - 0.5) / n)
        assert ks_distance(samples) < 0.001

    def test_shifted_sample_saturates(self):
        samples = np.random.default_rng(1).normal(10.0, 1.0, size=500)
        assert ks_distance(samples) == pytest.approx(1.0, abs=1e-6)

    def test_missing_values_are_excluded(self):
        assert ks_distance([0.0, None, float("nan")]) == pytest.approx(0.5)

    def test_all_missing_is_an_error(self):
        with pytest.raises(ConfigurationError):
            ks_distance([None, float("nan")])


class TestHistogram:
    def test_sample_at_lower_edge(self):
        counts = histogram([0.0], lo=0.0, hi=1.0, bins=4)
        assert counts[0] == 0 and counts[1] == 1

    def test_sample_above_upper_edge(self):
        counts = histogram([1.5], lo=0.0, hi=1.0, bins=4)
        assert counts[-1] == 1

    def test_sample_at_upper_edge_overflows(self):
        counts = histogram([1.0], lo=0.0, hi=1.0, bins=4)
        assert counts[-1] == 1

    def test_counts_sum_to_sample_size(self):
        rng = np.random.default_rng(2)
        samples = rng.normal(size=5000) * 3
        counts = histogram(samples, lo=-6.0, hi=6.0, bins=121)
        assert counts.sum() == 5000
        assert len(counts) == 123

    def test_invalid_spec(self):
        with pytest.raises(ConfigurationError):
            histogram([0.0], lo=1.0, hi=0.0, bins=3)


class TestRunStudy:
    def test_single_replication_matches_direct_run(self):
        cfg = small_study(replications=1)
        [record] = run_study(cfg)
        traj = run_trajectory(cfg.experiment_for(0, 0))
        assert record.pull_counts == tuple(traj.pull_counts)
        theta = cfg.theta_for(2.0)
        assert record.tau_mu[0] == t_stat_arm(traj, 0, theta[0])
        assert record.tau_delta == t_stat_diff(traj, theta[0] - theta[1])
        assert record.seed == cfg.experiment_for(0, 0).seed

    def test_reruns_are_identical(self):
        cfg = small_study()
        assert run_study(cfg) == run_study(cfg)

    def test_worker_count_does_not_change_records(self):
        cfg = small_study(replications=12)
        assert run_study(cfg, threads=1) == run_study(cfg, threads=2)

    def test_llr_fields_present_iff_h_configured(self):
        no_h = run_study(small_study(replications=2))
        assert all(r.residual is None for r in no_h)
        with_h = run_study(small_study(replications=2, h=(1.0, 1.0)))
        assert all(r.residual is not None for r in with_h)
        for r in with_h:
            assert r.residual == r.exact_llr - r.quad_llr

    def test_grid_ordering(self):
        cfg = small_study(m1_grid=(10.0, 2.0), replications=3)
        records = run_study(cfg)
        assert [(r.m1_index, r.rep) for r in records] == [
            (i, r) for i in range(2) for r in range(3)
        ]
        assert records[0].m1 == 10.0 and records[-1].m1 == 2.0


class TestSummaries:
    def test_missing_accounting_matches_zero_pulls(self):
        cfg = small_study(
            policy=RCT([1.0, 0.0], allow_degenerate=True), replications=10
        )
        records = run_study(cfg)
        [row] = summarize_records(records)
        assert row.n_missing == 10
        assert all(r.tau_mu[1] is None and r.tau_delta is None for r in records)
        assert row.ks_tau_mu2 is None and row.ks_tau_delta is None
        assert row.median_d2 == 0.0

    def test_summary_counts(self):
        records = run_study(small_study(replications=25))
        [row] = summarize_records(records)
        assert row.n_reps == 25
        assert row.ks_tau_delta is not None


class TestConvergenceDiag:
    def test_reference_constant_for_unit_gap(self):
        cfg = small_study(
            T=200, m1_grid=(math.sqrt(200.0),), replications=5,
        )
        rows = convergence_diag(cfg, [100, 200])
        assert {r.checkpoint for r in rows} == {100, 200}
        for row in rows:
            assert row.arm == 2
            assert row.statistic == "pulls_per_log_t"
            assert row.reference == pytest.approx(2.0)

    def test_reference_constant_for_local_gap(self):
        # gap 50/sqrt(500) has squared value 5, so the constant is 2/5
        cfg = small_study(T=500, m1_grid=(50.0,), replications=3)
        rows = convergence_diag(cfg, [500])
        assert rows[0].reference == pytest.approx(0.4)

    def test_linear_rate_reports_fractions(self):
        cfg = small_study(
            T=100,
            policy=RCT([0.25, 0.75]),
            regime=RateRegime.CASE_B_STAR,
            replications=40,
        )
        rows = convergence_diag(cfg, [100])
        by_arm = {r.arm: r for r in rows}
        assert by_arm[1].statistic == "pulls_per_t"
        assert by_arm[1].reference == 0.25
        assert by_arm[2].reference == 0.75
        assert abs(by_arm[2].median - 0.75) < 0.1

    def test_checkpoint_validation(self):
        cfg = small_study()
        with pytest.raises(ConfigurationError):
            convergence_diag(cfg, [40, 30])
        with pytest.raises(ConfigurationError):
            convergence_diag(cfg, [40, 60])
