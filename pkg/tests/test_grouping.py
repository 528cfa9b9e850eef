import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from exitsim import RandomStream, partition, rho, sample_exit_time
from exitsim.kernels import partition_flat


class TestPartitionExamples:
    def test_three_element_worked_example(self):
        g = partition(np.array([10.0, 9.6, 5.0]), 0.05)
        assert len(g) == 2
        assert g.counts.tolist() == [2, 1]
        assert g.lambda_tilde[0] == pytest.approx(192.0 / 19.6, rel=1e-12)
        assert g.lambda_tilde[1] == pytest.approx(5.0)

    def test_epsilon_zero_groups_exact_ties(self):
        g = partition(np.array([3.0, 3.0, 1.0]), 0.0)
        assert g.counts.tolist() == [2, 1]
        assert g.lambda_tilde.tolist() == [3.0, 1.0]

    def test_singleton(self):
        g = partition(np.array([7.0]), 0.9)
        assert g.counts.tolist() == [1]
        assert g.lambda_tilde.tolist() == [7.0]

    def test_empty_log(self):
        g = partition(np.array([]), 0.1)
        assert len(g) == 0
        assert g.total == 0

    def test_negative_epsilon_rejected(self):
        with pytest.raises(ValueError):
            partition(np.array([1.0]), -0.1)

    def test_nonpositive_entries_rejected(self):
        with pytest.raises(ValueError):
            partition(np.array([1.0, 0.0]), 0.1)


class TestPartitionProperties:
    @pytest.mark.parametrize("seed", range(5))
    def test_coverage_and_group_bounds(self, seed):
        rng = np.random.default_rng(seed)
        log = rng.uniform(0.5, 20.0, size=rng.integers(1, 200))
        eps = rng.uniform(0.0, 0.6)
        g = partition(log, eps)
        assert g.total == len(log)
        # leader of each group bounds its members from below by (1 - eps)
        srt = np.sort(log)[::-1]
        start = 0
        for lt, n in zip(g.lambda_tilde, g.counts):
            block = srt[start:start + n]
            assert np.all(block >= block[0] * (1 - eps) - 1e-12)
            assert lt == pytest.approx(n / np.sum(1.0 / block))
            start += n
        assert np.all(np.diff(g.lambda_tilde) < 1e-12)  # descending

    def test_group_count_monotone_in_epsilon(self):
        rng = np.random.default_rng(8)
        log = rng.uniform(0.5, 20.0, size=150)
        sizes = [len(partition(log, e)) for e in (0.0, 0.05, 0.1, 0.25, 0.5)]
        assert sizes == sorted(sizes, reverse=True)

    def test_mean_preserved_exactly(self):
        rng = np.random.default_rng(9)
        log = rng.uniform(0.5, 20.0, size=100)
        for eps in (0.0, 0.1, 0.5):
            g = partition(log, eps)
            assert g.expected_time == pytest.approx(np.sum(1.0 / log), rel=1e-12)


class TestSampler:
    def test_empty_grouping_samples_zero(self):
        g = partition(np.array([]), 0.1)
        assert sample_exit_time(g, RandomStream(1)) == 0.0

    def test_draw_count_is_group_count(self):
        g = partition(np.array([10.0, 9.6, 5.0]), 0.05)
        stream = RandomStream(2)
        sample_exit_time(g, stream)
        assert stream.n_gamma == len(g)

    def test_statistical_mean(self):
        g = partition(np.array([4.0, 3.9, 1.0]), 0.1)
        stream = RandomStream(3)
        xs = np.array([sample_exit_time(g, stream) for _ in range(50_000)])
        se = xs.std() / math.sqrt(len(xs))
        assert abs(xs.mean() - g.expected_time) < 3 * se

    def test_single_group_is_exponential(self):
        lam = 2.0
        g = partition(np.array([lam]), 0.0)
        stream = RandomStream(4)
        xs = np.array([sample_exit_time(g, stream) for _ in range(10_000)])
        es = np.array([stream.exponential(lam) for _ in range(10_000)])
        crit = 1.63 * math.sqrt(2 / 10_000)
        assert ks_2samp(xs, es).statistic < crit

    def test_epsilon_zero_matches_sum_of_exponentials(self):
        # distinct rates: every group is a singleton, so the sample is a
        # hypoexponential; compare against the brute-force sum oracle
        rates = np.array([1.0, 2.0, 3.5, 5.0, 8.0])
        g = partition(rates, 0.0)
        assert len(g) == 5
        stream = RandomStream(5)
        xs = np.array([sample_exit_time(g, stream) for _ in range(10_000)])
        brute = np.array([sum(stream.exponential(r) for r in rates)
                          for _ in range(10_000)])
        crit = 1.63 * math.sqrt(2 / 10_000)
        assert ks_2samp(xs, brute).statistic < crit


class TestRho:
    def test_single_group_per_trajectory(self):
        # one Erlang per trajectory, 200 steps each
        assert rho(gamma_draws=1, exponential_draws=200) == pytest.approx(0.005)

    def test_all_distinct_epsilon_zero(self):
        assert rho(gamma_draws=500, exponential_draws=500) == 1.0

    def test_zero_denominator_rejected(self):
        with pytest.raises(ValueError):
            rho(gamma_draws=1, exponential_draws=0)


class TestBatchedPartitionAgreesWithReference:
    def test_flat_partition_matches_per_trajectory(self):
        rng = np.random.default_rng(12)
        logs_list = [rng.uniform(0.5, 20.0, size=rng.integers(1, 60))
                     for _ in range(20)]
        logs = np.concatenate(logs_list)
        offs = np.concatenate(([0], np.cumsum([len(x) for x in logs_list])))
        for eps in (0.0, 0.1, 0.4):
            perm, group_off, lam_tilde, m_per = partition_flat(logs, offs, eps)
            start = 0
            for tr, log in enumerate(logs_list):
                ref = partition(log, eps)
                m = m_per[tr]
                assert m == len(ref)
                got = lam_tilde[start:start + m]
                np.testing.assert_allclose(got, ref.lambda_tilde, rtol=1e-12)
                counts = np.diff(group_off)[start:start + m]
                assert counts.tolist() == ref.counts.tolist()
                start += m
