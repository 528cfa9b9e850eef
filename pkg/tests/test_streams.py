import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from exitsim import RandomStream, exponential_inverse, select_index


def ks_below_1pct(a, b):
    n1, n2 = len(a), len(b)
    crit = 1.63 * math.sqrt((n1 + n2) / (n1 * n2))
    return ks_2samp(a, b).statistic < crit


class TestPureHelpers:
    def test_exponential_inverse_forced_value(self):
        assert exponential_inverse(math.exp(-1.0), 2.0) == pytest.approx(0.5)

    def test_exponential_inverse_rejects_bad_rate(self):
        with pytest.raises(ValueError):
            exponential_inverse(0.5, 0.0)

    def test_exponential_inverse_near_one_is_tiny(self):
        assert 0.0 <= exponential_inverse(1.0 - 1e-12, 1.0) < 1e-11

    def test_select_index_forced_values(self):
        # target 0.4 falls inside the first weight
        assert select_index(0.1, [1.0, 3.0]) == 0
        # target 2.0 falls inside (1, 4]
        assert select_index(0.5, [1.0, 3.0]) == 1

    def test_select_index_single_positive_weight(self):
        for r in (0.0, 0.3, 0.999):
            assert select_index(r, [5.0, 0.0, 0.0]) == 0

    def test_select_index_all_zero_rejected(self):
        with pytest.raises(ValueError):
            select_index(0.5, [0.0, 0.0])


class TestDeterminism:
    def test_same_key_same_sequence(self):
        a = RandomStream(42, 7)
        b = RandomStream(42, 7)
        assert [a.uniform() for _ in range(50)] == [b.uniform() for _ in range(50)]
        assert [a.exponential(2.0) for _ in range(50)] == \
               [b.exponential(2.0) for _ in range(50)]

    def test_distinct_stream_ids_differ(self):
        a = RandomStream(42, 0)
        b = RandomStream(42, 1)
        assert [a.uniform() for _ in range(100)] != [b.uniform() for _ in range(100)]

    def test_substreams_are_independent(self):
        # consuming time variates must not shift the selection sequence
        a = RandomStream(3, 0)
        b = RandomStream(3, 0)
        for _ in range(10):
            b.exponential(1.0)
        assert a.uniform() == b.uniform()


class TestCounters:
    def test_counts_match_calls(self):
        s = RandomStream(1)
        for _ in range(5):
            s.uniform()
        for _ in range(3):
            s.exponential(1.0)
        s.discrete_index([1.0, 1.0])
        s.gamma(scale=0.5, shape=4)
        assert s.counters == {"uniform": 6, "exponential": 3, "gamma": 1}

    def test_gamma_counts_one_draw_regardless_of_shape(self):
        s = RandomStream(1)
        s.gamma(scale=1.0, shape=9)
        assert s.n_gamma == 1


class TestValidation:
    def test_exponential_rate_positive(self):
        with pytest.raises(ValueError):
            RandomStream(1).exponential(0.0)

    def test_gamma_scale_positive(self):
        with pytest.raises(ValueError):
            RandomStream(1).gamma(scale=0.0, shape=1)

    def test_gamma_shape_integer(self):
        with pytest.raises(ValueError):
            RandomStream(1).gamma(scale=1.0, shape=2.5)
        with pytest.raises(ValueError):
            RandomStream(1).gamma(scale=1.0, shape=0)


class TestMoments:
    def test_uniform_mean(self):
        s = RandomStream(11)
        xs = [s.uniform() for _ in range(100_000)]
        assert abs(np.mean(xs) - 0.5) < 0.01

    def test_exponential_mean(self):
        lam = 3.0
        s = RandomStream(12)
        xs = np.array([s.exponential(lam) for _ in range(100_000)])
        se = xs.std() / math.sqrt(len(xs))
        assert abs(xs.mean() - 1.0 / lam) < 3 * se

    def test_erlang_mean(self):
        # Erlang(3, rate 2) has mean 1.5
        s = RandomStream(13)
        xs = np.array([s.gamma(scale=0.5, shape=3) for _ in range(100_000)])
        se = xs.std() / math.sqrt(len(xs))
        assert abs(xs.mean() - 1.5) < 3 * se


class TestDistributions:
    def test_shape_one_equals_exponential(self):
        lam = 2.5
        s = RandomStream(20)
        g = np.array([s.gamma(scale=1.0 / lam, shape=1) for _ in range(10_000)])
        e = np.array([s.exponential(lam) for _ in range(10_000)])
        assert ks_below_1pct(g, e)

    @pytest.mark.parametrize("shape", range(2, 9))
    def test_erlang_equals_sum_of_exponentials(self, shape):
        lam = 1.7
        s = RandomStream(21, shape)
        g = np.array([s.gamma(scale=1.0 / lam, shape=shape)
                      for _ in range(10_000)])
        sums = np.array([sum(s.exponential(lam) for _ in range(shape))
                         for _ in range(10_000)])
        assert ks_below_1pct(g, sums)
