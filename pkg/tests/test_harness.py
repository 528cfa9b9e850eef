import numpy as np
import pytest

from exitsim import (
    AllCensoredError,
    EnsembleHistogram,
    GridMismatchError,
    collect,
    collect_until_exits,
    compare_ensembles,
    pointwise_error,
    run_ensemble,
)
from exitsim.model import ExitCondition


class TestCollect:
    def test_accounting_identity(self, sir):
        system, initial, exit_cond = sir
        s = collect(system, initial, exit_cond, "ssa", 10_000, seed=1)
        assert s.n_exited + s.n_censored == 10_000

    def test_ssa_draw_accounting(self, sir):
        system, initial, exit_cond = sir
        s = collect(system, initial, exit_cond, "ssa", 2_000, seed=1)
        assert s.exponential_draws == s.uniform_draws
        assert s.gamma_draws == 0
        assert 0 < s.exited_steps <= s.exponential_draws

    def test_exit_method_draw_accounting(self, sir):
        system, initial, exit_cond = sir
        s = collect(system, initial, exit_cond, "exit", 2_000, seed=1,
                    epsilon=0.5)
        assert s.exponential_draws == 0
        assert 0 < s.gamma_draws <= s.exited_steps

    def test_backends_share_state_paths(self, sir):
        # the selection substream drives both, so exit/censor splits agree
        system, initial, exit_cond = sir
        a = collect(system, initial, exit_cond, "ssa", 5_000, seed=3)
        b = collect(system, initial, exit_cond, "exit", 5_000, seed=3,
                    epsilon=0.25)
        assert a.n_exited == b.n_exited
        assert a.exited_steps == b.exited_steps

    def test_bad_method_rejected(self, sir):
        system, initial, exit_cond = sir
        with pytest.raises(ValueError):
            collect(system, initial, exit_cond, "leap", 10, seed=1)

    def test_until_exits_reaches_target(self, sir):
        system, initial, exit_cond = sir
        s = collect_until_exits(system, initial, exit_cond, "ssa", 50, seed=2,
                                chunk_size=4_096)
        assert s.n_exited >= 50
        assert s.n_trajectories % 4_096 == 0

    def test_workers_do_not_change_results(self, sir):
        system, initial, exit_cond = sir
        a = collect(system, initial, exit_cond, "ssa", 2_000, seed=5,
                    chunk_size=1_000, workers=1)
        b = collect(system, initial, exit_cond, "ssa", 2_000, seed=5,
                    chunk_size=1_000, workers=2)
        assert np.array_equal(a.times, b.times)
        assert a.counters == b.counters


class TestRunEnsemble:
    def test_deterministic_bit_for_bit(self, sir):
        system, initial, exit_cond = sir
        h1 = run_ensemble(system, initial, exit_cond, "ssa", 10_000, seed=1)
        h2 = run_ensemble(system, initial, exit_cond, "ssa", 10_000, seed=1)
        assert np.array_equal(h1.bin_edges, h2.bin_edges)
        assert np.array_equal(h1.densities, h2.densities)
        assert h1.rng_counters == h2.rng_counters

    def test_normalization(self, sir):
        system, initial, exit_cond = sir
        h = run_ensemble(system, initial, exit_cond, "exit", 10_000, seed=2,
                         epsilon=0.5, bins=50)
        assert abs((h.densities * h.bin_widths).sum() - 1.0) < 1e-12

    def test_all_censored_reported(self, sir):
        system, initial, _ = sir
        # S never increases, so S >= 96 is unreachable
        impossible = ExitCondition(0, ">=", 96)
        with pytest.raises(AllCensoredError):
            run_ensemble(system, initial, impossible, "ssa", 500, seed=1)


def hist(edges, densities):
    return EnsembleHistogram(np.asarray(edges, float),
                             np.asarray(densities, float), 1, 0)


class TestPointwiseError:
    def test_self_is_zero(self):
        h = hist([0, 1, 2], [0.5, 0.5])
        l1, l2, per_bin = pointwise_error(h, h)
        assert l1 == 0 and l2 == 0
        assert np.all(per_bin == 0)

    def test_symmetric(self, sir):
        system, initial, exit_cond = sir
        h1 = run_ensemble(system, initial, exit_cond, "ssa", 5_000, seed=1,
                          bins=30)
        h2 = run_ensemble(system, initial, exit_cond, "ssa", 5_000, seed=2,
                          bins=30, bin_edges=h1.bin_edges)
        assert pointwise_error(h1, h2)[:2] == pointwise_error(h2, h1)[:2]

    def test_shifted_delta_mass_total_variation(self):
        # all mass in one bin vs the neighboring bin: l1 = 2
        a = hist([0, 1, 2, 3], [1.0, 0.0, 0.0])
        b = hist([0, 1, 2, 3], [0.0, 1.0, 0.0])
        l1, _, _ = pointwise_error(a, b)
        assert l1 == pytest.approx(2.0)

    def test_grid_mismatch_rejected(self):
        a = hist([0, 1, 2], [0.5, 0.5])
        b = hist([0, 0.5, 1], [1.0, 1.0])
        with pytest.raises(GridMismatchError):
            pointwise_error(a, b)


class TestCompareEnsembles:
    def test_fields_and_paired_seeds(self, sir):
        system, initial, exit_cond = sir
        res = compare_ensembles(system, initial, exit_cond, 0.5, 20_000,
                                seed=3, bins=30)
        assert res.l1 >= 0 and res.l2 >= 0
        assert len(res.per_bin) == 30
        assert 0 < res.rho < 1
        assert res.rho_total < res.rho
        assert 0 <= res.ks_statistic <= 1
        assert np.array_equal(res.ssa.bin_edges, res.method.bin_edges)
