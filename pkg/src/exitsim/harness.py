"""Monte Carlo ensemble driver: paired SSA vs exit-time runs, exit-time
density histograms, pointwise error curves and the epsilon-convergence study.

Ensembles run in chunks; chunk c of a run draws from RandomStream(seed, c),
so results are reproducible for a fixed (seed, chunk_size) regardless of the
worker count. Trajectories that never satisfy the exit condition (absorbing
state or step limit) are censored: counted, excluded from the histogram, and
treated identically by both backends.
"""
from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import ks_2samp

from . import kernels
from .model import ExitCondition, ReactionSystem, SystemState
from .streams import RandomStream

DEFAULT_CHUNK = 65536
KS_COEFF_1PCT = 1.63  # two-sample Kolmogorov-Smirnov coefficient at alpha = 0.01


class AllCensoredError(RuntimeError):
    """No trajectory exited; there is no density to build."""


class GridMismatchError(ValueError):
    """Histograms were built on different bin grids."""


@dataclass
class EnsembleSample:
    """Exit times plus accounting for one ensemble run."""
    times: np.ndarray
    n_trajectories: int
    n_censored: int
    uniform_draws: int      # reaction-selection uniforms (one per step)
    exponential_draws: int  # holding-time exponentials (SSA only)
    gamma_draws: int        # Erlang draws (exit-time method only)
    exited_steps: int       # steps spent on trajectories that exited

    @property
    def n_exited(self) -> int:
        return len(self.times)

    @property
    def counters(self) -> dict[str, int]:
        return {"uniform": self.uniform_draws,
                "exponential": self.exponential_draws,
                "gamma": self.gamma_draws}


@dataclass
class EnsembleHistogram:
    bin_edges: np.ndarray
    densities: np.ndarray
    n_exited: int
    n_censored: int
    rng_counters: dict[str, int] = field(default_factory=dict)

    @property
    def bin_widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


@dataclass
class ConvergenceRecord:
    epsilon: float
    l1_error: float
    l2_error: float
    rho: float
    n_samples: int
    n_censored: int = 0
    gamma_draws: int = 0
    exponential_draws: int = 0


def ks_critical_value(n1: int, n2: int, coeff: float = KS_COEFF_1PCT) -> float:
    return coeff * np.sqrt((n1 + n2) / (n1 * n2))


def _chunk_streams(seed: int, chunk_id: int):
    s = RandomStream(seed, chunk_id)
    return s.selection_rng, s.time_rng


def _ssa_chunk(cs, initial, exit_cond, n, seed, chunk_id):
    gen_sel, gen_time = _chunk_streams(seed, chunk_id)
    times, n_cens, total_steps, exited_steps = kernels.run_ssa_batch(
        cs, initial, exit_cond, n, gen_sel, gen_time)
    return EnsembleSample(times, n, n_cens, total_steps, total_steps, 0,
                          exited_steps)


def _exit_method_chunk(cs, initial, exit_cond, epsilon, n, seed, chunk_id):
    gen_sel, gen_time = _chunk_streams(seed, chunk_id)
    logs, offs, n_zero, n_cens, total_steps, exited_steps = \
        kernels.run_timefree_batch(cs, initial, exit_cond, n, gen_sel)
    n_ex = len(offs) - 1
    if n_ex > 0:
        _, group_off, lam_tilde, m_per = kernels.partition_flat(logs, offs, epsilon)
        counts = np.diff(group_off)
        draws = gen_time.gamma(counts.astype(float)) / lam_tilde
        bounds = np.concatenate(([0], np.cumsum(m_per)))[:-1]
        times = np.add.reduceat(draws, bounds)
        n_gamma = len(lam_tilde)
    else:
        times = np.empty(0)
        n_gamma = 0
    if n_zero:
        times = np.concatenate((times, np.zeros(n_zero)))
    return EnsembleSample(times, n, n_cens, total_steps, 0, n_gamma,
                          exited_steps)


def _merge(samples: list[EnsembleSample]) -> EnsembleSample:
    return EnsembleSample(
        times=np.concatenate([s.times for s in samples]),
        n_trajectories=sum(s.n_trajectories for s in samples),
        n_censored=sum(s.n_censored for s in samples),
        uniform_draws=sum(s.uniform_draws for s in samples),
        exponential_draws=sum(s.exponential_draws for s in samples),
        gamma_draws=sum(s.gamma_draws for s in samples),
        exited_steps=sum(s.exited_steps for s in samples),
    )


def _run_chunk(args):
    (method, cs, initial, exit_cond, epsilon, n, seed, chunk_id) = args
    if method == "ssa":
        return _ssa_chunk(cs, initial, exit_cond, n, seed, chunk_id)
    return _exit_method_chunk(cs, initial, exit_cond, epsilon, n, seed, chunk_id)


def collect(system: ReactionSystem, initial: SystemState,
            exit_cond: ExitCondition, method: str, n_trajectories: int,
            seed: int, epsilon: float = 0.0, chunk_size: int = DEFAULT_CHUNK,
            workers: int = 1) -> EnsembleSample:
    """Run ``n_trajectories`` trajectories and gather exit times."""
    if method not in ("ssa", "exit"):
        raise ValueError(f"method must be 'ssa' or 'exit', got {method!r}")
    if n_trajectories < 1:
        raise ValueError("n_trajectories must be >= 1")
    cs = kernels.compile_system(system)
    jobs = []
    remaining = n_trajectories
    chunk_id = 0
    while remaining > 0:
        n = min(chunk_size, remaining)
        jobs.append((method, cs, initial, exit_cond, epsilon, n, seed, chunk_id))
        remaining -= n
        chunk_id += 1
    if workers > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as ex:
            samples = list(ex.map(_run_chunk, jobs))
    else:
        samples = [_run_chunk(j) for j in jobs]
    return _merge(samples)


def collect_until_exits(system, initial, exit_cond, method, target_exits,
                        seed, epsilon=0.0, chunk_size=DEFAULT_CHUNK,
                        workers=1, max_chunks=100_000) -> EnsembleSample:
    """Run whole chunks until at least ``target_exits`` trajectories exited."""
    cs = kernels.compile_system(system)
    samples = []
    n_ex = 0
    chunk_id = 0
    while n_ex < target_exits:
        if chunk_id >= max_chunks:
            raise AllCensoredError(
                f"only {n_ex} exits after {chunk_id} chunks of {chunk_size}")
        s = _run_chunk((method, cs, initial, exit_cond, epsilon,
                        chunk_size, seed, chunk_id))
        samples.append(s)
        n_ex += s.n_exited
        chunk_id += 1
    return _merge(samples)


def make_histogram(sample: EnsembleSample,
                   bin_edges: np.ndarray) -> EnsembleHistogram:
    if sample.n_exited == 0:
        raise AllCensoredError("every trajectory was censored; no density")
    densities, _ = np.histogram(sample.times, bins=bin_edges, density=True)
    return EnsembleHistogram(np.asarray(bin_edges, dtype=float), densities,
                             sample.n_exited, sample.n_censored,
                             dict(sample.counters))


def default_edges(samples: list[EnsembleSample], bins: int) -> np.ndarray:
    """Uniform grid over the pooled range of all samples' exit times."""
    lo = min(float(s.times.min()) for s in samples if s.n_exited)
    hi = max(float(s.times.max()) for s in samples if s.n_exited)
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, bins + 1)


def run_ensemble(system, initial, exit_cond, method, n_trajectories, seed,
                 epsilon=0.0, bins=200, bin_edges=None, chunk_size=DEFAULT_CHUNK,
                 workers=1) -> EnsembleHistogram:
    sample = collect(system, initial, exit_cond, method, n_trajectories, seed,
                     epsilon, chunk_size, workers)
    if bin_edges is None:
        if sample.n_exited == 0:
            raise AllCensoredError("every trajectory was censored; no density")
        bin_edges = default_edges([sample], bins)
    return make_histogram(sample, bin_edges)


def pointwise_error(h1: EnsembleHistogram, h2: EnsembleHistogram):
    """(l1, l2, per-bin absolute difference) of two density histograms."""
    if (len(h1.bin_edges) != len(h2.bin_edges)
            or not np.array_equal(h1.bin_edges, h2.bin_edges)):
        raise GridMismatchError("histograms use different bin grids")
    per_bin = np.abs(h1.densities - h2.densities)
    w = h1.bin_widths
    l1 = float((per_bin * w).sum())
    l2 = float(np.sqrt((per_bin ** 2 * w).sum()))
    return l1, l2, per_bin


@dataclass
class ComparisonResult:
    ssa: EnsembleHistogram
    method: EnsembleHistogram
    l1: float
    l2: float
    per_bin: np.ndarray
    rho: float              # gamma draws / SSA exponential draws on exited paths
    rho_total: float        # gamma draws / all SSA exponential draws
    ks_statistic: float
    ks_critical: float

    @property
    def ks_equivalent(self) -> bool:
        return self.ks_statistic < self.ks_critical


def compare_ensembles(system, initial, exit_cond, epsilon, n_trajectories,
                      seed, bins=200, chunk_size=DEFAULT_CHUNK,
                      workers=1) -> ComparisonResult:
    """Paired run: SSA on ``seed``, exit-time method on ``seed + 1``."""
    ssa = collect(system, initial, exit_cond, "ssa", n_trajectories, seed,
                  0.0, chunk_size, workers)
    met = collect(system, initial, exit_cond, "exit", n_trajectories, seed + 1,
                  epsilon, chunk_size, workers)
    if ssa.n_exited == 0 or met.n_exited == 0:
        raise AllCensoredError("an ensemble produced no exits")
    edges = default_edges([ssa, met], bins)
    h1 = make_histogram(ssa, edges)
    h2 = make_histogram(met, edges)
    l1, l2, per_bin = pointwise_error(h1, h2)
    ks = ks_2samp(ssa.times, met.times).statistic
    return ComparisonResult(
        ssa=h1, method=h2, l1=l1, l2=l2, per_bin=per_bin,
        rho=met.gamma_draws / ssa.exited_steps,
        rho_total=met.gamma_draws / ssa.exponential_draws,
        ks_statistic=float(ks),
        ks_critical=ks_critical_value(ssa.n_exited, met.n_exited),
    )


def convergence_study(system, initial, exit_cond, epsilons, target_exits,
                      seed, bins=20, replicates=4, chunk_size=DEFAULT_CHUNK,
                      workers=1) -> list[ConvergenceRecord]:
    """Error of the exit-time method versus a fixed SSA reference.

    All epsilon values share one set of time-free trajectories, and the SSA
    reference realizes its holding times from a shared pool of unit
    exponentials on those same paths (the state dynamics of both backends
    are identical for a fixed selection stream). The Erlang variate of each
    group is realized as the sum of that group's pool exponentials scaled by
    the group rate, which has exactly the Erlang(n_k, lambda_k) law. With
    common random numbers the difference between method and reference
    histograms isolates the grouping error from path-sampling noise.

    l1/l2 are averaged over ``replicates`` independent time pools, all
    compared on one fixed bin grid.
    """
    if any(e < 0 for e in epsilons):
        raise ValueError("epsilons must be nonnegative")
    cs = kernels.compile_system(system)
    logs_parts, offs_parts = [], []
    n_zero = n_cens = total_steps = exited_steps = 0
    n_ex = 0
    chunk_id = 0
    while n_ex < target_exits:
        if chunk_id >= 100_000:
            raise AllCensoredError(
                f"only {n_ex} exits after {chunk_id} chunks of {chunk_size}")
        gen_sel, _ = _chunk_streams(seed, chunk_id)
        logs, offs, nz, nc, ts, es = kernels.run_timefree_batch(
            cs, initial, exit_cond, chunk_size, gen_sel)
        base_off = sum(len(p) for p in logs_parts)
        logs_parts.append(logs)
        offs_parts.append(offs[1:] + base_off if chunk_id else offs)
        n_zero += nz
        n_cens += nc
        total_steps += ts
        exited_steps += es
        n_ex += (len(offs) - 1) + nz
        chunk_id += 1
    logs = np.concatenate(logs_parts)
    offs = np.concatenate(offs_parts)

    # One partition per epsilon, shared by every replicate.
    grouped = {}
    for eps in epsilons:
        perm, group_off, lam_tilde, m_per = kernels.partition_flat(logs, offs, eps)
        grouped[eps] = (perm, group_off, lam_tilde,
                        np.concatenate(([0], np.cumsum(m_per)))[:-1])

    zeros = np.zeros(n_zero)
    edges = None
    errs = {eps: [] for eps in epsilons}
    for rep in range(replicates):
        pool_stream = RandomStream(seed, 1_000_000_007 + rep)
        pool = -np.log1p(-pool_stream.time_rng.random(len(logs)))
        ref_times = np.concatenate(
            (np.add.reduceat(pool / logs, offs[:-1]), zeros))
        method_times = {}
        for eps in epsilons:
            perm, group_off, lam_tilde, traj_bounds = grouped[eps]
            group_sums = np.add.reduceat(pool[perm], group_off[:-1])
            per_group = group_sums / lam_tilde
            method_times[eps] = np.concatenate(
                (np.add.reduceat(per_group, traj_bounds), zeros))
        if edges is None:
            pooled = [ref_times] + list(method_times.values())
            lo = min(t.min() for t in pooled)
            hi = max(t.max() for t in pooled)
            edges = np.linspace(lo, hi, bins + 1)
        h_ref, _ = np.histogram(ref_times, bins=edges, density=True)
        w = np.diff(edges)
        for eps in epsilons:
            h_m, _ = np.histogram(method_times[eps], bins=edges, density=True)
            d = np.abs(h_ref - h_m)
            errs[eps].append(((d * w).sum(), np.sqrt((d ** 2 * w).sum())))

    records = []
    for eps in epsilons:
        n_gamma = len(grouped[eps][2])
        e = np.array(errs[eps])
        records.append(ConvergenceRecord(
            epsilon=eps,
            l1_error=float(e[:, 0].mean()),
            l2_error=float(e[:, 1].mean()),
            rho=n_gamma / exited_steps,
            n_samples=n_ex,
            n_censored=n_cens,
            gamma_draws=n_gamma,
            exponential_draws=exited_steps,
        ))
    return records
