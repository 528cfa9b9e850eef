"""Relative-gap grouping of a propensity log and the gamma-sum time sampler.

The log of total propensities recorded by a time-free trajectory is sorted
in descending order and split into prefix groups: starting from the current
largest element L, every value >= L - eps*L joins the group. Each group is
summarized by the harmonic mean of its members and its size, so the expected
reconstructed time Sum_k n_k / lam_k equals Sum_i 1/lambda_i exactly.
The exit time is then sampled as a sum of one Erlang variate per group.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .streams import RandomStream


@dataclass(frozen=True)
class GroupedPropensities:
    lambda_tilde: np.ndarray  # harmonic-mean rate per group, descending
    counts: np.ndarray        # group sizes, same length
    epsilon: float

    def __len__(self) -> int:
        return len(self.lambda_tilde)

    @property
    def total(self) -> int:
        return int(self.counts.sum()) if len(self.counts) else 0

    @property
    def expected_time(self) -> float:
        return float((self.counts / self.lambda_tilde).sum()) if len(self) else 0.0


def partition(log: np.ndarray, epsilon: float) -> GroupedPropensities:
    """Group a propensity log with relative tolerance ``epsilon``.

    epsilon = 0 is valid and groups only exact ties.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    lam = np.sort(np.asarray(log, dtype=float))[::-1]
    if lam.size and lam[-1] <= 0:
        raise ValueError("propensity log entries must be positive")
    lts: list[float] = []
    counts: list[int] = []
    n = lam.size
    i = 0
    while i < n:
        cutoff = lam[i] * (1.0 - epsilon)
        j = i + 1
        inv_sum = 1.0 / lam[i]
        while j < n and lam[j] >= cutoff:
            inv_sum += 1.0 / lam[j]
            j += 1
        counts.append(j - i)
        lts.append((j - i) / inv_sum)
        i = j
    return GroupedPropensities(np.array(lts), np.array(counts, dtype=np.int64),
                               epsilon)


def sample_exit_time(groups: GroupedPropensities, stream: RandomStream) -> float:
    """One Erlang draw per group; empty grouping means a zero-step trajectory."""
    t = 0.0
    for lt, n in zip(groups.lambda_tilde, groups.counts):
        t += stream.gamma(scale=1.0 / lt, shape=int(n))
    return t


def rho(gamma_draws: int, exponential_draws: int) -> float:
    """Ratio of gamma variates used by the exit-time method to exponential
    variates used by the SSA for the same comparison."""
    if exponential_draws <= 0:
        raise ValueError("rho is undefined without exponential draws")
    return gamma_draws / exponential_draws
