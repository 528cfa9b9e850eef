"""Seeded random variate source with per-call accounting.

Every trajectory owns one :class:`RandomStream`, derived from a master seed
and a stream id. A stream keeps two independent substreams: one for the
reaction-selection uniforms and one for holding-time variates (exponential
and gamma). Keeping the selection substream separate means the state
transitions of a trajectory do not depend on how (or whether) holding times
are drawn.
"""
from __future__ import annotations

import math

import numpy as np


def exponential_inverse(r1: float, rate: float) -> float:
    """Invert the exponential CDF: -ln(r1) / rate."""
    if rate <= 0:
        raise ValueError(f"rate must be positive, got {rate}")
    return -math.log(r1) / rate


def select_index(r2: float, weights) -> int:
    """Smallest j whose cumulative weight reaches r2 * total."""
    total = float(np.sum(weights))
    if total <= 0:
        raise ValueError("all weights are zero; caller must detect absorption")
    target = r2 * total
    acc = 0.0
    for j, w in enumerate(weights):
        acc += w
        if target <= acc:
            return j
    return len(weights) - 1  # guard against rounding at target == total


class RandomStream:
    """Deterministic (seed, stream_id)-keyed variate source."""

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = seed
        self.stream_id = stream_id
        root = np.random.SeedSequence(entropy=seed, spawn_key=(stream_id,))
        sel_ss, time_ss = root.spawn(2)
        self.selection_rng = np.random.Generator(np.random.PCG64(sel_ss))
        self.time_rng = np.random.Generator(np.random.PCG64(time_ss))
        self.n_uniform = 0
        self.n_exponential = 0
        self.n_gamma = 0

    def uniform(self) -> float:
        """Selection-substream uniform in [0, 1)."""
        self.n_uniform += 1
        return self.selection_rng.random()

    def exponential(self, rate: float) -> float:
        if rate <= 0:
            raise ValueError(f"rate must be positive, got {rate}")
        self.n_exponential += 1
        # 1 - u lies in (0, 1], so the log argument never vanishes
        return -math.log1p(-self.time_rng.random()) / rate

    def discrete_index(self, weights) -> int:
        return select_index(self.uniform(), weights)

    def gamma(self, scale: float, shape: int) -> float:
        """Erlang(shape, rate=1/scale) variate, counted as a single draw."""
        if scale <= 0:
            raise ValueError(f"scale must be positive, got {scale}")
        if shape < 1 or int(shape) != shape:
            raise ValueError(f"shape must be a positive integer, got {shape}")
        self.n_gamma += 1
        return self.time_rng.gamma(float(shape)) * scale

    @property
    def counters(self) -> dict[str, int]:
        return {"uniform": self.n_uniform,
                "exponential": self.n_exponential,
                "gamma": self.n_gamma}
