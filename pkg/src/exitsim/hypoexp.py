"""Closed-form law of a sum of independent exponentials.

For distinct rates lambda_1..lambda_n the density of the sum is a signed
mixture of the component exponentials,

    pdf(t) = sum_i l_i * lambda_i * exp(-lambda_i t),
    l_i    = prod_{j != i} lambda_j / (lambda_j - lambda_i),

with CDF sum_i l_i (1 - exp(-lambda_i t)) and Laplace transform
prod_i lambda_i / (lambda_i + s). Equal rates give the Erlang special case.
This module is the analytic reference the samplers are validated against;
it also provides a slow convolution-based density for cross-checking the
partial-fraction coefficients themselves.

The mixture form is numerically hostile: the l_i alternate in sign and blow
up as rates approach each other, so construction rejects near-degenerate or
long rate vectors instead of returning garbage.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.integrate import quad

MAX_RATES = 15
MIN_RELATIVE_GAP = 1e-6


def mixture_coefficients(rates: np.ndarray) -> np.ndarray:
    """Partial-fraction weights l_i; they always sum to 1."""
    lam = np.asarray(rates, dtype=float)
    coeffs = np.empty(len(lam))
    for i in range(len(lam)):
        others = np.delete(lam, i)
        coeffs[i] = np.prod(others / (others - lam[i]))
    return coeffs


@dataclass(frozen=True)
class HypoexpDistribution:
    """Sum of independent Exponential(rate_i) variables, distinct rates."""
    rates: np.ndarray
    coefficients: np.ndarray

    @classmethod
    def from_rates(cls, rates) -> "HypoexpDistribution":
        lam = np.asarray(rates, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("rates must be a nonempty 1-d sequence")
        if np.any(lam <= 0):
            raise ValueError("rates must be positive")
        if lam.size > MAX_RATES:
            raise ValueError(
                f"{lam.size} rates: the partial-fraction form is "
                f"ill-conditioned beyond {MAX_RATES} terms")
        srt = np.sort(lam)
        if srt.size > 1:
            rel_gap = np.diff(srt) / srt[1:]
            if rel_gap.min() < MIN_RELATIVE_GAP:
                raise ValueError(
                    "rates too close for the partial-fraction form "
                    f"(min relative gap {rel_gap.min():.2e} < {MIN_RELATIVE_GAP}); "
                    "use the Erlang form for repeated rates")
        return cls(rates=lam, coefficients=mixture_coefficients(lam))

    @property
    def mean(self) -> float:
        return float((1.0 / self.rates).sum())

    @property
    def variance(self) -> float:
        return float((1.0 / self.rates ** 2).sum())

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        terms = (self.coefficients * self.rates
                 * np.exp(-t[..., None] * self.rates))
        out = terms.sum(axis=-1)
        return out if out.ndim else float(out)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        terms = self.coefficients * (1.0 - np.exp(-t[..., None] * self.rates))
        out = np.clip(terms.sum(axis=-1), 0.0, 1.0)
        return out if out.ndim else float(out)

    def inverse_cdf(self, p: float, tol: float = 1e-10) -> float:
        """Quantile by bisection on the monotone CDF; |cdf(result) - p| <= tol.

        Bisection over a derivative method: the CDF bracket can only shrink,
        so convergence is guaranteed.
        """
        if not 0.0 <= p < 1.0:
            raise ValueError(f"p must lie in [0, 1), got {p}")
        if p == 0.0:
            return 0.0
        lo, hi = 0.0, self.mean
        while self.cdf(hi) < p:
            hi *= 2.0
        for _ in range(500):
            mid = 0.5 * (lo + hi)
            c = self.cdf(mid)
            if abs(c - p) <= 0.01 * tol or hi - lo <= 1e-15 * max(1.0, hi):
                return mid
            if c < p:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def laplace(self, s: float) -> float:
        """prod_i lambda_i / (lambda_i + s)."""
        return float(np.prod(self.rates / (self.rates + s)))


def hypoexp_pdf(t, rates):
    return HypoexpDistribution.from_rates(rates).pdf(t)


def hypoexp_cdf(t, rates):
    return HypoexpDistribution.from_rates(rates).cdf(t)


def hypoexp_inverse_cdf(p, rates, tol: float = 1e-10):
    return HypoexpDistribution.from_rates(rates).inverse_cdf(p, tol)


@dataclass(frozen=True)
class ErlangDistribution:
    """Sum of ``shape`` iid Exponential(rate) variables."""
    shape: int
    rate: float

    def __post_init__(self):
        if self.shape < 1 or int(self.shape) != self.shape:
            raise ValueError(f"shape must be a positive integer, got {self.shape}")
        if self.rate <= 0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    @property
    def mean(self) -> float:
        return self.shape / self.rate

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        n, lam = self.shape, self.rate
        out = lam ** n * t ** (n - 1) * np.exp(-lam * t) / factorial(n - 1)
        return out if out.ndim else float(out)

    def laplace(self, s: float) -> float:
        return float((self.rate / (self.rate + s)) ** self.shape)


def erlang_pdf(t, shape: int, rate: float):
    return ErlangDistribution(shape, rate).pdf(t)


def laplace_of_pdf(pdf, s: float, upper: float = np.inf) -> float:
    """Numeric Laplace transform of a density, integral of e^{-st} pdf(t)."""
    val, _ = quad(lambda t: np.exp(-s * t) * pdf(t), 0.0, upper,
                  epsrel=1e-10, limit=200)
    return val


def approximation_gap(lam: float, eps: float, s: float) -> float:
    """How far a product of two perturbed transforms sits from the squared
    unperturbed one: |f(lam+eps) f(lam-eps) - f(lam)^2| with f = x/(x+s).
    Shrinks quadratically in eps."""
    if not 0 <= eps < lam:
        raise ValueError(f"eps must lie in [0, lam), got {eps}")

    def f(x):
        return x / (x + s)

    return abs(f(lam + eps) * f(lam - eps) - f(lam) ** 2)


def pdf_by_numerical_convolution(rates, t_max: float, n_grid: int = 4001):
    """Density of the sum by iterated trapezoid convolution on a uniform grid.

    Slow and O(h^2) accurate; intended only as an independent cross-check of
    the closed forms for up to 6 rates.
    """
    lam = np.asarray(rates, dtype=float)
    if lam.size > 6:
        raise ValueError("convolution cross-check supports at most 6 rates")
    if np.any(lam <= 0):
        raise ValueError("rates must be positive")
    t = np.linspace(0.0, t_max, n_grid)
    h = t[1] - t[0]
    dens = lam[0] * np.exp(-lam[0] * t)
    for rate in lam[1:]:
        comp = rate * np.exp(-rate * t)
        full = np.convolve(dens, comp)[:n_grid] * h
        # trapezoid end-point correction for the two boundary samples
        full -= 0.5 * h * (dens[0] * comp + dens * comp[0])
        dens = np.clip(full, 0.0, None)
    return t, dens
