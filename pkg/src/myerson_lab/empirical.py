"""Empirical quantile function from samples and its confidence curves.

The quantile estimator maps x to the ceil(x*m)-th order statistic
(clamped to the first one near zero, to 0 below the domain and to the
bound H above it).  Shifting its argument by the uniform-deviation
radius epsilon produces a pessimistic and an optimistic revenue curve
that bracket the true one with high probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import PiecewiseLinearCurve, curve_from_price_runs

__all__ = ["EmpiricalQuantile", "dkw_epsilon", "eval_quantile", "r_min_curve", "r_max_curve"]


@dataclass(frozen=True)
class EmpiricalQuantile:
    """Sorted sample values with a known support bound."""

    sorted_samples: tuple[float, ...]
    h_max: float

    def __post_init__(self):
        if len(self.sorted_samples) < 1:
            raise ValueError("need at least one sample")
        prev = -math.inf
        for x in self.sorted_samples:
            if not 0.0 <= x <= self.h_max:
                raise ValueError(f"sample {x} outside [0, {self.h_max}]")
            if x < prev:
                raise ValueError("samples must be sorted ascending")
            prev = x

    @staticmethod
    def from_samples(values, h_max: float) -> "EmpiricalQuantile":
        arr = np.sort(np.asarray(values, dtype=float))
        return EmpiricalQuantile(tuple(float(x) for x in arr), float(h_max))

    @property
    def m(self) -> int:
        return len(self.sorted_samples)


def dkw_epsilon(m: int, delta: float) -> float:
    """Uniform CDF deviation radius sqrt(ln(2/delta) / (2m))."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return math.sqrt(math.log(2.0 / delta) / (2.0 * m))


def eval_quantile(eq: EmpiricalQuantile, x: float) -> float:
    """Order-statistic quantile estimate at x, with boundary clamps."""
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return eq.h_max
    k = max(1, math.ceil(x * eq.m))
    return eq.sorted_samples[k - 1]


def _merged_order_stat_runs(eq: EmpiricalQuantile) -> list[tuple[int, int, float]]:
    """(i_lo, i_hi, value) blocks of equal consecutive order statistics."""
    runs: list[tuple[int, int, float]] = []
    xs = eq.sorted_samples
    start = 0
    for i in range(1, len(xs) + 1):
        if i == len(xs) or xs[i] != xs[start]:
            runs.append((start + 1, i, xs[start]))  # 1-based order-stat indices
            start = i
    return runs


def min_price_runs(eq: EmpiricalQuantile, epsilon: float) -> list[tuple[float, float, float]]:
    """Constant-price runs of q -> quantile_estimate(1 - q - epsilon).

    The i-th order statistic prices quantiles in
    [1 - eps - i/m, 1 - eps - (i-1)/m); the estimate clamps to 0 once
    1 - q - eps goes negative.
    """
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must lie in [0, 1)")
    m = eq.m
    runs: list[tuple[float, float, float]] = []
    for i_lo, i_hi, value in reversed(_merged_order_stat_runs(eq)):
        q0 = 1.0 - epsilon - i_hi / m
        q1 = 1.0 - epsilon - (i_lo - 1) / m
        q0, q1 = max(0.0, q0), min(1.0, max(0.0, q1))
        if q1 > q0:
            runs.append((q0, q1, value))
    zero_from = 1.0 - epsilon
    if zero_from < 1.0:
        runs.append((max(0.0, zero_from), 1.0, 0.0))
    if not runs:
        runs.append((0.0, 1.0, 0.0))
    return runs


def max_price_runs(eq: EmpiricalQuantile, epsilon: float) -> list[tuple[float, float, float]]:
    """Constant-price runs of q -> quantile_estimate(1 - q + epsilon + 1/m).

    For q below epsilon + 1/m the argument exceeds one and the estimate
    clamps to h_max.
    """
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must lie in [0, 1)")
    m = eq.m
    c = epsilon + 1.0 / m
    runs: list[tuple[float, float, float]] = []
    if c > 0.0:
        runs.append((0.0, min(1.0, c), eq.h_max))
    for i_lo, i_hi, value in reversed(_merged_order_stat_runs(eq)):
        # written as c + k/m so the block boundaries share exact floats
        q0 = c + (m - i_hi) / m
        q1 = c + (m - (i_lo - 1)) / m
        q0, q1 = max(0.0, min(1.0, q0)), min(1.0, q1)
        if q1 > q0:
            runs.append((q0, q1, value))
    return runs


def r_min_curve(eq: EmpiricalQuantile, epsilon: float) -> PiecewiseLinearCurve:
    """Pessimistic revenue curve q * quantile_estimate(1 - q - epsilon)."""
    return curve_from_price_runs(min_price_runs(eq, epsilon))


def r_max_curve(eq: EmpiricalQuantile, epsilon: float) -> PiecewiseLinearCurve:
    """Optimistic revenue curve q * quantile_estimate(1 - q + epsilon + 1/m)."""
    return curve_from_price_runs(max_price_runs(eq, epsilon))
