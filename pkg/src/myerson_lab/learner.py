"""Learning an ironing plan from samples, plus sample-size calculators.

The pipeline: build the pessimistic revenue curve from the empirical
quantile function shifted down by the deviation radius, take its concave
envelope, read the envelope-vs-curve gaps as quantile ironing intervals,
map those (and the curve's argmax, the reserve quantile) back to value
space, and canonicalize.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Sequence

from .curves import (
    argmax_quantile,
    concave_envelope,
    difference_intervals,
    price_left_of_runs,
)
from .empirical import EmpiricalQuantile, dkw_epsilon, min_price_runs

__all__ = [
    "IroningPlan",
    "compute_auction",
    "plan_from_price_runs",
    "required_samples_iid",
    "loss_bound",
]


@dataclass(frozen=True)
class IroningPlan:
    """Disjoint half-open value intervals [lo, hi) plus a reserve price.

    Bids below the reserve are rejected; bids inside one interval are
    ranked as identical.  Canonical plans never keep an interval that
    lies entirely below the reserve, and the reserve never falls
    strictly inside an interval.
    """

    intervals: tuple[tuple[float, float], ...]
    reserve: float

    def __post_init__(self):
        if self.reserve < 0.0 or not math.isfinite(self.reserve):
            raise ValueError("reserve must be finite and nonnegative")
        prev_hi = -math.inf
        for lo, hi in self.intervals:
            if not (0.0 <= lo < hi) or not math.isfinite(hi):
                raise ValueError(f"bad value interval [{lo}, {hi})")
            if lo < prev_hi:
                raise ValueError("intervals must be sorted and disjoint")
            if hi <= self.reserve:
                raise ValueError("interval entirely below the reserve must be pruned")
            if lo < self.reserve < hi:
                raise ValueError("reserve must not fall strictly inside an interval")
            prev_hi = hi

    @staticmethod
    def empty() -> "IroningPlan":
        return IroningPlan(intervals=(), reserve=0.0)

    @staticmethod
    def canonical(intervals: Sequence[tuple[float, float]], reserve: float) -> "IroningPlan":
        """Sort, merge touching intervals, clip at the reserve, prune."""
        reserve = max(0.0, float(reserve))
        cleaned: list[tuple[float, float]] = []
        for lo, hi in sorted((float(lo), float(hi)) for lo, hi in intervals):
            lo = max(lo, reserve)  # below-reserve bids are rejected anyway
            if hi <= lo:
                continue
            if cleaned and lo <= cleaned[-1][1]:
                cleaned[-1] = (cleaned[-1][0], max(cleaned[-1][1], hi))
            else:
                cleaned.append((lo, hi))
        return IroningPlan(intervals=tuple(cleaned), reserve=reserve)

    @staticmethod
    def from_json(text: str) -> "IroningPlan":
        spec = json.loads(text)
        return IroningPlan.canonical(
            [(iv["lo"], iv["hi"]) for iv in spec.get("intervals", [])], spec["reserve"]
        )

    def to_json(self) -> str:
        return json.dumps(
            {"reserve": self.reserve, "intervals": [{"lo": lo, "hi": hi} for lo, hi in self.intervals]}
        )

    def short_hash(self) -> str:
        return hashlib.sha1(self.to_json().encode()).hexdigest()[:12]


def plan_from_price_runs(runs, h_max: float) -> IroningPlan:
    """Ironing plan read off a price-run curve q -> q * price(q).

    Quantile ironing intervals are the gaps between the curve and its
    concave envelope; endpoints (and the argmax reserve quantile) map to
    value space through the price level just below each quantile.
    """
    from .curves import curve_from_price_runs

    curve = curve_from_price_runs(runs)
    hull = concave_envelope(curve)
    gaps = difference_intervals(curve, hull, tol=1e-9 * h_max)
    r_q = argmax_quantile(curve)
    reserve = runs[0][2] if r_q == 0.0 else price_left_of_runs(runs, r_q)
    value_intervals = []
    for a, b in gaps:
        hi = runs[0][2] if a == 0.0 else price_left_of_runs(runs, a)
        lo = price_left_of_runs(runs, b)
        if lo < hi:
            value_intervals.append((lo, hi))
    return IroningPlan.canonical(value_intervals, reserve)


def compute_auction(samples, delta: float, h_max: float) -> IroningPlan:
    """Learn ironing intervals and a reserve price from samples.

    Builds the pessimistic revenue curve from the deviation-shifted
    empirical quantile function and irons where it fails to be concave.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    eq = EmpiricalQuantile.from_samples(samples, h_max)
    eps = dkw_epsilon(eq.m, delta)
    if eps >= 1.0:
        # the shifted estimator clamps to price 0 everywhere: no usable
        # confidence yet, so run the plain welfare auction
        return IroningPlan.empty()
    return plan_from_price_runs(min_price_runs(eq, eps), h_max)


def required_samples_iid(eps_target: float, delta: float, n: int, gamma: float, h_max: float) -> int:
    """Samples needed for a (1 - eps_target) multiplicative guarantee.

    Solves eps = delta + 3 * sqrt(ln(2/delta) / (2m)) * n * gamma * H
    for m and rounds up.
    """
    if not 0.0 < delta < eps_target < 1.0:
        raise ValueError("need 0 < delta < eps_target < 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    if gamma < 1.0:
        raise ValueError("gamma must be >= 1")
    raw = (math.log(2.0 / delta) / 2.0) * (3.0 * n * gamma * h_max / (eps_target - delta)) ** 2
    return math.ceil(raw)


def loss_bound(m: int, delta: float, n: int, h_max: float) -> float:
    """High-probability additive revenue-loss bound 3 * n * H * epsilon."""
    return 3.0 * n * h_max * dkw_epsilon(m, delta)
