"""Ground-truth computations against known discrete distributions.

Three independent revenue oracles back every experiment: exhaustive
profile enumeration (exact, any environment), closed-form quadrature of
the induced revenue curve against the k-unit interim allocations
(slot-type environments), and seeded Monte Carlo.  Enumeration and
quadrature must agree to float precision; that cross-check is the main
correctness tripwire of the whole artifact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

from .curves import PiecewiseLinearCurve, induce_curve
from .distributions import (
    ValueDistribution,
    _discrete_price_runs,
    exact_revenue_curve,
    sample,
    tail_probability,
)
from .engine import interim_payments
from .environments import (
    Environment,
    interim_allocation_integral_kunit,
    interim_allocation_kunit,
)
from .learner import IroningPlan, plan_from_price_runs

__all__ = [
    "GuardError",
    "RevenueReport",
    "optimal_plan",
    "induced_true_curve",
    "expected_revenue_enum",
    "expected_revenue_quadrature",
    "expected_revenue_mc",
    "additive_loss",
]

_ENUM_GUARD = 10_000_000


class GuardError(RuntimeError):
    """An instance exceeds a desk-scale resource guard."""


@dataclass(frozen=True)
class RevenueReport:
    expected_revenue: float
    method: str
    stderr: float = 0.0
    trials: int = 0


def _require_discrete(dist: ValueDistribution, what: str) -> None:
    if not dist.is_discrete:
        raise ValueError(f"{what} requires a discrete distribution")


@lru_cache(maxsize=256)
def optimal_plan(dist: ValueDistribution) -> IroningPlan:
    """Exact revenue-optimal plan: iron the envelope gaps of the true
    revenue curve, reserve at its argmax quantile."""
    _require_discrete(dist, "optimal_plan")
    return plan_from_price_runs(_discrete_price_runs(dist), dist.h_max)


def induced_true_curve(dist: ValueDistribution, plan: IroningPlan) -> PiecewiseLinearCurve:
    """True revenue curve after applying a plan's ironing and reserve.

    Value intervals map to quantile intervals through the sale
    probability; the curve is constant above the reserve's sale
    probability.
    """
    _require_discrete(dist, "induced_true_curve")
    curve = exact_revenue_curve(dist)
    q_ints = []
    for lo, hi in plan.intervals:
        a = tail_probability(dist, hi)
        b = tail_probability(dist, lo)
        if a < b:
            q_ints.append((a, b))
    q_ints.sort()
    reserve_q = tail_probability(dist, plan.reserve)
    return induce_curve(curve, q_ints, reserve_q)


def _profile_payment(env: Environment, plan: IroningPlan, bids: list[float]) -> float:
    return math.fsum(interim_payments(env, plan, bids))


@lru_cache(maxsize=65536)
def expected_revenue_enum(dist: ValueDistribution, env: Environment, plan: IroningPlan) -> RevenueReport:
    """Exact expected revenue by summing over all valuation profiles."""
    _require_discrete(dist, "expected_revenue_enum")
    s, n = len(dist.atoms), env.n
    if s**n > _ENUM_GUARD:
        raise GuardError(f"{s}^{n} profiles exceed the enumeration guard")
    vals = [v for v, _ in dist.atoms]
    probs = [p for _, p in dist.atoms]
    terms = []
    if env.kind == "matroid":
        # bidders are not exchangeable under a matroid; enumerate fully
        for combo in itertools.product(range(s), repeat=n):
            weight = math.prod(probs[i] for i in combo)
            if weight == 0.0:
                continue
            terms.append(weight * _profile_payment(env, plan, [vals[i] for i in combo]))
    else:
        fact_n = math.factorial(n)
        for combo in itertools.combinations_with_replacement(range(s), n):
            counts: dict[int, int] = {}
            for i in combo:
                counts[i] = counts.get(i, 0) + 1
            weight = fact_n
            for i, c in counts.items():
                weight = weight // math.factorial(c)
            weight *= math.prod(probs[i] ** c for i, c in counts.items())
            if weight == 0.0:
                continue
            terms.append(weight * _profile_payment(env, plan, [vals[i] for i in combo]))
    return RevenueReport(expected_revenue=math.fsum(terms), method="enumeration")


def _per_bidder_quadrature(curve: PiecewiseLinearCurve, k: int, n: int, reserve: float, v_min: float) -> float:
    """Exact integral of the induced curve against -y' for one k-unit bidder.

    Integration by parts per linear segment; the boundary term and the
    below-support floor only matter when the worst-ranked bidder is
    still served (k = n).
    """
    terms = []
    for q0, v0, q1, v1 in curve.segments():
        slope = (v1 - v0) / (q1 - q0)
        y0 = interim_allocation_kunit(q0, k, n)
        y1 = interim_allocation_kunit(q1, k, n)
        big_y0 = interim_allocation_integral_kunit(q0, k, n)
        big_y1 = interim_allocation_integral_kunit(q1, k, n)
        terms.append(v0 * y0 - v1 * y1 + slope * (big_y1 - big_y0))
    total = math.fsum(terms)
    if k == n:
        total += curve.evaluate(1.0)
        total -= max(0.0, v_min - max(reserve, 0.0))
    return total


def _check_plan_alignment(dist: ValueDistribution, plan: IroningPlan) -> None:
    """Quadrature reads plans through the revenue curve, which only sees
    sale probabilities; endpoints strictly between atoms change engine
    thresholds invisibly to the curve, so such plans are refused."""
    vals = [v for v, _ in dist.atoms]
    v_min, v_max = vals[0], vals[-1]
    r = plan.reserve
    if v_min < r <= v_max and r not in vals:
        raise ValueError(f"reserve {r} lies strictly between support atoms")
    for lo, hi in plan.intervals:
        atoms_in = [a for a in vals if lo <= a < hi]
        if not atoms_in:
            continue
        if lo != atoms_in[0]:
            raise ValueError(f"interval [{lo}, {hi}) starts below the atoms it irons")
        if hi <= v_max and hi not in vals:
            raise ValueError(f"interval [{lo}, {hi}) ends strictly between support atoms")


def expected_revenue_quadrature(
    dist: ValueDistribution, env: Environment, plan: IroningPlan
) -> RevenueReport:
    """Expected revenue as a revenue-curve integral (no profile sums).

    Position environments decompose into the marginal-weight mixture of
    k-unit auctions.  Exact for plans whose interval endpoints and
    reserve lie on the support (or at/below its minimum, or above its
    maximum), which holds for every plan produced by the learner or the
    exact-plan oracle; other plans are refused.  Matroid environments
    are refused: their per-bidder allocation curves have no shared
    closed form.
    """
    _require_discrete(dist, "expected_revenue_quadrature")
    if env.kind == "matroid":
        raise ValueError("quadrature does not support matroid environments")
    for lo, hi in plan.intervals:
        if lo < plan.reserve < hi:
            raise ValueError("reserve inside an ironing interval; canonicalize the plan")
    _check_plan_alignment(dist, plan)
    curve = induced_true_curve(dist, plan)
    v_min = dist.support_min()
    slots = list(env.slot_weights()) + [0.0]
    n = env.n
    total = math.fsum(
        (slots[j - 1] - slots[j]) * n * _per_bidder_quadrature(curve, j, n, plan.reserve, v_min)
        for j in range(1, n + 1)
        if slots[j - 1] != slots[j]
    )
    return RevenueReport(expected_revenue=total, method="quadrature")


def expected_revenue_mc(
    dist: ValueDistribution, env: Environment, plan: IroningPlan, trials: int, seed
) -> RevenueReport:
    """Monte Carlo expected revenue over seeded i.i.d. profiles."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    draws = sample(dist, trials * env.n, seed).reshape(trials, env.n)
    totals = [_profile_payment(env, plan, list(row)) for row in draws]
    mean = math.fsum(totals) / trials
    if trials > 1:
        var = math.fsum((t - mean) ** 2 for t in totals) / (trials - 1)
        stderr = math.sqrt(var / trials)
    else:
        stderr = 0.0
    return RevenueReport(expected_revenue=mean, method="monte_carlo", stderr=stderr, trials=trials)


def additive_loss(dist: ValueDistribution, env: Environment, learned_plan: IroningPlan) -> float:
    """Optimal expected revenue minus the plan's, by enumeration.

    Tiny negatives from tie-convention float noise clamp to zero;
    anything below -1e-9 means an oracle bug and raises.
    """
    _require_discrete(dist, "additive_loss")
    opt = expected_revenue_enum(dist, env, optimal_plan(dist)).expected_revenue
    alg = expected_revenue_enum(dist, env, learned_plan).expected_revenue
    loss = opt - alg
    if loss < -1e-9:
        raise RuntimeError(f"learned plan beats the optimal oracle by {-loss}; oracle bug")
    return max(loss, 0.0)
