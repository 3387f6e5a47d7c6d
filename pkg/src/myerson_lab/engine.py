"""Executing an ironing-plan auction on a bid profile.

Bids below the reserve are rejected; bids inside one ironing interval
share a rank key.  Allocation maximizes welfare over the keys, splitting
exact ties symmetrically (fractional shares of the contested capacity).
Payments follow the standard threshold integral of the bidder's
single-bid allocation curve, which is piecewise constant with
breakpoints only at the reserve, interval endpoints, and the other
bidders' keys, so the integral is computed exactly piece by piece.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .environments import Environment, is_independent
from .learner import IroningPlan

__all__ = ["AuctionOutcome", "ironed_key", "allocate", "myerson_payment", "run_auction"]

_EXACT_TIE_GROUP_LIMIT = 8
_MC_PERMUTATIONS = 10_000


@dataclass(frozen=True)
class AuctionOutcome:
    """Interim (expected) and realized results of one auction run."""

    interim_alloc: tuple[float, ...]
    interim_payment: tuple[float, ...]
    realized_alloc: tuple[float, ...]
    realized_payment: tuple[float, ...]

    def total_interim_payment(self) -> float:
        return math.fsum(self.interim_payment)


def validate_bids(bids: Sequence[float], h_max: float | None = None) -> None:
    for b in bids:
        if not math.isfinite(b) or b < 0.0:
            raise ValueError(f"bid {b} must be finite and nonnegative")
        if h_max is not None and b > h_max:
            raise ValueError(f"bid {b} exceeds h_max {h_max}")


def ironed_key(bid: float, plan: IroningPlan) -> float | None:
    """Rank key of a bid: None if rejected, the interval's lower
    endpoint if ironed, the bid itself otherwise."""
    if bid < plan.reserve:
        return None
    for lo, hi in plan.intervals:
        if lo <= bid < hi:
            return lo
    return bid


def _tie_groups(keys: Sequence[float | None]) -> list[list[int]]:
    """Accepted bidders grouped by equal key, highest key first."""
    by_key: dict[float, list[int]] = {}
    for i, k in enumerate(keys):
        if k is not None:
            by_key.setdefault(k, []).append(i)
    return [by_key[k] for k in sorted(by_key, reverse=True)]


def _allocate_ranked(env: Environment, groups: list[list[int]]) -> list[float]:
    """Fractional allocation for slot-type environments."""
    slots = env.slot_weights()
    alloc = [0.0] * env.n
    pos = 0
    for group in groups:
        t = len(group)
        share = sum(slots[pos : pos + t]) / t
        for i in group:
            alloc[i] = share
        pos += t
        if pos >= env.n:
            break
    return alloc


def _matroid_group_outcomes(
    spec, selected: frozenset[int], group: tuple[int, ...]
) -> list[tuple[dict[int, float], frozenset[int], float]]:
    """Average greedy additions over every ordering of one tie group.

    Returns (per-bidder win probability, next selected set, probability)
    branches; orderings with identical outcomes collapse together.
    """
    branches: dict[frozenset[int], int] = {}
    perms = list(itertools.permutations(group))
    for perm in perms:
        cur = set(selected)
        won = []
        for e in perm:
            if is_independent(spec, cur | {e}):
                cur.add(e)
                won.append(e)
        key = frozenset(cur)
        branches[key] = branches.get(key, 0) + 1
    total = len(perms)
    out = []
    for state, count in branches.items():
        wins = {e: 1.0 for e in state - selected}
        out.append((wins, state, count / total))
    return out


def _allocate_matroid(env: Environment, groups: list[list[int]]) -> list[float]:
    """Expected matroid allocation over uniform orderings of tie groups.

    Exact (dynamic program over selected-set states) while every tie
    group has at most eight members; larger groups fall back to seeded
    Monte Carlo over joint orderings.
    """
    spec = env.matroid
    if any(len(g) > _EXACT_TIE_GROUP_LIMIT for g in groups):
        return _allocate_matroid_mc(env, groups)
    alloc = [0.0] * env.n
    states: dict[frozenset[int], float] = {frozenset(): 1.0}
    for group in groups:
        nxt: dict[frozenset[int], float] = {}
        for selected, prob in states.items():
            for wins, state, branch_p in _matroid_group_outcomes(spec, selected, tuple(group)):
                p = prob * branch_p
                for e in wins:
                    alloc[e] += p
                nxt[state] = nxt.get(state, 0.0) + p
        states = nxt
    return alloc


def _allocate_matroid_mc(env: Environment, groups: list[list[int]]) -> list[float]:
    spec = env.matroid
    rng = np.random.default_rng(0x5EED)
    alloc = np.zeros(env.n)
    for _ in range(_MC_PERMUTATIONS):
        cur: set[int] = set()
        for group in groups:
            for e in rng.permutation(group):
                e = int(e)
                if is_independent(spec, cur | {e}):
                    cur.add(e)
                    alloc[e] += 1.0
    return list(alloc / _MC_PERMUTATIONS)


def allocate(env: Environment, plan: IroningPlan, bids: Sequence[float]) -> list[float]:
    """Per-bidder expected allocation under symmetric tie splitting."""
    if len(bids) != env.n:
        raise ValueError(f"expected {env.n} bids, got {len(bids)}")
    keys = [ironed_key(b, plan) for b in bids]
    groups = _tie_groups(keys)
    if env.kind == "matroid":
        return _allocate_matroid(env, groups)
    return _allocate_ranked(env, groups)


def _payment_breakpoints(plan: IroningPlan, other_keys: list[float], up_to: float) -> list[float]:
    pts = {0.0, up_to, plan.reserve}
    for lo, hi in plan.intervals:
        pts.add(lo)
        pts.add(hi)
    pts.update(other_keys)
    return sorted(p for p in pts if 0.0 <= p <= up_to)


def _payment_given_alloc(
    env: Environment, plan: IroningPlan, bids: Sequence[float], bidder: int, alloc_at_bid: float
) -> float:
    if alloc_at_bid == 0.0:
        return 0.0
    b_i = bids[bidder]
    others = [ironed_key(b, plan) for j, b in enumerate(bids) if j != bidder]
    pts = _payment_breakpoints(plan, [k for k in others if k is not None], b_i)
    probe = list(bids)
    integral = 0.0
    for z0, z1 in zip(pts, pts[1:]):
        if z1 <= z0:
            continue
        probe[bidder] = 0.5 * (z0 + z1)
        x_mid = allocate(env, plan, probe)[bidder]
        integral += x_mid * (z1 - z0)
    return b_i * alloc_at_bid - integral


def myerson_payment(env: Environment, plan: IroningPlan, bids: Sequence[float], bidder: int) -> float:
    """Threshold-integral payment for one bidder, computed exactly.

    p = b * x(b) - integral of x(z) dz over [0, b], where x(z) is the
    bidder's allocation when bidding z against the fixed others; x is
    piecewise constant, so each piece is evaluated at its midpoint.
    """
    alloc_at_bid = allocate(env, plan, bids)[bidder]
    return _payment_given_alloc(env, plan, bids, bidder, alloc_at_bid)


def interim_payments(env: Environment, plan: IroningPlan, bids: Sequence[float]) -> list[float]:
    """All bidders' payments, sharing one allocation pass."""
    alloc = allocate(env, plan, bids)
    return [_payment_given_alloc(env, plan, bids, i, alloc[i]) for i in range(env.n)]


def _realize_ranked(env: Environment, groups: list[list[int]], rng) -> list[float]:
    slots = env.slot_weights()
    realized = [0.0] * env.n
    pos = 0
    for group in groups:
        order = [group[j] for j in rng.permutation(len(group))]
        for offset, i in enumerate(order):
            realized[i] = slots[pos + offset] if pos + offset < env.n else 0.0
        pos += len(group)
        if pos >= env.n:
            break
    return realized


def _realize_matroid(env: Environment, groups: list[list[int]], rng) -> list[float]:
    spec = env.matroid
    cur: set[int] = set()
    realized = [0.0] * env.n
    for group in groups:
        for j in rng.permutation(len(group)):
            e = group[j]
            if is_independent(spec, cur | {e}):
                cur.add(e)
                realized[e] = 1.0
    return realized


def run_auction(env: Environment, plan: IroningPlan, bids: Sequence[float], seed) -> AuctionOutcome:
    """Interim allocations and payments plus a seeded realized outcome.

    The realized winner pays its interim per-unit price times the
    realized quantity, so payments average back to the interim ones.
    """
    validate_bids(bids)
    interim = allocate(env, plan, bids)
    payments = [_payment_given_alloc(env, plan, bids, i, interim[i]) for i in range(env.n)]
    rng = np.random.default_rng(seed)
    keys = [ironed_key(b, plan) for b in bids]
    groups = _tie_groups(keys)
    if env.kind == "matroid":
        realized = _realize_matroid(env, groups, rng)
    else:
        realized = _realize_ranked(env, groups, rng)
    realized_pay = [
        (payments[i] / interim[i]) * realized[i] if interim[i] > 0.0 else 0.0
        for i in range(env.n)
    ]
    return AuctionOutcome(
        interim_alloc=tuple(interim),
        interim_payment=tuple(payments),
        realized_alloc=tuple(realized),
        realized_payment=tuple(realized_pay),
    )
