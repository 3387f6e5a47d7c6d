"""Sample-based learning of near-optimal single-parameter auctions.

Learn ironing intervals and a reserve price from samples of an unknown
bounded value distribution, execute the learned auction in single-item,
multi-unit, position, and matroid environments, and verify revenue
guarantees against exact oracles.
"""

from .curves import (
    PiecewiseLinearCurve,
    QuantileIntervalSet,
    argmax_quantile,
    concave_envelope,
    difference_intervals,
    induce_curve,
    optimal_induced,
    pointwise_gap,
)
from .distributions import (
    ValueDistribution,
    exact_cdf,
    exact_quantile,
    exact_revenue_curve,
    sample,
    tail_probability,
)
from .empirical import EmpiricalQuantile, dkw_epsilon, eval_quantile, r_max_curve, r_min_curve
from .engine import AuctionOutcome, allocate, ironed_key, myerson_payment, run_auction
from .environments import (
    Environment,
    MatroidSpec,
    greedy_max_weight,
    interim_allocation_derivative_kunit,
    interim_allocation_kunit,
    is_independent,
)
from .learner import IroningPlan, compute_auction, loss_bound, required_samples_iid
from .online import RegretTrace, regret_bound, run_no_regret
from .oracle import (
    GuardError,
    RevenueReport,
    additive_loss,
    expected_revenue_enum,
    expected_revenue_mc,
    expected_revenue_quadrature,
    induced_true_curve,
    optimal_plan,
)

__version__ = "0.1.0"
