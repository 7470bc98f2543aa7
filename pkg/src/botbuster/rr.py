"""Pairwise botnet test with a common reference EDR.

Two disjoint subnets generally show different EDR estimates, so their joint
MIR cannot be compared directly to the innovation rate of a single botnet.
The replacement-and-reassignment construction moves a rate ``delta`` of
distinct messages from one subnet to the other::

    lambda1' = lambda1 + delta,   rho1' = rho1 + delta
    lambda2' = lambda2 - delta,   rho2' = rho2 - delta

which keeps the joint transmission rate and MIR, and picks ``delta`` so that
both subnets end up with the same EDR ``alpha_prime``.  That is the
admissible root (``-rho1 <= delta <= rho2``) of

    (lambda1 + delta)(rho1 + delta) / (lambda1 - rho1)
        == (lambda2 - delta)(rho2 - delta) / (lambda2 - rho2)

The reference rates are then ``rho_sum = rho1 + rho2`` (disjoint
dictionaries) and ``rho_bot = R(alpha_prime, lambda1 + lambda2)`` (one common
dictionary), and the threshold ``gamma`` sits a fraction ``epsilon`` of the
way from ``rho_bot`` to ``rho_sum``.  The union is declared a botnet when its
MIR falls below ``gamma``.

Everything numeric is written on numpy arrays so the detector can evaluate a
whole time grid at once; the scalar functions wrap the array core.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DisjointnessError, DomainError, NumericalError
from .indicators import REPEAT_GUARD, Indicators, compute_indicators, r_array
from .trace import SubnetStats, Trace, union_stats

log = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.2
# |(l1-r1) - (l2-r2)| below this fraction of max(l1, l2): equal repeat rates
DEGENERATE_DEN = 1e-9
# slack on admissibility of delta, relative to the rates involved
ADMISSIBLE_TOL = 1e-9
# rho_union must undercut gamma by this fraction of rho_sum to count as "below"
COMPARE_TOL = 1e-9


class Decision(enum.Enum):
    BOTH_BOT = "both_bot"
    AT_LEAST_ONE_NORMAL = "at_least_one_normal"


@dataclass(frozen=True)
class RrSolution:
    delta_star: float
    alpha_prime: float
    rho_bot: float
    rho_sum: float
    gamma: float
    epsilon: float


def check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 1.0:
        raise ConfigError(f"epsilon must lie in (0, 1), got {epsilon}")
    return epsilon


def rr_arrays(lam1, rho1, lam2, rho2, epsilon=DEFAULT_EPSILON):
    """Array core of the construction.

    Returns a dict of arrays ``delta``, ``alpha_prime``, ``rho_bot``,
    ``rho_sum``, ``gamma`` and the masks ``free1``/``free2`` flagging
    repeat-free (infinite EDR) subnets.
    """
    lam1, rho1, lam2, rho2 = np.broadcast_arrays(*(np.asarray(x, dtype=float)
                                                   for x in (lam1, rho1, lam2, rho2)))
    r1 = lam1 - rho1
    r2 = lam2 - rho2
    free1 = r1 <= REPEAT_GUARD * lam1
    free2 = r2 <= REPEAT_GUARD * lam2
    r1 = np.where(free1, 0.0, r1)
    r2 = np.where(free2, 0.0, r2)
    both_free = free1 & free2
    only2 = free2 & ~free1
    only1 = free1 & ~free2
    regular = ~(free1 | free2)

    cross = lam1 * lam2 - rho1 * rho2
    delta = np.zeros_like(lam1)
    with np.errstate(divide="ignore", invalid="ignore"):
        # one side repeat-free: the square-root term vanishes
        delta = np.where(only2, cross / r1, delta)
        delta = np.where(only1, -cross / r2, delta)

        den = r1 - r2
        linear = regular & (np.abs(den) < DEGENERATE_DEN * np.maximum(lam1, lam2))
        lin = (lam2 * rho2 - lam1 * rho1) / (lam1 + rho1 + lam2 + rho2)
        delta = np.where(linear, lin, delta)

        # a*d^2 + b*d + c = 0 with a = -den; roots c/q and q/a (stable form)
        quad = regular & ~linear
        a = r2 - r1
        b = r2 * (lam1 + rho1) + r1 * (lam2 + rho2)
        c = r2 * lam1 * rho1 - r1 * lam2 * rho2
        disc = np.maximum(b * b - 4.0 * a * c, 0.0)
        q = -0.5 * (b + np.sqrt(disc))
        root1 = c / q
        root2 = q / a
    lo, hi = -rho1, rho2
    slack = ADMISSIBLE_TOL * np.maximum(np.maximum(lam1, lam2), 1e-300)
    ok1 = (root1 >= lo - slack) & (root1 <= hi + slack)
    ok2 = (root2 >= lo - slack) & (root2 <= hi + slack)
    if np.any(quad & ok1 & ok2):
        log.debug("both quadratic roots admissible at %d points; taking the smaller one",
                  int(np.count_nonzero(quad & ok1 & ok2)))
    pick1 = ok1 & (~ok2 | (np.abs(root1) <= np.abs(root2)))
    chosen = np.where(pick1, root1, np.where(ok2, root2, np.nan))
    delta = np.where(quad, chosen, delta)

    bad = ~both_free & ~((delta >= lo - slack) & (delta <= hi + slack))
    if np.any(bad):
        i = np.flatnonzero(bad.ravel())[0]
        raise NumericalError(
            "no admissible reassignment rate for "
            f"lambda1={lam1.ravel()[i]!r} rho1={rho1.ravel()[i]!r} "
            f"lambda2={lam2.ravel()[i]!r} rho2={rho2.ravel()[i]!r} "
            f"(candidate delta={delta.ravel()[i]!r})")
    delta = np.where(both_free, 0.0, np.clip(delta, lo, hi))

    with np.errstate(divide="ignore", invalid="ignore"):
        side1 = (lam1 + delta) * (rho1 + delta) / r1
        side2 = (lam2 - delta) * (rho2 - delta) / r2
    # evaluate the common EDR on the better conditioned side
    alpha_prime = np.where(r1 >= r2, side1, side2)
    alpha_prime = np.where(both_free, np.inf, alpha_prime)

    rho_sum = rho1 + rho2
    rho_bot = np.where(both_free, rho_sum, r_array(alpha_prime, lam1 + lam2))
    eps = check_epsilon(epsilon)
    gamma = rho_bot + eps * (rho_sum - rho_bot)
    return {
        "delta": delta,
        "alpha_prime": alpha_prime,
        "rho_bot": rho_bot,
        "rho_sum": rho_sum,
        "gamma": gamma,
        "free1": free1,
        "free2": free2,
    }


def _require_active(*inds: Indicators) -> None:
    for ind in inds:
        if not ind.lambda_hat > 0:
            raise DomainError("both subnets need at least one transmission")


def solve_delta_star(i1: Indicators, i2: Indicators) -> float:
    """Admissible reassignment rate that equalises the two EDRs (signed)."""
    _require_active(i1, i2)
    out = rr_arrays(i1.lambda_hat, i1.rho_hat, i2.lambda_hat, i2.rho_hat)
    return float(out["delta"])


def reference_quantities(i1: Indicators, i2: Indicators, epsilon: float = DEFAULT_EPSILON) -> RrSolution:
    check_epsilon(epsilon)
    _require_active(i1, i2)
    out = rr_arrays(i1.lambda_hat, i1.rho_hat, i2.lambda_hat, i2.rho_hat, epsilon)
    return RrSolution(
        delta_star=float(out["delta"]),
        alpha_prime=float(out["alpha_prime"]),
        rho_bot=float(out["rho_bot"]),
        rho_sum=float(out["rho_sum"]),
        gamma=float(out["gamma"]),
        epsilon=float(epsilon),
    )


def reassign(i1: Indicators, i2: Indicators, delta: float):
    """Rates after moving ``delta`` distinct messages per second from subnet 2 to 1."""
    return ((i1.lambda_hat + delta, i1.rho_hat + delta),
            (i2.lambda_hat - delta, i2.rho_hat - delta))


def equalised_edrs(i1: Indicators, i2: Indicators, delta: float) -> tuple[float, float]:
    """EDR of each subnet after reassignment; equal at the solution."""
    (l1, p1), (l2, p2) = reassign(i1, i2, delta)
    r1, r2 = i1.repeat_rate, i2.repeat_rate
    a1 = math.inf if r1 <= REPEAT_GUARD * i1.lambda_hat else l1 * p1 / r1
    a2 = math.inf if r2 <= REPEAT_GUARD * i2.lambda_hat else l2 * p2 / r2
    return a1, a2


def decide_arrays(n1, d1, n2, d2, du, t, epsilon=DEFAULT_EPSILON):
    """Vectorised pairwise decision from raw counts.

    ``n*``/``d*`` are transmission and distinct-message counts of the two
    subnets, ``du`` the distinct count of their union, ``t`` the observation
    times.  Returns a boolean array, True where the pair is declared a botnet.
    A pair is never declared a botnet when either side is silent or when both
    sides are repeat-free.
    """
    n1, d1, n2, d2, du, t = np.broadcast_arrays(*(np.asarray(x, dtype=float)
                                                  for x in (n1, d1, n2, d2, du, t)))
    out = rr_arrays(n1 / t, d1 / t, n2 / t, d2 / t, epsilon)
    rho_u = du / t
    below = rho_u < out["gamma"] - COMPARE_TOL * out["rho_sum"]
    active = (n1 > 0) & (n2 > 0)
    return below & active & ~(out["free1"] & out["free2"])


def bic_check(st1: SubnetStats, st2: SubnetStats, st_union: SubnetStats,
              epsilon: float = DEFAULT_EPSILON) -> Decision:
    """Decide whether two disjoint subnets jointly behave like one botnet."""
    check_epsilon(epsilon)
    if not (st1.horizon == st2.horizon == st_union.horizon):
        raise DomainError("stats refer to different observation times")
    if st_union.n_events != st1.n_events + st2.n_events:
        raise DisjointnessError("union transmission count differs from the sum of the parts; "
                                "subnets overlap")
    if st1.n_events == 0 or st2.n_events == 0:
        return Decision.AT_LEAST_ONE_NORMAL
    both = decide_arrays(st1.n_events, len(st1.dict), st2.n_events, len(st2.dict),
                         len(st_union.dict), st_union.horizon, epsilon)
    return Decision.BOTH_BOT if bool(both) else Decision.AT_LEAST_ONE_NORMAL


def bic_trace(trace: Trace, s1, s2, t: float, epsilon: float = DEFAULT_EPSILON):
    """Run the pairwise test on a trace.

    Returns ``(decision, rho_union, solution)``; ``solution`` is None when a
    subnet is silent at ``t``.
    """
    a, b, u = union_stats(trace, s1, s2, t)
    decision = bic_check(a, b, u, epsilon)
    rho_u = len(u.dict) / t
    if a.n_events == 0 or b.n_events == 0:
        return decision, rho_u, None
    return decision, rho_u, reference_quantities(compute_indicators(a), compute_indicators(b), epsilon)
