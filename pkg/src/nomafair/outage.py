"""Min-max outage power allocation with average (statistical) CSI.

For a common outage level ``t`` the cheapest allocation puts every user's
decoding threshold exactly at the ``t``-quantile of its order statistic,
so the thresholds decouple into independent CDF inversions and the power
fractions follow by back-substitution. An outer bisection on ``t`` finds
the smallest level that fits in the power budget.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .model import DomainError, PowerAllocation, SolverResult, SystemConfig
from .noma_core import outage_probabilities
from .ordered_channel import _inverse_search, ordered_cdf_inverse
from .search import bisect_levels, refine_boundary

__all__ = ["OUTAGE_UPPER", "allocate_for_outage", "solve_minmax_outage"]

OUTAGE_UPPER = 1.0 - 1e-12


def allocate_for_outage(t: float, cfg: SystemConfig):
    """Return ``(beta, zeta)`` for common outage ``t``; ``sum(beta)`` may exceed 1."""
    if not 0.0 < t < 1.0:
        raise DomainError(f"target outage must lie in (0, 1), got {t!r}")
    n = cfg.n_users
    zeta = ordered_cdf_inverse(t, np.arange(1, n + 1), n, cfg.fading_rate, cfg.root_tol)
    return _back_substitute(zeta, cfg), zeta


def _back_substitute(zeta, cfg):
    r_hat = cfg.snr_threshold
    return np.array(_back_substitute_list(zeta.tolist(), cfg.noise_variance * r_hat
                                          / cfg.total_power, r_hat))


def _back_substitute_list(z, base, r_hat):
    beta = [0.0] * len(z)
    tail = 0.0
    for i in range(len(z) - 1, -1, -1):
        b = base / z[i] + r_hat * tail
        beta[i] = b
        tail += b
    return beta


def solve_minmax_outage(cfg: SystemConfig, refine: bool = True) -> SolverResult:
    """Smallest common outage probability achievable within the power budget.

    Bisection runs on ``(0, OUTAGE_UPPER]`` until the bracket is narrower than
    ``cfg.bisect_tol``; with ``refine`` the boundary is then located to
    double precision. If even ``OUTAGE_UPPER`` needs more than the full
    power, the result is flagged ``infeasible_at_full_power`` and carries
    that allocation scaled down to unit total, with its actual worst-user
    outage as the objective.
    """
    n, lam, tol = cfg.n_users, cfg.fading_rate, cfg.root_tol
    r_hat = cfg.snr_threshold
    base = cfg.noise_variance * r_hat / cfg.total_power
    ranks = np.arange(1.0, n + 1.0)
    shapes = n - ranks + 1.0
    evaluated = {}

    def allocate(t):
        # allocate_for_outage without the per-call validation; the residual is
        # checked on the beta-function scale, where the inverse is computed
        if t not in evaluated:
            u = special.betaincinv(ranks, shapes, t)
            if abs(special.betainc(ranks, shapes, u) - t).max() <= tol:
                zeta = np.log1p(-u)
                zeta *= -1.0 / lam
            else:
                zeta = _inverse_search(np.asarray(t), ranks, n, lam, tol)
            evaluated[t] = (_back_substitute_list(zeta.tolist(), base, r_hat), zeta)
        return evaluated[t]

    def excess(t):
        return math.fsum(allocate(t)[0]) - 1.0

    hi = OUTAGE_UPPER
    if excess(hi) > 0:
        beta, zeta = allocate(hi)
        beta = np.array(beta) / math.fsum(beta)
        worst = float(outage_probabilities(beta, cfg).max())
        return SolverResult(
            objective=worst,
            allocation=PowerAllocation(beta, tol=cfg.bisect_tol),
            iterations=0,
            converged=True,
            bracket_width=0.0,
            infeasible_at_full_power=True,
            thresholds=zeta,
        )

    lo, hi, iters = bisect_levels(excess, 0.0, hi, cfg.bisect_tol, cfg.max_iters,
                                  feasible_low=False)
    width = hi - lo
    t_star = hi
    if refine:
        # the excess is unbounded as t -> 0, so find a finite infeasible end first
        while lo == 0.0 and hi > 1e-300:
            cand = 0.5 * hi
            if excess(cand) > 0:
                lo = cand
            else:
                hi = cand
        t_star = refine_boundary(excess, lo, hi, feasible_low=False) if lo > 0 else hi
    beta, zeta = allocate(t_star)
    beta = np.array(beta)
    return SolverResult(
        objective=t_star,
        allocation=PowerAllocation(beta, tol=cfg.bisect_tol),
        iterations=iters,
        converged=width <= cfg.bisect_tol,
        bracket_width=width,
        thresholds=zeta,
    )
