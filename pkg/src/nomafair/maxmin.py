"""Max-min rate power allocation with instantaneous CSI.

The min-rate objective is quasi-concave in beta, so the optimum is found by
bisection on the common rate ``t``. For a given ``t`` the least total power
giving every user rate ``t`` has all rate constraints tight, which yields
a backward recursion from the strongest user to the weakest.
"""

from __future__ import annotations

import math

import numpy as np

from .model import ChannelRealization, DomainError, PowerAllocation, SolverResult, SystemConfig
from .search import bisect_levels, refine_boundary

__all__ = ["allocate_for_rate", "solve_maxmin"]


def allocate_for_rate(t: float, chan: ChannelRealization, cfg: SystemConfig) -> np.ndarray:
    """Minimum-power fractions giving every user own-rate exactly ``t``.

    Returns a raw array whose sum may exceed 1 (then ``t`` is not
    achievable with the available power).
    """
    if t < 0:
        raise DomainError(f"target rate must be non-negative, got {t!r}")
    return np.array(_allocate(t, chan.gains.tolist(), cfg.total_power, cfg.noise_variance))


def _allocate(t, gains, power, noise):
    a = 2.0 ** t - 1.0
    beta = [0.0] * len(gains)
    tail = 0.0
    for i in range(len(gains) - 1, -1, -1):
        b = a * (tail + noise / (power * gains[i]))
        beta[i] = b
        tail += b
    return beta


def solve_maxmin(chan: ChannelRealization, cfg: SystemConfig, refine: bool = True) -> SolverResult:
    """Largest common rate reachable with total power fraction at most 1.

    Bisection starts from ``[0, log2(1 + P g_max / sigma_n^2)]`` and stops
    once the bracket is narrower than ``cfg.bisect_tol``. With ``refine``
    the boundary is then located to double precision inside the final
    bracket. The allocation is the recursion at the returned rate; any
    power left over is not redistributed.
    """
    gains = chan.gains.tolist()
    power, noise = cfg.total_power, cfg.noise_variance

    def excess(t):
        return math.fsum(_allocate(t, gains, power, noise)) - 1.0

    t_ub = math.log2(1.0 + power * gains[-1] / noise)
    lo, hi, iters = bisect_levels(excess, 0.0, t_ub, cfg.bisect_tol, cfg.max_iters)
    width = hi - lo
    t_star = refine_boundary(excess, lo, hi) if refine else lo
    beta = np.array(_allocate(t_star, gains, power, noise))
    return SolverResult(
        objective=t_star,
        allocation=PowerAllocation(beta, tol=cfg.bisect_tol),
        iterations=iters,
        converged=width <= cfg.bisect_tol,
        bracket_width=width,
    )
