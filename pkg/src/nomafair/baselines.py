"""Reference schemes: orthogonal TDMA and a fixed NOMA power split.

TDMA with instantaneous CSI is a reconstructed benchmark: the usual
orthogonal model in which user ``i`` gets a share ``alpha_i`` of the block
and a share ``q_i`` of the block energy, for a rate of
``alpha_i * log2(1 + q_i c_i / alpha_i)`` with ``c_i = P g_i / sigma_n^2``.
For a target rate ``t`` the energy-optimal time split satisfies
``phi(y_i) = nu * c_i`` with ``y_i = t ln2 / alpha_i``,
``phi(y) = e^y (y - 1) + 1`` and ``nu`` the multiplier of the time budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import lambertw

from .model import (
    ChannelRealization,
    PowerAllocation,
    SolverResult,
    SystemConfig,
    TdmaAllocation,
)
from .noma_core import decoding_thresholds, outage_probabilities
from .ordered_channel import ordered_cdf
from .search import bisect_levels, refine_boundary

__all__ = [
    "MULTIPLIER_TOL",
    "FixedNomaOutage",
    "tdma_rates",
    "tdma_min_energy",
    "tdma_maxmin",
    "tdma_outage",
    "tdma_outage_per_user",
    "fixed_noma_allocation",
    "fixed_noma_outage",
]

LN2 = math.log(2.0)
MULTIPLIER_TOL = 1e-9


@dataclass(frozen=True)
class FixedNomaOutage:
    allocation: PowerAllocation
    zeta_hat: np.ndarray
    per_user: np.ndarray

    @property
    def worst(self) -> float:
        return float(self.per_user.max())


def tdma_rates(alloc: TdmaAllocation, chan: ChannelRealization, cfg: SystemConfig) -> np.ndarray:
    a, q = alloc.time_fractions, alloc.power_fractions
    c = cfg.total_power * chan.gains / cfg.noise_variance
    with np.errstate(divide="ignore", invalid="ignore"):
        r = a * np.log2(1.0 + q * c / a)
    return np.where(a > 0, r, 0.0)


def _stationary_y(w):
    """Solve ``e^y (y - 1) + 1 = w`` for ``y >= 0`` (``w >= 0``)."""
    return 1.0 + lambertw((w - 1.0) / math.e).real


def _log_bracket(f, target, s0=0.0, step=4.0, limit=200):
    """Grow ``[lo, hi]`` in log space until ``f(lo) <= target < f(hi)``, ``f`` increasing."""
    lo = hi = s0
    for _ in range(limit):
        if f(hi) > target:
            break
        lo, hi = hi, hi + step
    for _ in range(limit):
        if f(lo) <= target:
            break
        hi, lo = lo, lo - step
    return lo, hi


def _split_for_multiplier(log_nu, c):
    """Energy-optimal split on the curve parametrized by the time multiplier.

    Returns ``(t, alpha, q)``: the common rate for which ``alpha`` fills the
    whole block, and the energy shares that deliver it.
    """
    y = _stationary_y(math.exp(log_nu) * c)
    t = 1.0 / (LN2 * np.sum(1.0 / y))
    alpha = t * LN2 / y
    q = alpha * np.expm1(y) / c
    return t, alpha, q


def tdma_min_energy(t: float, chan: ChannelRealization, cfg: SystemConfig):
    """Least total energy share giving every user TDMA rate ``t``.

    Convex in the time shares; solved by bisection on the log of the
    time-budget multiplier to :data:`MULTIPLIER_TOL`. Returns
    ``(energy, alpha, q)``.
    """
    c = cfg.total_power * chan.gains / cfg.noise_variance
    if t <= 0:
        n = c.size
        return 0.0, np.full(n, 1.0 / n), np.zeros(n)

    def time_used(log_nu):
        # decreasing in nu, so negate for the increasing-bracket helper
        return -np.sum(t * LN2 / _stationary_y(math.exp(log_nu) * c))

    lo, hi = _log_bracket(time_used, -1.0)
    lo, hi, _ = bisect_levels(lambda s: time_used(s) + 1.0, lo, hi, MULTIPLIER_TOL, 200)
    y = _stationary_y(math.exp(lo) * c)
    alpha = t * LN2 / y
    alpha = alpha / alpha.sum()
    q = alpha * np.expm1(t * LN2 / alpha) / c
    return float(q.sum()), alpha, q


def tdma_maxmin(chan: ChannelRealization, cfg: SystemConfig, method: str = "multiplier",
                fixed_slot_power: bool = False) -> SolverResult:
    """Max-min rate under TDMA with joint time and energy shares.

    ``method="multiplier"`` walks the curve of energy-optimal splits
    parametrized by the time multiplier and bisects on it until the energy
    budget is met. ``method="nested"`` bisects on the rate ``t`` with
    :func:`tdma_min_energy` as the feasibility test. Both give the same
    optimum; the first is much faster.

    ``fixed_slot_power`` switches to the simpler model where every slot is
    transmitted at full power ``P`` (energy share equals time share); it has
    a closed-form solution.
    """
    c = cfg.total_power * chan.gains / cfg.noise_variance
    if fixed_slot_power:
        cap = np.log2(1.0 + c)
        t = 1.0 / np.sum(1.0 / cap)
        alpha = t / cap
        alpha = alpha / alpha.sum()
        return SolverResult(objective=float(t), allocation=TdmaAllocation(alpha, alpha.copy()),
                            iterations=0, converged=True, bracket_width=0.0)

    if method == "nested":
        def excess(t):
            return tdma_min_energy(t, chan, cfg)[0] - 1.0

        t_ub = math.log2(1.0 + c[-1])
        lo, hi, iters = bisect_levels(excess, 0.0, t_ub, cfg.bisect_tol, cfg.max_iters)
        _, alpha, q = tdma_min_energy(lo, chan, cfg)
        return SolverResult(objective=lo, allocation=TdmaAllocation(alpha, np.minimum(q, 1.0)),
                            iterations=iters, converged=hi - lo <= cfg.bisect_tol,
                            bracket_width=hi - lo)
    if method != "multiplier":
        raise ValueError(f"unknown TDMA method {method!r}")

    def energy(log_nu):
        return math.fsum(_split_for_multiplier(log_nu, c)[2].tolist()) - 1.0

    lo, hi = _log_bracket(energy, 0.0)
    lo, hi, iters = bisect_levels(energy, lo, hi, MULTIPLIER_TOL, cfg.max_iters)
    t_lo, t_hi = _split_for_multiplier(lo, c)[0], _split_for_multiplier(hi, c)[0]
    width = t_hi - t_lo
    s = refine_boundary(energy, lo, hi)
    t, alpha, q = _split_for_multiplier(s, c)
    alpha = alpha / alpha.sum()
    return SolverResult(objective=float(t), allocation=TdmaAllocation(alpha, q),
                        iterations=iters, converged=width <= cfg.bisect_tol,
                        bracket_width=width)


def tdma_outage_per_user(cfg: SystemConfig) -> np.ndarray:
    """Outage of each user with equal slots and full power in each slot.

    A slot of length ``1/N`` must carry ``N * r0`` bits per channel use to
    deliver ``r0`` over the block.
    """
    n = cfg.n_users
    threshold = cfg.noise_variance * (2.0 ** (n * cfg.target_rate) - 1.0) / cfg.total_power
    return np.array([ordered_cdf(threshold, i, n, cfg.fading_rate) for i in range(1, n + 1)])


def tdma_outage(cfg: SystemConfig) -> float:
    return float(tdma_outage_per_user(cfg).max())


def fixed_noma_allocation(n_users: int) -> PowerAllocation:
    """``beta_m`` proportional to ``N - m + 1``, normalized to unit total."""
    weights = np.arange(n_users, 0, -1, dtype=float)
    return PowerAllocation(weights / (n_users * (n_users + 1) / 2.0))


def fixed_noma_outage(cfg: SystemConfig) -> FixedNomaOutage:
    alloc = fixed_noma_allocation(cfg.n_users)
    th = decoding_thresholds(alloc, cfg)
    return FixedNomaOutage(allocation=alloc, zeta_hat=th.zeta_hat,
                           per_user=outage_probabilities(alloc, cfg))
