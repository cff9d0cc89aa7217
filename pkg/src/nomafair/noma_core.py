"""Superposition-coded downlink with perfect SIC.

User ``i`` (0-based, weakest first) decodes every flow ``m <= i`` in order,
treating the stronger users' flows ``k > m`` as noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ChannelRealization, DomainError, PowerAllocation, SystemConfig
from .ordered_channel import ordered_cdf

__all__ = [
    "FEASIBILITY_SLACK",
    "DecodingThresholds",
    "tail_sums",
    "achievable_rate",
    "own_rates",
    "min_own_rate",
    "decoding_thresholds",
    "outage_probabilities",
]

FEASIBILITY_SLACK = 1e-12


@dataclass(frozen=True)
class DecodingThresholds:
    """``zeta[i]`` is the smallest gain at which flow ``i`` decodes at rate r0
    (``inf`` when it never does); ``zeta_hat`` is its running maximum, the
    gain user ``i`` needs to decode flows ``0..i``.
    """

    zeta: np.ndarray
    zeta_hat: np.ndarray
    feasible: np.ndarray


def tail_sums(beta: np.ndarray) -> np.ndarray:
    """``out[m] = sum(beta[m+1:])``."""
    beta = np.asarray(beta, dtype=float)
    csum = np.cumsum(beta[::-1])[::-1]
    return np.append(csum[1:], 0.0)


def achievable_rate(alloc: PowerAllocation, chan: ChannelRealization, cfg: SystemConfig,
                    i: int, m: int) -> float:
    """Rate at which user ``i`` can decode flow ``m`` (0-based, ``m <= i``)."""
    n = alloc.n_users
    if not 0 <= m <= i < n:
        raise DomainError(f"need 0 <= m <= i < {n}, got i={i}, m={m}")
    beta = alloc.beta
    pg = cfg.total_power * chan.gains[i]
    interference = pg * beta[m + 1:].sum()
    sinr = beta[m] * pg / (interference + cfg.noise_variance)
    return float(np.log2(1.0 + sinr))


def own_rates(beta, gains, cfg: SystemConfig) -> np.ndarray:
    """Vector of R_{i,i} for raw arrays (no validation)."""
    beta = np.asarray(beta, dtype=float)
    pg = cfg.total_power * np.asarray(gains, dtype=float)
    sinr = beta * pg / (pg * tail_sums(beta) + cfg.noise_variance)
    return np.log2(1.0 + sinr)


def min_own_rate(alloc: PowerAllocation, chan: ChannelRealization, cfg: SystemConfig) -> float:
    return float(own_rates(alloc.beta, chan.gains, cfg).min())


def decoding_thresholds(alloc, cfg: SystemConfig) -> DecodingThresholds:
    """Thresholds for a :class:`PowerAllocation` or a raw beta vector.

    Flow ``i`` is decodable at all only if ``beta_i > r0_hat * sum(beta[i+1:])``;
    the comparison carries a relative slack of :data:`FEASIBILITY_SLACK`.
    """
    beta = alloc.beta if isinstance(alloc, PowerAllocation) else np.asarray(alloc, dtype=float)
    r_hat = cfg.snr_threshold
    interference = r_hat * tail_sums(beta)
    margin = beta - interference
    feasible = margin > FEASIBILITY_SLACK * np.maximum(beta, interference)
    with np.errstate(divide="ignore"):
        zeta = np.where(
            feasible,
            cfg.noise_variance * r_hat / (cfg.total_power * np.where(feasible, margin, 1.0)),
            np.inf,
        )
    return DecodingThresholds(zeta=zeta, zeta_hat=np.maximum.accumulate(zeta), feasible=feasible)


def outage_probabilities(alloc, cfg: SystemConfig, lam: float | None = None) -> np.ndarray:
    """Closed-form per-user outage ``P{|h_i|^2 < zeta_hat_i}`` under Rayleigh fading.

    ``lam`` overrides the fading rate (only used to build negative controls).
    """
    th = decoding_thresholds(alloc, cfg)
    n = th.zeta.size
    lam = cfg.fading_rate if lam is None else lam
    out = np.ones(n)
    for i in range(n):
        if np.isfinite(th.zeta_hat[i]):
            out[i] = ordered_cdf(th.zeta_hat[i], i + 1, n, lam)
    return out
