"""Monte Carlo estimates straight from the decoding-rate definitions.

Nothing here uses decoding thresholds or order-statistic CDFs, so the
estimates can be used to check those closed forms.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Sequence

import numpy as np

from .baselines import tdma_rates
from .model import (
    ChannelRealization,
    PowerAllocation,
    SolverResult,
    SystemConfig,
    TdmaAllocation,
)
from .noma_core import own_rates, tail_sums
from .ordered_channel import sample_gain_matrix

__all__ = [
    "BLOCK_SIZE",
    "OutageStats",
    "MinRateSummary",
    "outage_events",
    "estimate_outage",
    "estimate_min_rate_cdf",
]

BLOCK_SIZE = 1 << 16


@dataclass(frozen=True)
class OutageStats:
    per_user_outage: np.ndarray
    half_width: np.ndarray
    samples: int
    seed: int

    def sigma_band(self, p) -> np.ndarray:
        """Three-standard-deviation band of a binomial frequency with success
        probability ``p`` (e.g. a closed-form prediction) at this sample size.
        """
        p = np.asarray(p, dtype=float)
        return 3.0 * np.sqrt(p * (1.0 - p) / self.samples)


@dataclass(frozen=True)
class MinRateSummary:
    mean: float
    quantiles: Dict[float, float]
    samples: int
    seed: int
    values: np.ndarray


def outage_events(beta, gains: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Boolean ``(samples, N)`` array: user ``i`` fails to decode some flow ``m <= i``."""
    beta = np.asarray(beta, dtype=float)
    n = beta.size
    tails = tail_sums(beta)
    pg = cfg.total_power * gains
    out = np.zeros(gains.shape, dtype=bool)
    for m in range(n):
        g = pg[:, m:]
        rate = np.log2(1.0 + beta[m] * g / (g * tails[m] + cfg.noise_variance))
        out[:, m:] |= rate < cfg.target_rate
    return out


def estimate_outage(alloc, cfg: SystemConfig, samples: int = 1_000_000, seed: int = 0,
                    workers: int = 1, block_size: int = BLOCK_SIZE) -> OutageStats:
    """Frequency of outage per user over ``samples`` sorted Rayleigh draws.

    The samples are cut into blocks of ``block_size``; block ``k`` draws from
    stream ``k`` of ``seed`` whichever worker runs it, so the estimate does
    not depend on ``workers``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    beta = alloc.beta if isinstance(alloc, PowerAllocation) else np.asarray(alloc, dtype=float)
    sizes = [min(block_size, samples - start) for start in range(0, samples, block_size)]

    def run(k):
        g = sample_gain_matrix(cfg, sizes[k], seed, stream=k)
        return outage_events(beta, g, cfg).sum(axis=0)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(run, range(len(sizes))))
    else:
        counts = [run(k) for k in range(len(sizes))]
    p = np.sum(counts, axis=0) / samples
    return OutageStats(per_user_outage=p, half_width=3.0 * np.sqrt(p * (1.0 - p) / samples),
                       samples=samples, seed=seed)


def _min_rate(result, chan: ChannelRealization, cfg: SystemConfig) -> float:
    alloc = result.allocation if isinstance(result, SolverResult) else result
    if isinstance(alloc, TdmaAllocation):
        return float(tdma_rates(alloc, chan, cfg).min())
    beta = alloc.beta if isinstance(alloc, PowerAllocation) else np.asarray(alloc, dtype=float)
    return float(own_rates(beta, chan.gains, cfg).min())


def estimate_min_rate_cdf(policy: Callable, cfg: SystemConfig, samples: int = 1000,
                          seed: int = 0,
                          quantiles: Sequence[float] = (0.1, 0.5, 0.9)) -> MinRateSummary:
    """Distribution of the worst user's rate when ``policy`` picks the allocation.

    ``policy(chan, cfg)`` may return a :class:`SolverResult`, a
    :class:`PowerAllocation` (NOMA rates) or a :class:`TdmaAllocation`.
    Realization ``k`` is row ``k`` of ``sample_gain_matrix(cfg, samples, seed)``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    gains = sample_gain_matrix(cfg, samples, seed)
    values = np.empty(samples)
    for k in range(samples):
        chan = ChannelRealization(gains[k])
        values[k] = _min_rate(policy(chan, cfg), chan, cfg)
    qs = np.quantile(values, list(quantiles))
    return MinRateSummary(mean=float(values.mean()),
                          quantiles={float(q): float(v) for q, v in zip(quantiles, qs)},
                          samples=samples, seed=seed, values=values)
