"""Domain types and configuration checks shared by the solvers.

All rates are in bits per channel use (log base 2). Arrays are indexed
from 0, so user ``i`` in code is the (i+1)-th weakest channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

__all__ = [
    "InvalidConfig",
    "DomainError",
    "SystemConfig",
    "ChannelRealization",
    "PowerAllocation",
    "TdmaAllocation",
    "SolverResult",
    "validate_config",
    "db_to_linear",
    "linear_to_db",
]


class InvalidConfig(ValueError):
    """Raised when a configuration or value object violates its invariants."""

    def __init__(self, field_name: str, message: str = ""):
        self.field = field_name
        super().__init__(f"{field_name}: {message}" if message else field_name)


class DomainError(ValueError):
    """Raised when a numeric argument lies outside a function's domain."""


def _frozen_array(values, name: str) -> np.ndarray:
    try:
        arr = np.array(values, dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(name, f"not a numeric vector ({exc})") from None
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemConfig:
    n_users: int
    total_power: float
    target_rate: float = 1.0
    channel_variance: float = 1.0
    noise_variance: float = 1.0
    bisect_tol: float = 1e-6
    root_tol: float = 1e-12
    max_iters: int = 200

    def __post_init__(self):
        validate_config(self)

    @property
    def fading_rate(self) -> float:
        """Exponential rate 1/sigma_h^2 of the channel power gains."""
        return 1.0 / self.channel_variance

    @property
    def snr_threshold(self) -> float:
        """Required SINR 2^r0 - 1 for decoding a flow at the target rate."""
        return 2.0 ** self.target_rate - 1.0

    def replace(self, **changes) -> "SystemConfig":
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return SystemConfig(**values)


def _positive_real(value, name: str) -> None:
    if isinstance(value, bool):
        raise InvalidConfig(name, "must be a real number")
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise InvalidConfig(name, "must be a real number") from None
    if not math.isfinite(v) or v <= 0:
        raise InvalidConfig(name, f"must be positive and finite, got {value!r}")


def _positive_int(value, name: str) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InvalidConfig(name, f"must be an integer, got {value!r}")
    if value < 1:
        raise InvalidConfig(name, f"must be >= 1, got {value!r}")


def validate_config(cfg: SystemConfig) -> None:
    """Raise :class:`InvalidConfig` naming the first violated field."""
    _positive_int(cfg.n_users, "n_users")
    for name in ("total_power", "target_rate", "channel_variance",
                 "noise_variance", "bisect_tol", "root_tol"):
        _positive_real(getattr(cfg, name), name)
    _positive_int(cfg.max_iters, "max_iters")


@dataclass(frozen=True)
class ChannelRealization:
    """Instantaneous power gains |h_i|^2, weakest user first."""

    gains: np.ndarray

    def __post_init__(self):
        g = _frozen_array(self.gains, "gains")
        if g.size == 0:
            raise InvalidConfig("gains", "empty channel realization")
        if not np.all(np.isfinite(g)) or np.any(g <= 0):
            raise InvalidConfig("gains", "gains must be strictly positive and finite")
        if np.any(np.diff(g) < 0):
            raise InvalidConfig("gains", "gains must be sorted in non-decreasing order")
        object.__setattr__(self, "gains", g)

    @classmethod
    def from_unsorted(cls, gains) -> "ChannelRealization":
        return cls(np.sort(np.asarray(gains, dtype=float)))

    @property
    def n_users(self) -> int:
        return int(self.gains.size)


@dataclass(frozen=True)
class PowerAllocation:
    """Fractions of the total power assigned to each superimposed flow."""

    beta: np.ndarray
    tol: float = 1e-6

    def __post_init__(self):
        b = _frozen_array(self.beta, "beta")
        if not np.all(np.isfinite(b)) or np.any(b < 0):
            raise InvalidConfig("beta", "power fractions must be non-negative")
        if b.sum() > 1.0 + self.tol:
            raise InvalidConfig("beta", f"power fractions sum to {b.sum():.12g} > 1")
        object.__setattr__(self, "beta", b)

    @property
    def n_users(self) -> int:
        return int(self.beta.size)

    @property
    def total(self) -> float:
        return float(self.beta.sum())


@dataclass(frozen=True)
class TdmaAllocation:
    """Orthogonal split: user i owns a fraction ``time_fractions[i]`` of the
    block and a fraction ``power_fractions[i]`` of the block energy, so its
    instantaneous slot power is ``power_fractions[i] * P / time_fractions[i]``.
    """

    time_fractions: np.ndarray
    power_fractions: np.ndarray

    def __post_init__(self):
        a = _frozen_array(self.time_fractions, "time_fractions")
        q = _frozen_array(self.power_fractions, "power_fractions")
        if a.shape != q.shape:
            raise InvalidConfig("power_fractions", "length differs from time_fractions")
        if np.any(a < 0) or abs(a.sum() - 1.0) > 1e-9:
            raise InvalidConfig("time_fractions", "must be non-negative and sum to 1")
        if np.any(q < 0) or q.sum() > 1.0 + 1e-9:
            raise InvalidConfig("power_fractions", "must be non-negative with sum <= 1")
        object.__setattr__(self, "time_fractions", a)
        object.__setattr__(self, "power_fractions", q)

    @property
    def n_users(self) -> int:
        return int(self.time_fractions.size)


@dataclass(frozen=True)
class SolverResult:
    """Outcome of a bisection solve.

    ``objective`` is a rate (BPCU) for max-min problems and a probability for
    min-max outage problems. ``bracket_width`` is the width of the bisection
    bracket when the loop stopped; ``iterations`` counts bisection steps.
    """

    objective: float
    allocation: Union[PowerAllocation, TdmaAllocation]
    iterations: int
    converged: bool
    bracket_width: float
    infeasible_at_full_power: bool = False
    thresholds: Optional[np.ndarray] = field(default=None, compare=False)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if not x > 0:
        raise DomainError(f"linear_to_db needs a positive argument, got {x!r}")
    return 10.0 * math.log10(x)
