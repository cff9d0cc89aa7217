"""Sorted Rayleigh power gains and the CDF of their order statistics.

With i.i.d. Rayleigh fading every |h|^2 is exponential with rate
``lam = 1/sigma_h^2``. The i-th smallest of ``n`` such gains (``i`` counted
from 1) has CDF

    F_i(x) = sum_k gamma_k (1 - exp(-delta_k x)),   k = 0..i-1

with ``delta_k = lam (n - i + 1 + k)`` and
``gamma_k = lam * n!/((i-1)!(n-i)!) * C(i-1, k) (-1)^k / delta_k``.
Equivalently ``F_i(x) = I_u(i, n - i + 1)`` with ``u = 1 - exp(-lam x)``.
The alternating sum cancels badly for large ``i``, so :func:`ordered_cdf`
switches to the beta form above :data:`SUM_FORM_MAX_USERS` users.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy import special

from .model import ChannelRealization, DomainError, SystemConfig

__all__ = [
    "SUM_FORM_MAX_USERS",
    "SUM_FORM_ABS_ERR",
    "OrderStatCoeffs",
    "order_stat_coeffs",
    "rng_for",
    "sample_gain_matrix",
    "sample_gains",
    "ordered_cdf_sum",
    "ordered_cdf_beta",
    "ordered_cdf",
    "ordered_pdf",
    "ordered_cdf_inverse",
]

SUM_FORM_MAX_USERS = 12
SUM_FORM_ABS_ERR = 1e-12


@dataclass(frozen=True)
class OrderStatCoeffs:
    i: int
    n: int
    lam: float
    delta: np.ndarray
    gamma: np.ndarray
    big_delta: float


def _check_rank(i: int, n: int) -> None:
    if not 1 <= i <= n:
        raise DomainError(f"order statistic rank must satisfy 1 <= i <= n, got i={i}, n={n}")


@lru_cache(maxsize=4096)
def order_stat_coeffs(i: int, n: int, lam: float) -> OrderStatCoeffs:
    _check_rank(i, n)
    if not lam > 0:
        raise DomainError(f"rate parameter must be positive, got {lam!r}")
    k = np.arange(i)
    big_delta = math.factorial(n) / (math.factorial(i - 1) * math.factorial(n - i))
    delta = lam * (n - i + 1 + k)
    binom = np.array([math.comb(i - 1, int(j)) for j in k], dtype=float)
    gamma = lam * big_delta * binom * (-1.0) ** k / delta
    for arr in (delta, gamma):
        arr.setflags(write=False)
    return OrderStatCoeffs(i=i, n=n, lam=lam, delta=delta, gamma=gamma, big_delta=big_delta)


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator fully determined by ``(seed, stream)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


def sample_gain_matrix(cfg: SystemConfig, samples: int, seed: int, stream: int = 0) -> np.ndarray:
    """Draw ``samples`` realizations as a ``(samples, n_users)`` array, each row
    sorted ascending. Exponential draws come from the inverse-CDF transform
    ``-sigma_h^2 * log(1 - U)``.
    """
    u = rng_for(seed, stream).random((samples, cfg.n_users))
    g = -cfg.channel_variance * np.log1p(-u)
    # u == 0 would give a zero gain
    np.maximum(g, np.finfo(float).tiny, out=g)
    g.sort(axis=1)
    return g


def sample_gains(cfg: SystemConfig, seed: int, stream: int = 0) -> ChannelRealization:
    return ChannelRealization(sample_gain_matrix(cfg, 1, seed, stream)[0])


def ordered_cdf_sum(x, coeffs: OrderStatCoeffs):
    """Binomial-sum form of the order-statistic CDF. Accepts scalar or array ``x``.

    The terms alternate in sign and grow quickly with ``i``; when the
    rounding bound ``eps * sum|gamma_k|`` exceeds :data:`SUM_FORM_ABS_ERR`
    the sum is carried out in extended precision with mpmath instead.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("ordered CDF needs x >= 0")
    bound = np.finfo(float).eps * float(np.abs(coeffs.gamma).sum())
    if bound <= SUM_FORM_ABS_ERR:
        out = -np.expm1(-np.multiply.outer(xa, coeffs.delta)) @ coeffs.gamma
    else:
        out = _sum_form_mp(xa, coeffs, extra_digits=int(math.ceil(math.log10(bound / 1e-17))))
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _sum_form_mp(xa, coeffs, extra_digits):
    # delta_k = lam * (m + k), so exp(-delta_k x) = v^(m+k) with v = exp(-lam x)
    i, n = coeffs.i, coeffs.n
    m = n - i + 1
    with mpmath.workdps(20 + extra_digits):
        big_delta = mpmath.mpf(math.factorial(n)) / (math.factorial(i - 1) * math.factorial(n - i))
        gammas = [big_delta * math.comb(i - 1, k) * (-1) ** k / (m + k) for k in range(i)]
        flat = []
        for value in xa.reshape(-1).tolist():
            v = mpmath.exp(-coeffs.lam * mpmath.mpf(value))
            w = v ** m
            acc = mpmath.mpf(0)
            for g in gammas:
                acc += g * (1 - w)
                w *= v
            flat.append(float(acc))
    return np.array(flat).reshape(xa.shape)


def ordered_cdf_beta(x, i, n, lam: float):
    """Regularized-incomplete-beta form ``I_u(i, n-i+1)``, ``u = 1 - exp(-lam x)``.

    ``i`` may be an integer array (broadcast against ``x``).
    """
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("ordered CDF needs x >= 0")
    ia = np.asarray(i)
    u = -np.expm1(-lam * xa)
    out = special.betainc(ia, n - ia + 1, u)
    return float(out) if np.ndim(out) == 0 else out


def ordered_cdf(x, i: int, n: int, lam: float):
    """Probability that the i-th weakest of ``n`` gains is at most ``x``."""
    _check_rank(i, n)
    if n <= SUM_FORM_MAX_USERS:
        return ordered_cdf_sum(x, order_stat_coeffs(i, n, lam))
    return ordered_cdf_beta(x, i, n, lam)


def ordered_pdf(x, i, n, lam: float):
    xa = np.asarray(x, dtype=float)
    ia = np.asarray(i, dtype=float)
    b = n - ia + 1
    with np.errstate(divide="ignore", invalid="ignore"):
        log_pdf = (
            np.log(lam)
            - special.betaln(ia, b)
            + (ia - 1) * np.log(-np.expm1(-lam * xa))
            - lam * b * xa
        )
    # x = 0 with i = 1 gives 0 * -inf above; the density there is lam * n
    log_pdf = np.where((xa == 0) & (ia == 1), np.log(lam * n), log_pdf)
    return np.exp(log_pdf)


def ordered_cdf_inverse(t, i, n: int, lam: float, root_tol: float = 1e-12):
    """Smallest ``zeta >= 0`` with ``ordered_cdf(zeta; i, n) = t``.

    Works elementwise when ``i`` (and/or ``t``) is an array; the entries are
    solved independently. A bracket ``[0, sigma_h^2 * 2^k]`` is grown by
    doubling ``k`` until it contains the root. The starting point comes from
    the inverse regularized beta function and is then refined by
    Newton steps on the beta-form CDF, falling back to bisection whenever a
    step would leave the bracket. Iteration stops once the residual
    ``|F(zeta) - t|`` is at most ``root_tol`` or the bracket collapses.
    """
    ta = np.asarray(t, dtype=float)
    ia = np.asarray(i, dtype=float)
    t_lo, t_hi = (float(ta), float(ta)) if ta.ndim == 0 else (ta.min(), ta.max())
    if not (0.0 <= t_lo and t_hi < 1.0):
        raise DomainError("target probability must lie in [0, 1)")
    i_lo, i_hi = (float(ia), float(ia)) if ia.ndim == 0 else (ia.min(), ia.max())
    if i_lo < 1 or i_hi > n:
        raise DomainError(f"order statistic rank must lie in 1..{n}")
    x = _quantile_start(ta, ia, n - ia + 1.0, lam, root_tol)
    if x is not None:
        return float(x) if x.ndim == 0 else x
    return _inverse_search(ta, ia, n, lam, root_tol)


def _quantile_start(t, a, b, lam, root_tol):
    """Closed-form start from the inverse regularized beta function; returned
    only if its residual already meets ``root_tol``.
    """
    x = -np.log1p(-special.betaincinv(a, b, t)) / lam
    r = special.betainc(a, b, -np.expm1(-lam * x)) - t
    return x if abs(r).max() <= root_tol else None


def _inverse_search(ta, ia, n, lam, root_tol):
    scale = 1.0 / lam
    ta, ia = np.broadcast_arrays(ta, ia)
    b = n - ia + 1.0

    def resid(x):
        return special.betainc(ia, b, -np.expm1(-lam * x)) - ta

    u = special.betaincinv(ia, b, ta)
    # betaincinv can return nan deep in the lower tail; I_u(a, b) ~ u^a / (a B(a, b))
    with np.errstate(divide="ignore"):
        tail = np.exp((np.log(ta) + np.log(ia) + special.betaln(ia, b)) / ia)
    u = np.where(np.isfinite(u), u, np.minimum(tail, 0.5))
    x = -np.log1p(-u) * scale
    k = np.ceil(np.log2(np.maximum(x / scale, 1.0)))
    hi = scale * np.exp2(k)
    lo = np.zeros_like(hi)
    for _ in range(1100):
        short = resid(hi) < 0
        if not short.any():
            break
        hi = np.where(short, 2.0 * hi, hi)
    x = np.where((x > lo) & (x < hi), x, 0.5 * (lo + hi))

    done = ta == 0
    x = np.where(done, 0.0, x)
    for _ in range(200):
        r = resid(x)
        done = done | (np.abs(r) <= root_tol)
        if done.all():
            break
        lo = np.where(r < 0, x, lo)
        hi = np.where(r > 0, x, hi)
        step = x - r / ordered_pdf(x, ia, n, lam)
        inside = (step > lo) & (step < hi)
        nxt = np.where(inside, step, 0.5 * (lo + hi))
        collapsed = nxt == x
        x = np.where(done, x, nxt)
        done = done | collapsed
    return float(x) if x.ndim == 0 else x
