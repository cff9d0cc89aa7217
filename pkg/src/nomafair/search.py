"""Bracket searches over a scalar level with a monotone feasibility test."""

from __future__ import annotations

import math
from typing import Callable, Tuple

__all__ = ["bisect_levels", "refine_boundary"]


def bisect_levels(excess: Callable[[float], float], lo: float, hi: float, tol: float,
                  max_iters: int, feasible_low: bool = True) -> Tuple[float, float, int]:
    """Bisection on the level ``t`` until ``hi - lo < tol``.

    ``excess(t) <= 0`` means ``t`` is feasible. With ``feasible_low`` the
    feasible levels lie below the boundary (max-min rate), otherwise above it
    (min-max outage). Returns the final ``(lo, hi, iterations)``.
    """
    it = 0
    while hi - lo >= tol and it < max_iters:
        mid = 0.5 * (lo + hi)
        ok = excess(mid) <= 0
        if ok == feasible_low:
            lo = mid
        else:
            hi = mid
        it += 1
    return lo, hi, it


def refine_boundary(excess: Callable[[float], float], lo: float, hi: float,
                    feasible_low: bool = True, max_evals: int = 100) -> float:
    """Locate the feasibility boundary inside ``[lo, hi]`` to double precision.

    Illinois-modified regula falsi that keeps a feasible and an infeasible
    end; the feasible end is returned, so the answer never crosses the
    boundary. ``excess`` must be continuous and change sign on the bracket.
    """
    f_lo, f_hi = excess(lo), excess(hi)
    feas, infeas = (lo, hi) if feasible_low else (hi, lo)
    f_feas, f_infeas = (f_lo, f_hi) if feasible_low else (f_hi, f_lo)
    if f_feas > 0:
        raise ValueError("refine_boundary: feasible end has positive excess")
    if f_infeas <= 0:
        # the whole bracket is feasible; its far end is the better level
        return infeas
    if f_feas == 0:
        return feas
    side = 0
    for _ in range(max_evals):
        if abs(infeas - feas) <= 4 * math.ulp(max(abs(feas), abs(infeas))):
            break
        t = feas - f_feas * (infeas - feas) / (f_infeas - f_feas)
        if not (min(feas, infeas) < t < max(feas, infeas)):
            t = 0.5 * (feas + infeas)
        f_t = excess(t)
        if f_t <= 0:
            feas, f_feas = t, f_t
            if f_t == 0:
                break
            if side == -1:
                f_infeas *= 0.5
            side = -1
        else:
            infeas, f_infeas = t, f_t
            if side == 1:
                f_feas *= 0.5
            side = 1
    return feas
