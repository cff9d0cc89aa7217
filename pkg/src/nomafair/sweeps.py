"""Parameter sweeps behind the ``sweep`` subcommand.

Rows come back in grid order whatever the number of worker processes.
Instantaneous-CSI points reuse the same channel draws for every power
level and scheme at a given ``N`` (common random numbers).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Sequence

from .baselines import fixed_noma_outage, tdma_maxmin, tdma_outage
from .maxmin import solve_maxmin
from .model import ChannelRealization, SystemConfig, db_to_linear
from .ordered_channel import sample_gain_matrix
from .outage import solve_minmax_outage

__all__ = ["FIGURES", "RATE_COLUMNS", "OUTAGE_COLUMNS", "run_sweep"]

RATE_COLUMNS = ["n_users", "power_db", "power_linear", "scheme",
                "mean_fairness_rate_bpcu", "num_realizations", "seed"]
OUTAGE_COLUMNS = ["n_users", "power_db", "rate_target_bpcu", "scheme", "minmax_outage"]

FIGURES = {
    "fairness-vs-power": ("noma",),
    "noma-vs-tdma": ("noma", "tdma"),
    "outage-vs-power": ("noma", "tdma", "fixed_noma"),
}


def _rate_point(args) -> List[Dict]:
    n, power_db, schemes, realizations, seed, tol = args
    cfg = SystemConfig(n_users=n, total_power=db_to_linear(power_db), bisect_tol=tol)
    gains = sample_gain_matrix(cfg, realizations, seed)
    chans = [ChannelRealization(row) for row in gains]
    rows = []
    for scheme in schemes:
        solve = solve_maxmin if scheme == "noma" else tdma_maxmin
        mean = math.fsum(solve(ch, cfg).objective for ch in chans) / realizations
        rows.append({"n_users": n, "power_db": power_db, "power_linear": cfg.total_power,
                     "scheme": scheme, "mean_fairness_rate_bpcu": mean,
                     "num_realizations": realizations, "seed": seed})
    return rows


def _outage_point(args) -> List[Dict]:
    n, power_db, rate, schemes, tol = args
    cfg = SystemConfig(n_users=n, total_power=db_to_linear(power_db), target_rate=rate,
                       bisect_tol=tol)
    values = {
        "noma": lambda: solve_minmax_outage(cfg).objective,
        "tdma": lambda: tdma_outage(cfg),
        "fixed_noma": lambda: fixed_noma_outage(cfg).worst,
    }
    return [{"n_users": n, "power_db": power_db, "rate_target_bpcu": rate,
             "scheme": s, "minmax_outage": values[s]()} for s in schemes]


def run_sweep(figure: str, n_values: Sequence[int], powers_db: Sequence[float],
              rates: Sequence[float] = (0.05, 0.5), realizations: int = 1000,
              seed: int = 0, workers: int = 1, tol: float = 1e-6) -> List[Dict]:
    """Evaluate every grid point of ``figure`` and return one dict per row.

    Raises ``ValueError`` on an unknown figure or an empty grid.
    """
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; choose from {sorted(FIGURES)}")
    schemes = FIGURES[figure]
    if not n_values or not powers_db:
        raise ValueError("empty sweep grid")
    if figure == "outage-vs-power":
        if not rates:
            raise ValueError("empty sweep grid")
        tasks = [(n, p, r, schemes, tol) for n in n_values for r in rates for p in powers_db]
        func = _outage_point
    else:
        if realizations < 1:
            raise ValueError("realizations must be >= 1")
        tasks = [(n, p, schemes, realizations, seed, tol) for n in n_values for p in powers_db]
        func = _rate_point
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(func, tasks))
    else:
        chunks = [func(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]
