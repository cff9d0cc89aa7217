"""Command-line front end.

Subcommands: ``maxmin``, ``outage``, ``baselines``, ``sweep``, ``validate``.
Exit codes: 0 success, 1 statistical validation failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Dict, List, Optional

import numpy as np

from .baselines import fixed_noma_allocation, fixed_noma_outage, tdma_maxmin, tdma_outage
from .maxmin import solve_maxmin
from .model import ChannelRealization, InvalidConfig, PowerAllocation, SystemConfig, db_to_linear
from .montecarlo import estimate_outage
from .noma_core import outage_probabilities, own_rates
from .ordered_channel import sample_gains
from .outage import solve_minmax_outage
from .sweeps import FIGURES, OUTAGE_COLUMNS, RATE_COLUMNS, run_sweep

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE = 0, 1, 2

# config-file keys -> SystemConfig fields (plus gains/seed/power_db)
_KEY_ALIASES = {
    "n": "n_users", "n_users": "n_users",
    "power": "total_power", "total_power": "total_power",
    "power_db": "power_db",
    "rate": "target_rate", "target_rate": "target_rate",
    "sigma_h2": "channel_variance", "channel_variance": "channel_variance",
    "noise": "noise_variance", "noise_variance": "noise_variance",
    "tol": "bisect_tol", "bisect_tol": "bisect_tol",
    "root_tol": "root_tol", "max_iters": "max_iters",
    "gains": "gains", "seed": "seed",
}


class UsageError(Exception):
    pass


def fmt(x: float) -> float:
    """Round to 9 significant digits for output."""
    return float(f"{x:.9g}")


def _fmt_list(values) -> List[float]:
    return [fmt(v) for v in np.asarray(values, dtype=float).tolist()]


def read_config_file(path: str) -> Dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    values = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _KEY_ALIASES:
            raise UsageError(f"{path}:{lineno}: bad config line {raw.strip()!r}")
        values[_KEY_ALIASES[key]] = value.strip()
    return values


def _parse_float_list(text: str, what: str) -> List[float]:
    try:
        items = [float(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise UsageError(f"malformed {what} list: {text!r}") from None
    if not items:
        raise UsageError(f"empty {what} list")
    return items


def _parse_int_list(text: str, what: str) -> List[int]:
    out = []
    for v in _parse_float_list(text, what):
        if v != int(v):
            raise UsageError(f"{what} must be integers: {text!r}")
        out.append(int(v))
    return out


def parse_db_grid(text: str) -> List[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list of dB values."""
    if ":" in text:
        try:
            start, stop, step = (float(v) for v in text.split(":"))
        except ValueError:
            raise UsageError(f"malformed power grid {text!r}") from None
        if step <= 0 or stop < start:
            raise UsageError(f"empty power grid {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 10) for k in range(count)]
    return _parse_float_list(text, "power")


def _parse_samples(text: str) -> int:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid sample count {text!r}") from None
    if v != int(v) or v < 1:
        raise argparse.ArgumentTypeError(f"sample count must be a positive integer, got {text!r}")
    return int(v)


def build_config(args, need_rate: bool = True):
    """Merge config file and flags; returns ``(cfg, gains or None, seed)``."""
    values = read_config_file(args.config) if args.config else {}
    flag_map = {
        "n_users": args.n, "total_power": args.power, "power_db": args.power_db,
        "target_rate": args.rate, "channel_variance": args.sigma_h2,
        "noise_variance": args.noise, "bisect_tol": args.tol, "root_tol": args.root_tol,
        "max_iters": args.max_iters, "gains": args.gains, "seed": args.seed,
    }
    for key, value in flag_map.items():
        if value is not None:
            values[key] = value
    if "power_db" in values and "total_power" not in values:
        values["total_power"] = db_to_linear(float(values.pop("power_db")))
    values.pop("power_db", None)

    gains = None
    if values.get("gains") is not None:
        gains = _parse_float_list(str(values.pop("gains")), "gains")
    values.pop("gains", None)
    try:
        seed = int(values.pop("seed", 0))
    except ValueError:
        raise UsageError("seed must be an integer") from None
    if seed < 0 or seed >= 2 ** 64:
        raise UsageError("seed must be an unsigned 64-bit integer")

    kwargs = {}
    try:
        for key, value in values.items():
            kwargs[key] = int(value) if key in ("n_users", "max_iters") else float(value)
    except ValueError:
        raise UsageError(f"{key}: malformed value {value!r}") from None
    if gains is not None:
        if "n_users" in kwargs and kwargs["n_users"] != len(gains):
            raise UsageError(f"--n {kwargs['n_users']} does not match {len(gains)} gains")
        kwargs["n_users"] = len(gains)
    kwargs.setdefault("total_power", 10.0)
    if "n_users" not in kwargs:
        raise UsageError("number of users not given (use --n or --gains)")
    cfg = SystemConfig(**kwargs)
    return cfg, gains, seed


def _channel(cfg, gains, seed) -> ChannelRealization:
    if gains is not None:
        return ChannelRealization.from_unsorted(gains)
    return sample_gains(cfg, seed)


def cmd_maxmin(args) -> Dict:
    cfg, gains, seed = build_config(args)
    chan = _channel(cfg, gains, seed)
    res = solve_maxmin(chan, cfg)
    return {
        "t_star": fmt(res.objective),
        "beta": _fmt_list(res.allocation.beta),
        "iterations": res.iterations,
        "converged": res.converged,
        "bracket_width": fmt(res.bracket_width),
        "per_user_rates": _fmt_list(own_rates(res.allocation.beta, chan.gains, cfg)),
        "gains": _fmt_list(chan.gains),
    }


def cmd_outage(args) -> Dict:
    cfg, _, _ = build_config(args)
    res = solve_minmax_outage(cfg)
    return {
        "t_star": fmt(res.objective),
        "beta": _fmt_list(res.allocation.beta),
        "zeta": _fmt_list(res.thresholds),
        "feasible": not res.infeasible_at_full_power,
        "per_user_outage": _fmt_list(outage_probabilities(res.allocation, cfg)),
        "iterations": res.iterations,
        "converged": res.converged,
        "bracket_width": fmt(res.bracket_width),
    }


def cmd_baselines(args) -> Dict:
    cfg, gains, seed = build_config(args)
    fixed = fixed_noma_outage(cfg)
    report = {
        "outage": {
            "noma_optimal": fmt(solve_minmax_outage(cfg).objective),
            "tdma_equal_split": fmt(tdma_outage(cfg)),
            "fixed_noma": fmt(fixed.worst),
            "fixed_noma_per_user": _fmt_list(fixed.per_user),
            "fixed_noma_beta": _fmt_list(fixed.allocation.beta),
        }
    }
    chan = _channel(cfg, gains, seed)
    report["maxmin"] = {
        "gains": _fmt_list(chan.gains),
        "noma": fmt(solve_maxmin(chan, cfg).objective),
        "tdma": fmt(tdma_maxmin(chan, cfg).objective),
        "tdma_fixed_slot_power": fmt(tdma_maxmin(chan, cfg, fixed_slot_power=True).objective),
    }
    return report


def cmd_sweep(args) -> str:
    n_default = "5" if args.figure == "outage-vs-power" else "5,10,20"
    try:
        rows = run_sweep(
            args.figure,
            _parse_int_list(args.n if args.n is not None else n_default, "n"),
            parse_db_grid(args.power_db),
            rates=_parse_float_list(args.rate, "rate"),
            realizations=args.realizations,
            seed=args.seed if args.seed is not None else 0,
            workers=args.workers,
            tol=args.tol if args.tol is not None else 1e-6,
        )
    except (ValueError, InvalidConfig) as exc:
        raise UsageError(str(exc)) from None
    columns = OUTAGE_COLUMNS if args.figure == "outage-vs-power" else RATE_COLUMNS
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([f"{row[c]:.9g}" if isinstance(row[c], float) else row[c]
                         for c in columns])
    return buf.getvalue()


def validation_scenarios(selector: str):
    """Yield ``(name, cfg, allocation)`` for the closed-form vs MC checks."""
    if selector in ("single", "all"):
        yield "single N=1 P=10 r0=1", SystemConfig(1, 10.0, 1.0), PowerAllocation([1.0])
    for power in (10.0, 100.0):
        for rate in (0.05, 0.5):
            cfg = SystemConfig(5, power, rate)
            tag = f"N=5 P={power:g} r0={rate:g}"
            if selector in ("fixed", "all"):
                yield f"fixed {tag}", cfg, fixed_noma_allocation(5)
            if selector in ("optimal", "all"):
                yield f"optimal {tag}", cfg, solve_minmax_outage(cfg).allocation


def cmd_validate(args):
    seed = args.seed if args.seed is not None else 0
    results = []
    failed = False
    max_abs = max_rel = 0.0
    for name, cfg, alloc in validation_scenarios(args.scenario):
        closed = outage_probabilities(alloc, cfg, lam=cfg.fading_rate * args.corrupt_lambda)
        stats = estimate_outage(alloc, cfg, args.samples, seed, workers=args.workers)
        band = stats.sigma_band(closed)
        delta = np.abs(stats.per_user_outage - closed)
        ok = bool(np.all(delta <= band))
        failed |= not ok
        max_abs = max(max_abs, float(delta.max()))
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(closed > 0, delta / closed, 0.0)
        max_rel = max(max_rel, float(rel.max()))
        results.append({
            "scenario": name,
            "closed_form": _fmt_list(closed),
            "monte_carlo": _fmt_list(stats.per_user_outage),
            "three_sigma": _fmt_list(band),
            "pass": ok,
        })
    report = {"samples": args.samples, "seed": seed, "scenarios": results,
              "max_abs_error": fmt(max_abs), "max_rel_error": fmt(max_rel),
              "pass": not failed}
    if args.json:
        text = json.dumps(report, indent=2) + "\n"
    else:
        lines = [f"closed form vs Monte Carlo, {args.samples} samples, seed {seed}"]
        for r in results:
            lines.append(f"[{'PASS' if r['pass'] else 'FAIL'}] {r['scenario']}")
            for u, (c, m, b) in enumerate(zip(r["closed_form"], r["monte_carlo"],
                                              r["three_sigma"]), 1):
                lines.append(f"    user {u}: closed {c:.9g}  mc {m:.9g}  3sigma {b:.3g}")
        lines.append(f"max abs error {max_abs:.3g}, max rel error {max_rel:.3g}")
        lines.append("PASS" if not failed else "FAIL")
        text = "\n".join(lines) + "\n"
    return text, (EXIT_VALIDATION if failed else EXIT_OK)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="random seed (unsigned 64-bit)")
    common.add_argument("--tol", type=float, help="bisection tolerance")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--json", action="store_true", help="JSON output where optional")

    system = argparse.ArgumentParser(add_help=False)
    system.add_argument("--config", help="key=value configuration file")
    system.add_argument("--n", type=int, help="number of users")
    system.add_argument("--power", type=float, help="total transmit power (linear)")
    system.add_argument("--power-db", type=float, help="total transmit power in dB")
    system.add_argument("--rate", type=float, help="target rate r0 in BPCU")
    system.add_argument("--sigma-h2", type=float, help="channel variance")
    system.add_argument("--noise", type=float, help="noise variance")
    system.add_argument("--gains", help="comma-separated channel power gains")
    system.add_argument("--root-tol", type=float)
    system.add_argument("--max-iters", type=int)

    parser = argparse.ArgumentParser(prog="nomafair",
                                     description="Fair power allocation for NOMA downlink")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("maxmin", parents=[common, system],
                   help="max-min rate allocation for one channel realization")
    sub.add_parser("outage", parents=[common, system],
                   help="min-max outage allocation under average CSI")
    sub.add_parser("baselines", parents=[common, system],
                   help="compare optimal NOMA with TDMA and fixed NOMA")

    sw = sub.add_parser("sweep", parents=[common], help="parameter sweep written as CSV")
    sw.add_argument("figure", choices=sorted(FIGURES))
    sw.add_argument("--n", help="comma-separated user counts")
    sw.add_argument("--power-db", default="0:40:5", help="start:stop:step or list, in dB")
    sw.add_argument("--rate", default="0.05,0.5", help="target rates for outage sweeps")
    sw.add_argument("--realizations", type=int, default=1000)
    sw.add_argument("--workers", type=int, default=1)

    va = sub.add_parser("validate", parents=[common], help="closed forms vs Monte Carlo")
    va.add_argument("--samples", type=_parse_samples, default=1_000_000)
    va.add_argument("--scenario", choices=["all", "single", "fixed", "optimal"], default="all")
    va.add_argument("--workers", type=int, default=1)
    va.add_argument("--corrupt-lambda", type=float, default=1.0,
                    help=argparse.SUPPRESS)
    return parser


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = EXIT_OK
        if args.command == "sweep":
            text = cmd_sweep(args)
        elif args.command == "validate":
            text, code = cmd_validate(args)
        else:
            handler = {"maxmin": cmd_maxmin, "outage": cmd_outage,
                       "baselines": cmd_baselines}[args.command]
            text = json.dumps(handler(args), indent=2) + "\n"
        _emit(text, args.out)
        return code
    except (UsageError, InvalidConfig) as exc:
        print(f"nomafair {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"nomafair {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
