"""Command-line front end.

Exit codes: 0 success, 2 invalid arguments, 3 unsupported model range,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .ensembles import (
    EnsembleSpec,
    SweepRow,
    asymptotics_probe,
    closed_form_two_player,
    correlation_sweep,
    estimate_stats,
    rows_to_csv,
)
from .equilibria import UnsupportedGameError
from .race import (
    RacePayoffMatrix,
    RaceParams,
    classify_region,
    fixation_matrix,
    matrix_to_json,
    race_payoff_matrix,
    stationary_distribution,
    sweep_race,
    sweep_to_csv,
)

EXIT_OK, EXIT_USAGE, EXIT_UNSUPPORTED, EXIT_IO = 0, 2, 3, 4


class UsageError(Exception):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


_GRID = re.compile(r"^\s*([-+0-9.eE]+)\.\.([-+0-9.eE]+)x(\d+)\s*$")


def parse_grid(text: str, flag: str) -> list[float]:
    """``lo..hixCOUNT`` (inclusive endpoints) or a single number."""
    m = _GRID.match(text)
    try:
        if m:
            lo, hi, count = float(m.group(1)), float(m.group(2)), int(m.group(3))
            if count < 1:
                raise ValueError
            return np.linspace(lo, hi, count).tolist() if count > 1 else [lo]
        return [float(text)]
    except ValueError:
        raise UsageError(flag, f"cannot parse grid {text!r}; expected lo..hixCOUNT or a number") from None


def _parse_list(text: str, flag: str, kind=float) -> list:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise UsageError(flag, "empty list")
    try:
        return [kind(t) for t in items]
    except ValueError:
        raise UsageError(flag, f"cannot parse list {text!r}") from None


def _emit(text: str, output: str | None, manifest: dict, started: float) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    path = Path(output)
    path.write_text(text)
    manifest = dict(manifest, version=__version__, duration_seconds=time.perf_counter() - started)
    Path(str(path) + ".manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _positive_int(flag: str, value: int) -> int:
    if value < 1:
        raise UsageError(flag, "must be >= 1")
    return value


def _spec(args, r: float = 0.0) -> EnsembleSpec:
    _positive_int("--trials", args.trials)
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed", "must be a 64-bit unsigned integer")
    if not 0 <= r < 1:
        raise UsageError("--r", "must lie in [0, 1)")
    if args.distribution == "uniform" and r != 0:
        raise UsageError("--r", "correlation requires --distribution normal")
    return EnsembleSpec(args.distribution, r, args.seed, args.trials)


def cmd_equilibria(args) -> int:
    started = time.perf_counter()
    if args.n < 2:
        raise UsageError("--n", "must be >= 2")
    if args.d < 2:
        raise UsageError("--d", "must be >= 2")
    spec = _spec(args, args.r)
    stats = estimate_stats(spec, args.n, args.d, allow_approximate=args.approximate, workers=args.workers)
    if args.d == 2:
        ref = closed_form_two_player(args.n)
        print(f"E({args.n},2): estimate {stats.mean_total:.6g} +- {stats.stderr_total:.2g}, closed form {ref:.6g}", file=sys.stderr)
    if args.format == "json":
        text = stats.to_json(sort_keys=True) + "\n"
    else:
        text = rows_to_csv([SweepRow.from_stats(args.d, stats)])
    manifest = {"command": "equilibria", "parameters": {k: v for k, v in vars(args).items() if k != "func"}, "seed": args.seed}
    _emit(text, args.output, manifest, started)
    return EXIT_OK


def cmd_asymptotics(args) -> int:
    started = time.perf_counter()
    d_values = _parse_list(args.d, "--d", int)
    for d in d_values:
        if not 2 <= d <= 100:
            raise UsageError("--d", f"values must lie in [2, 100], got {d}")
    rows = asymptotics_probe(_spec(args), d_values, workers=args.workers)
    if args.format == "json":
        text = json.dumps([r.__dict__ for r in rows], sort_keys=True) + "\n"
    else:
        text = rows_to_csv(r.as_sweep_row() for r in rows)
    manifest = {"command": "asymptotics", "parameters": {k: v for k, v in vars(args).items() if k != "func"}, "seed": args.seed}
    _emit(text, args.output, manifest, started)
    return EXIT_OK


def cmd_correlation(args) -> int:
    started = time.perf_counter()
    r_values = _parse_list(args.r, "--r")
    for r in r_values:
        if not 0 <= r < 1:
            raise UsageError("--r", f"values must lie in [0, 1), got {r}")
    if r_values != sorted(r_values):
        raise UsageError("--r", "values must be ascending")
    if args.n < 2 or args.d < 2:
        raise UsageError("--n" if args.n < 2 else "--d", "must be >= 2")
    _spec(args)
    rows = correlation_sweep(args.n, args.d, r_values, args.trials, args.seed, workers=args.workers)
    text = rows_to_csv(rows) if args.format == "csv" else json.dumps([r.__dict__ for r in rows], sort_keys=True) + "\n"
    manifest = {"command": "correlation", "parameters": {k: v for k, v in vars(args).items() if k != "func"}, "seed": args.seed}
    _emit(text, args.output, manifest, started)
    return EXIT_OK


_RACE_FLAGS = ("B", "c", "b", "W", "N", "beta_sel")


def _race_params(args) -> RaceParams:
    doc: dict = {}
    if args.params:
        text = Path(args.params).read_text()  # OSError -> exit 4
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError("--params", f"invalid JSON: {exc}") from None
    for key in _RACE_FLAGS:
        if getattr(args, key) is not None:
            doc[key] = getattr(args, key)
    if args.cs_mode is not None:
        doc["cs_opens_safe"] = args.cs_mode == "opens-safe"
    try:
        return RaceParams.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise UsageError("--params", str(exc)) from None


def _matrix_override(text: str) -> RacePayoffMatrix:
    try:
        raw = Path(text).read_text() if Path(text).is_file() else text
        return RacePayoffMatrix(np.array(json.loads(raw), dtype=float))
    except (ValueError, TypeError) as exc:
        raise UsageError("--matrix", f"expected a 3x3 JSON array: {exc}") from None


def cmd_race(args) -> int:
    started = time.perf_counter()
    base = _race_params(args)
    s_values = parse_grid(args.s, "--s") if args.s is not None else [base.s]
    pr_values = parse_grid(args.pr, "--pr") if args.pr is not None else [base.p_r]
    for s in s_values:
        if s < 1:
            raise UsageError("--s", f"speed must be >= 1, got {s}")
    for pr in pr_values:
        if not 0 <= pr <= 1:
            raise UsageError("--pr", f"risk must lie in [0, 1], got {pr}")
    manifest = {"command": "race", "parameters": {k: v for k, v in vars(args).items() if k != "func"}, "seed": None}
    if args.mode == "sweep":
        if args.matrix:
            raise UsageError("--matrix", "not allowed with --mode sweep")
        text = sweep_to_csv(sweep_race(s_values, pr_values, base))
        _emit(text, args.output, manifest, started)
        return EXIT_OK
    if len(s_values) != 1 or len(pr_values) != 1:
        raise UsageError("--s" if len(s_values) != 1 else "--pr", f"mode {args.mode} takes a single value")
    p = replace(base, s=s_values[0], p_r=pr_values[0])
    pm = _matrix_override(args.matrix) if args.matrix else race_payoff_matrix(p)
    if args.mode == "matrix":
        text = matrix_to_json(pm) + "\n"
    elif args.mode == "fixation":
        rho = fixation_matrix(pm, p.N, p.beta_sel)
        text = json.dumps({"N": p.N, "beta_sel": p.beta_sel, "fixation_matrix": rho.tolist()}) + "\n"
    else:
        res = stationary_distribution(pm, p.N, p.beta_sel)
        doc = res.to_dict()
        doc["params"] = p.to_dict()
        doc["region"] = None if args.matrix else classify_region(p, res).value
        text = json.dumps(doc, sort_keys=True) + "\n"
    _emit(text, args.output, manifest, started)
    return EXIT_OK


def _ensemble_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--trials", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--distribution", choices=["normal", "uniform"], default="normal")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--output", "-o")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="egtbench", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("equilibria", help="Monte Carlo statistics of internal equilibria")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--r", type=float, default=0.0)
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.add_argument("--approximate", action="store_true", help="allow grid-newton for small general games")
    _ensemble_flags(sp)
    sp.set_defaults(func=cmd_equilibria)

    sp = sub.add_parser("asymptotics", help="E(2, d) across player counts")
    sp.add_argument("--d", required=True, help="comma-separated player counts")
    sp.add_argument("--format", choices=["json", "csv"], default="csv")
    _ensemble_flags(sp)
    sp.set_defaults(func=cmd_asymptotics)

    sp = sub.add_parser("correlation", help="equilibrium counts versus payoff correlation")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--r", required=True, help="comma-separated ascending correlations")
    sp.add_argument("--format", choices=["json", "csv"], default="csv")
    _ensemble_flags(sp)
    sp.set_defaults(func=cmd_correlation)

    sp = sub.add_parser("race", help="AI race payoffs, fixation, stationary distribution, sweeps")
    sp.add_argument("--mode", choices=["matrix", "fixation", "stationary", "sweep"], default="stationary")
    sp.add_argument("--params", help="JSON file with RaceParams fields")
    sp.add_argument("--B", type=float)
    sp.add_argument("--c", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--W", type=float)
    sp.add_argument("--N", type=int)
    sp.add_argument("--beta-sel", dest="beta_sel", type=float)
    sp.add_argument("--s", help="speed, or grid lo..hixCOUNT in sweep mode")
    sp.add_argument("--pr", help="disaster risk, or grid lo..hixCOUNT in sweep mode")
    sp.add_argument("--cs-mode", choices=["opens-safe", "mirror"])
    sp.add_argument("--matrix", help="3x3 payoff matrix override (JSON text or file)")
    sp.add_argument("--output", "-o")
    sp.set_defaults(func=cmd_race)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"egtbench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnsupportedGameError as exc:
        print(f"egtbench: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except OSError as exc:
        print(f"egtbench: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"egtbench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
