"""Command-line interface.

Subcommands: validate, opf, run, sweep, quiver.  Player indices on the command
line are 1-based (matching the usual generator numbering); all floats are
printed with 9 significant digits.  Exit codes: 0 success, 1 validation or
parse error, 2 infeasible or degenerate market, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .cases import load_case_file
from .errors import (CaseFormatError, ClearingNotConvergedError,
                     DegenerateMarketError, GridbidError, LpInternalError,
                     OpfInfeasibleError)
from .game import GameEngine
from .market import clearing_price, split_demand
from .network import validate
from .sweep import SweepSpec, run_sweep

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INFEASIBLE = 2
EXIT_INTERNAL = 3

_MODE_ALIASES = {"best": "best_response", "better": "better_response",
                 "best_response": "best_response",
                 "better_response": "better_response"}


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def _parse_prices(text: str, n: int) -> tuple[float, ...]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != n:
        raise ValueError(f"expected {n} comma-separated prices, got {len(parts)}")
    return tuple(float(p) for p in parts)


def _parse_freeze(text: str | None, n: int) -> list[tuple[int, float]]:
    """"3=5,1=2.5" -> [(2, 5.0), (0, 2.5)] (1-based on the command line)."""
    if not text:
        return []
    out = []
    for item in text.split(","):
        if not item.strip():
            continue
        key, _, val = item.partition("=")
        idx = int(key)
        if not 1 <= idx <= n:
            raise ValueError(f"--freeze: player {idx} out of range 1..{n}")
        out.append((idx - 1, float(val)))
    return out


def _parse_axis(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"axis spec must be lo:hi:step, got {text!r}")
    return float(parts[0]), float(parts[1]), float(parts[2])


def _parse_grid(text: str, n: int) -> list[tuple[int, tuple[float, float, float]]]:
    """"1=2.5:4.5:0.5,2=..." -> [(0, (2.5, 4.5, 0.5)), ...]."""
    axes = []
    for item in text.split(","):
        if not item.strip():
            continue
        key, sep, rng = item.partition("=")
        if not sep:
            raise ValueError("grid spec entries must look like PLAYER=lo:hi:step")
        idx = int(key)
        if not 1 <= idx <= n:
            raise ValueError(f"--grid: player {idx} out of range 1..{n}")
        axes.append((idx - 1, _parse_axis(rng)))
    if not axes:
        raise ValueError("empty grid spec")
    return axes


def cmd_validate(args) -> int:
    case = load_case_file(args.case)
    problems = validate(case.network)
    if problems:
        for p in problems:
            print(f"violation: {p}")
        return EXIT_INVALID
    print(f"OK: {case.name or args.case}: {len(case.network.buses)} buses, "
          f"{len(case.network.branches)} branches, "
          f"{len(case.network.generators)} generators, "
          f"{len(case.network.loads)} loads")
    return EXIT_OK


def cmd_opf(args) -> int:
    case = load_case_file(args.case)
    n = len(case.network.generators)
    prices = _parse_prices(args.prices, n)
    engine = GameEngine(case.network, case.market, case.game)
    if args.demand is not None:
        demands = split_demand(args.demand, case.network.loads)
        dispatch = engine.clearing.template.dispatch(prices, demands)
        price = clearing_price(dispatch.supplies, prices)
        iterations = 0
        converged = True
    else:
        state = engine.clearing.state(tuple(prices))
        dispatch = state.dispatch
        demands = state.per_load_demands
        price = state.clearing_price
        iterations = state.iterations_used
        converged = state.converged
        if not converged:
            raise ClearingNotConvergedError(prices, iterations, price)

    if args.json:
        doc = {
            "prices": list(prices),
            "clearing_price": price,
            "total_demand": sum(demands),
            "demands": list(demands),
            "supplies": list(dispatch.supplies),
            "angles": list(dispatch.angles),
            "flows": {f"{i}-{j}": f for (i, j), f in dispatch.flows.items()},
            "dispatch_cost": dispatch.dispatch_cost,
            "clearing_iterations": iterations,
        }
        print(json.dumps(doc, indent=2))
        return EXIT_OK
    print(f"clearing price P = {_fmt(price)}   "
          f"total demand D = {_fmt(sum(demands))} MW   "
          f"(clearing iterations: {iterations})")
    print(f"dispatch cost = {_fmt(dispatch.dispatch_cost)}")
    for g, s in enumerate(dispatch.supplies):
        print(f"  S_{g + 1} = {_fmt(s)} MW")
    for (i, j), f in sorted(dispatch.flows.items()):
        print(f"  flow {i}-{j} = {_fmt(f)} MW")
    for b, th in enumerate(dispatch.angles):
        print(f"  theta_{b} = {_fmt(th)} rad")
    return EXIT_OK


def _write_trajectory(out_dir: Path, traj, cls, freeze_mask, n: int) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "trajectory.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        header = (["round"] + [f"p_{g + 1}" for g in range(n)]
                  + [f"S_{g + 1}" for g in range(n)] + ["P", "D"]
                  + [f"u_{g + 1}" for g in range(n)])
        w.writerow(header)
        for rnd, rec in enumerate(traj.rounds):
            st = rec.clearing_state
            row = ([rnd] + [_fmt(p) for p in rec.prices]
                   + [_fmt(s) for s in st.dispatch.supplies]
                   + [_fmt(st.clearing_price), _fmt(st.total_demand)]
                   + [_fmt(u) for u in rec.utilities])
            w.writerow(row)
    lines = [f'label = "{cls.label}"', f"rounds_used = {cls.rounds_used}"]
    if cls.fixed_point_prices is not None:
        lines.append("fixed_point = ["
                     + ", ".join(_fmt(p) for p in cls.fixed_point_prices) + "]")
    if cls.cycle_period is not None:
        lines.append(f"cycle_period = {cls.cycle_period}")
        for pt in cls.cycle_points:
            lines.append("cycle_point = [" + ", ".join(_fmt(p) for p in pt) + "]")
    if cls.cause:
        lines.append(f'cause = "{cls.cause}"')
    if any(freeze_mask):
        frozen = [str(g + 1) for g, f in enumerate(freeze_mask) if f]
        lines.append("frozen_players = [" + ", ".join(frozen) + "]")
    (out_dir / "summary.toml").write_text("\n".join(lines) + "\n",
                                          encoding="utf-8")


def cmd_run(args) -> int:
    case = load_case_file(args.case)
    n = len(case.network.generators)
    start = list(_parse_prices(args.start, n))
    frozen = _parse_freeze(args.freeze, n)
    freeze_mask = [False] * n
    for g, v in frozen:
        freeze_mask[g] = True
        start[g] = v
    cfg = case.game
    from dataclasses import replace
    changes = {}
    if args.mode:
        changes["mode"] = _MODE_ALIASES[args.mode]
    if args.max_rounds:
        changes["max_rounds"] = args.max_rounds
    if args.order:
        changes["update_order"] = args.order
    if changes:
        cfg = replace(cfg, **changes)

    engine = GameEngine(case.network, case.market, cfg)
    traj, cls = engine.run(tuple(start), tuple(freeze_mask))

    out_dir = Path(args.out)
    _write_trajectory(out_dir, traj, cls, freeze_mask, n)
    terminal = ""
    if cls.fixed_point_prices is not None:
        terminal = " at (" + ", ".join(_fmt(p) for p in cls.fixed_point_prices) + ")"
    elif cls.cycle_period is not None:
        terminal = f" with period {cls.cycle_period}"
    print(f"{cls.label}{terminal} after {cls.rounds_used} rounds; "
          f"wrote {out_dir / 'trajectory.csv'} and {out_dir / 'summary.toml'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    case = load_case_file(args.case)
    n = len(case.network.generators)
    axes = _parse_grid(args.grid, n)
    frozen = _parse_freeze(args.freeze, n)
    spec = SweepSpec(axes=tuple(axes), frozen=tuple(frozen),
                     mode=_MODE_ALIASES[args.mode] if args.mode else None)
    cells = run_sweep(case, spec, jobs=args.jobs, max_rounds=args.max_rounds)

    out_fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out_fh)
        w.writerow([f"start_p_{g + 1}" for g in range(n)]
                   + ["label", "rounds_used", "cycle_period"]
                   + [f"terminal_p_{g + 1}" for g in range(n)] + ["error"])
        for cell in cells:
            term = ([_fmt(p) for p in cell.terminal] if cell.terminal
                    else [""] * n)
            w.writerow([_fmt(p) for p in cell.start]
                       + [cell.label, cell.rounds_used,
                          cell.cycle_period if cell.cycle_period else ""]
                       + term + [cell.error or ""])
    finally:
        if args.out:
            out_fh.close()
    labels = {}
    for cell in cells:
        labels[cell.label] = labels.get(cell.label, 0) + 1
    summary = ", ".join(f"{k}: {v}" for k, v in sorted(labels.items()))
    print(f"{len(cells)} runs -> {summary}", file=sys.stderr)
    return EXIT_OK


def cmd_quiver(args) -> int:
    case = load_case_file(args.case)
    n = len(case.network.generators)
    free = [int(v) - 1 for v in args.free.split(",")]
    if len(free) != 2:
        raise ValueError("--free needs exactly two player indices")
    frozen = _parse_freeze(args.frozen, n)
    base = [0.0] * n
    seen = set(free)
    for g, v in frozen:
        base[g] = v
        seen.add(g)
    if seen != set(range(n)):
        raise ValueError("every player must be either free or frozen")
    specs = [_parse_axis(s) for s in args.grid.split(",") if s.strip()]
    grid = specs[0] if len(specs) == 1 else (specs[0], specs[1])
    from dataclasses import replace
    cfg = case.game if case.game.mode == "better_response" \
        else replace(case.game, mode="better_response")
    engine = GameEngine(case.network, case.market, cfg)
    rows, missing = engine.quiver_field(grid, (free[0], free[1]), tuple(base))

    out_fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out_fh)
        w.writerow([f"p_{free[0] + 1}", f"p_{free[1] + 1}",
                    f"dp_{free[0] + 1}", f"dp_{free[1] + 1}"])
        for a, b, da, db in rows:
            w.writerow([_fmt(a), _fmt(b), _fmt(da), _fmt(db)])
    finally:
        if args.out:
            out_fh.close()
    print(f"{len(rows)} nodes written, {len(missing)} failed", file=sys.stderr)
    for node in missing:
        print(f"missing: ({_fmt(node[0])}, {_fmt(node[1])})", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gridbid",
        description="Iterated generation-bidding game on a DC power network")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a case file")
    p.add_argument("case")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("opf", help="one dispatch at fixed prices")
    p.add_argument("case")
    p.add_argument("--prices", required=True,
                   help="comma-separated price per generator")
    p.add_argument("--demand", type=float, default=None,
                   help="total demand MW (default: from the clearing fixed point)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_opf)

    p = sub.add_parser("run", help="one game trajectory")
    p.add_argument("case")
    p.add_argument("--start", required=True,
                   help="comma-separated initial price per generator")
    p.add_argument("--mode", choices=sorted(_MODE_ALIASES), default=None)
    p.add_argument("--freeze", default=None, metavar="I=V[,I=V...]",
                   help="pin player I (1-based) to price V")
    p.add_argument("--max-rounds", type=int, default=None)
    p.add_argument("--order", choices=("simultaneous", "sequential"), default=None)
    p.add_argument("--out", default="gridbid-run",
                   help="output directory (trajectory.csv, summary.toml)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="grid of independent runs")
    p.add_argument("case")
    p.add_argument("--grid", required=True, metavar="I=LO:HI:STEP[,...]",
                   help="start-price axis per free player (1-based)")
    p.add_argument("--mode", choices=sorted(_MODE_ALIASES), default=None)
    p.add_argument("--freeze", default=None, metavar="I=V[,I=V...]")
    p.add_argument("--max-rounds", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("quiver", help="better-response displacement field")
    p.add_argument("case")
    p.add_argument("--free", required=True, metavar="I,J",
                   help="the two free players (1-based)")
    p.add_argument("--frozen", default=None, metavar="I=V[,I=V...]")
    p.add_argument("--grid", required=True, metavar="LO:HI:STEP[,LO:HI:STEP]",
                   help="node grid (one spec for both axes, or two)")
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.set_defaults(func=cmd_quiver)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        if exc.code in (None, 0):
            return EXIT_OK
        return EXIT_INVALID
    try:
        return args.func(args)
    except (CaseFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OpfInfeasibleError, DegenerateMarketError,
            ClearingNotConvergedError) as exc:
        if isinstance(exc, OpfInfeasibleError):
            print(f"error: {exc} (total effective capacity "
                  f"{exc.total_capacity:.9g} MW)", file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (LpInternalError, GridbidError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
