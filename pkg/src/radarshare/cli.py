"""Command line entry point: ``solve``, ``sweep`` and ``partition``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiment import SweepSpec, emit_csv, emit_table, run_sweep
from .model import ScenarioConfig, generate_channels, load_config
from .optimizer import MODES, SCHEDULES, SolverOptions
from .partition import PartitionInstance, solve_cga
from .selection import SELECTIONS, select


def _solve(args) -> dict:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    ch = generate_channels(cfg, args.seed)
    opts = SolverOptions(mode=args.mode, schedule=args.schedule, grid_points=args.grid_points)
    result = select(ch, cfg, opts, args.selection)
    return {"seed": args.seed, "selection": args.selection, "config": cfg.to_dict(), **result.to_dict()}


def _sweep(args) -> dict:
    data = json.loads(Path(args.config).read_text())
    if args.trials is not None:
        data["trials"] = args.trials
    if args.seed is not None:
        data["seed"] = args.seed
    spec = SweepSpec.from_dict(data)
    rows = run_sweep(spec)
    Path(args.out).write_text(emit_csv(rows))
    if args.table:
        sys.stdout.write(emit_table(rows))
    return {"out": str(args.out), "rows": len(rows), "trials": spec.trials}


def _partition(args) -> dict:
    sol = solve_cga(PartitionInstance(tuple(args.values), args.epsilon))
    values = args.values
    return {"set1": list(sol.set1), "set2": list(sol.set2),
            "set1_values": [values[i] for i in sol.set1], "set2_values": [values[i] for i in sol.set2],
            "difference": sol.difference,
            "nodes_explored": sol.nodes_explored, "terminated_by": sol.terminated_by}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radarshare", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="optimise one channel draw and print the result as JSON")
    p.add_argument("--config", help="scenario JSON (defaults to the built-in scenario)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=MODES, default="noncoherent")
    p.add_argument("--schedule", choices=SCHEDULES, default="greedy1")
    p.add_argument("--selection", choices=SELECTIONS, default="mrs")
    p.add_argument("--grid-points", type=int, default=41)
    p.set_defaults(run=_solve)

    p = sub.add_parser("sweep", help="run a Monte-Carlo sweep and write CSV")
    p.add_argument("--config", required=True, help="sweep JSON: scenario, sweep, algorithms, trials, seed")
    p.add_argument("--out", required=True)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--table", action="store_true", help="also print a text table")
    p.set_defaults(run=_sweep)

    p = sub.add_parser("partition", help="two-way partition of nonnegative numbers")
    p.add_argument("values", type=float, nargs="+")
    p.add_argument("--epsilon", type=float, default=None)
    p.set_defaults(run=_partition)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        record = args.run(args)
    except Exception as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc), "command": args.command}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    if args.command != "sweep" or not args.table:
        json.dump(record, sys.stdout, indent=2)
        sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
