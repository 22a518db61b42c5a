"""Command-line entry point: run learning dynamics and write regret curves."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from .efg import game_indices, load_game
from .evaluation import DynamicsLog, default_checkpoints, gap_from_regrets, run_dynamics
from .learners.oftrl import SolverError
from .phi_regret.deviations import MODES
from .phi_regret.fixed_points import FixedPointError
from .phi_regret.psi import ALGORITHMS

CSV_FIELDS = ("t", "player", "trigger_regret", "external_regret", "avg_regret")


class ConfigError(ValueError):
    pass


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def emit_csv(log: DynamicsLog, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in log.records:
            w.writerow([_fmt(r[k]) for k in CSV_FIELDS])


def summary(log: DynamicsLog) -> dict:
    final = log.final_records()
    return {
        "config": log.config,
        "final": [
            {k: r[k] for k in ("player", "trigger_regret", "external_regret", "avg_regret",
                               "delta_regret", "composed_regret")}
            for r in final
        ],
        # over all T rounds, even when the last checkpoint comes earlier
        "equilibrium_gap": gap_from_regrets(log.final_trigger_regrets, [log.T] * log.num_players),
        "max_fixed_point_residual": float(log.fixed_point_residuals.max()),
        "wall_clock_seconds": log.wall_clock,
    }


def emit_summary(log: DynamicsLog, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(summary(log), fh, indent=2, sort_keys=True)
        fh.write("\n")


def parse_checkpoints(text: str | None, T: int) -> list[int]:
    if text is None or text.strip().lower() == "pow2":
        return default_checkpoints(T)
    try:
        cps = sorted({int(c) for c in text.split(",") if c.strip()})
    except ValueError:
        raise ConfigError(f"--checkpoints: expected a comma list of integers or 'pow2', got {text!r}") from None
    if not cps or cps[0] < 1 or cps[-1] > T:
        raise ConfigError(f"--checkpoints: values must lie in [1, {T}]")
    return cps


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="efce-dynamics",
        description="Run uncoupled trigger-regret learning dynamics on an extensive-form game.",
    )
    p.add_argument("--game", default="micro",
                   help="game spec, e.g. micro, kuhn:players=3,ranks=3, goofspiel:ranks=3, "
                        "sheriff:v=5,p=1,s=1,mmax=5,bmax=2,rounds=2")
    p.add_argument("--alg", default="lrl-oftrl", choices=ALGORITHMS)
    p.add_argument("--mode", default="efce", choices=MODES)
    p.add_argument("--T", type=int, default=1000, help="number of iterations")
    p.add_argument("--eta", type=float, default=1.0, help="learning rate of the trigger learners")
    p.add_argument("--eta-delta", type=float, default=None,
                   help="learning rate of the trigger-mixing learner (default eta / (2 |Sigma_i|) per player)")
    p.add_argument("--checkpoints", default="pow2", help="comma-separated iterations or 'pow2'")
    p.add_argument("--out-csv", default="regrets.csv")
    p.add_argument("--out-json", default="summary.json")
    p.add_argument("--seed", type=int, default=0)
    return p


def _validate(args) -> list[int]:
    if args.T < 1:
        raise ConfigError(f"--T must be a positive integer, got {args.T}")
    if not (math.isfinite(args.eta) and args.eta > 0):
        raise ConfigError(f"--eta must be positive, got {args.eta}")
    if args.eta_delta is not None and not (math.isfinite(args.eta_delta) and args.eta_delta > 0):
        raise ConfigError(f"--eta-delta must be positive, got {args.eta_delta}")
    for flag, path in (("--out-csv", args.out_csv), ("--out-json", args.out_json)):
        parent = Path(path).resolve().parent
        if not parent.is_dir():
            raise ConfigError(f"{flag}: directory {parent} does not exist")
    return parse_checkpoints(args.checkpoints, args.T)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        checkpoints = _validate(args)
        try:
            game = load_game(args.game)
        except ValueError as exc:
            raise ConfigError(f"--game: {exc}") from None
        game_indices(game)
    except ConfigError as exc:
        print(f"efce-dynamics: error: {exc}", file=sys.stderr)
        return 2

    try:
        log = run_dynamics(game, args.alg, args.mode, args.T, eta=args.eta, eta_delta=args.eta_delta,
                           seed=args.seed, checkpoints=checkpoints, game_spec=args.game)
        emit_csv(log, args.out_csv)
        emit_summary(log, args.out_json)
    except (SolverError, FixedPointError, OSError) as exc:
        print(f"efce-dynamics: run failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
