"""Command-line front end.

Three subcommands: ``estimate`` scores one test against a persisted
learner state, ``simulate`` reproduces the simulation-study tables and
figures as CSV, and ``compare`` runs all three estimators on one test.
Exit codes: 0 success, 2 input/validation error, 1 internal error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .baselines import GaussianBelief, bme_estimate, mle_estimate
from .estimator import (
    AbilityState,
    TestResponse,
    estimate_current_ability,
    process_test,
)
from .experiments import (
    TRAJECTORY_WINDOWS,
    learning_grid,
    table1_grid,
    table2_grid,
    trajectory_runs,
)
from .irt import Item
from .simulator import ESTIMATORS, run_experiment

DEFAULT_SEED = 7


class InputError(Exception):
    """User-facing input or validation problem; maps to exit code 2."""


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    tool_version: str
    started: str
    finished: str

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(self.__dict__, indent=2) + "\n")


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.6f}"


def _read_csv(path: str, expected_header: list[str]) -> list[list[str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except csv.Error as exc:
        raise InputError(f"malformed CSV in {path}: {exc}") from exc
    if not rows or rows[0] != expected_header:
        raise InputError(
            f"{path}: expected header {','.join(expected_header)!r}, "
            f"got {','.join(rows[0]) if rows else '<empty file>'!r}"
        )
    return rows[1:]


def _load_test(items_path: str, responses_path: str) -> TestResponse:
    bank: dict[str, Item] = {}
    for row in _read_csv(items_path, ["item_id", "difficulty"]):
        if len(row) != 2:
            raise InputError(f"{items_path}: malformed row {row!r}")
        item_id, raw = row
        if item_id in bank:
            raise InputError(f"{items_path}: duplicate item id {item_id!r}")
        try:
            difficulty = float(raw)
        except ValueError as exc:
            raise InputError(
                f"{items_path}: difficulty for {item_id!r} is not a number: {raw!r}"
            ) from exc
        try:
            bank[item_id] = Item(id=item_id, difficulty=difficulty)
        except ValueError as exc:
            raise InputError(str(exc)) from exc

    items: list[Item] = []
    correct: list[bool] = []
    for row in _read_csv(responses_path, ["item_id", "correct"]):
        if len(row) != 2:
            raise InputError(f"{responses_path}: malformed row {row!r}")
        item_id, raw = row
        if item_id not in bank:
            raise InputError(f"{responses_path}: unknown item id {item_id!r}")
        if raw not in ("0", "1"):
            raise InputError(
                f"{responses_path}: correct must be 0 or 1 for {item_id!r}, got {raw!r}"
            )
        items.append(bank[item_id])
        correct.append(raw == "1")
    if not items:
        raise InputError(f"{responses_path}: no responses")
    return TestResponse(items=tuple(items), correct=tuple(correct))


def _cmd_estimate(args: argparse.Namespace) -> int:
    test = _load_test(args.items, args.responses)
    state_path = Path(args.state)
    if state_path.exists():
        try:
            state = AbilityState.from_json(state_path.read_text())
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"{args.state}: bad state file: {exc}") from exc
    else:
        state = AbilityState(n_window=args.n)
    try:
        new_state = process_test(state, test, r=args.r, c=args.c)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    state_path.write_text(new_state.to_json() + "\n")
    est, blended = new_state.history[-1]
    print(
        f"ability={blended:.6f} estimate={est.mean:.6f} "
        f"variance={est.variance:.6f} s={est.s_used:.6f}"
    )
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    test = _load_test(args.items, args.responses)
    try:
        prior = GaussianBelief(mu=args.prior_mu, sigma=args.prior_sigma)
        proposed = estimate_current_ability(test, r=args.r, c=args.c).mean
        mle = mle_estimate(test)
        bme = bme_estimate(test, prior).mu
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    print(f"proposed={proposed:.6f} mle={mle:.6f} bme={bme:.6f}")
    return 0


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _cmd_simulate(args: argparse.Namespace) -> int:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {args.out!r}: {exc}") from exc
    seed = args.seed
    started = _utcnow()
    config: dict = {"experiment": args.experiment, "reps": args.reps, "seed": seed}

    if args.experiment == "table1":
        summary = run_experiment(table1_grid(args.reps, seed), parallelism=args.jobs)
        rows = [
            [str(d), str(n), _fmt(cell.mean_convergence_point), _fmt(cell.rmse)]
            for (d, n), cell in sorted(summary.cells.items())
        ]
        _write_csv(out / "table1.csv", ["d", "n", "mean_convergence", "rmse"], rows)

    elif args.experiment == "table2":
        estimators = [args.estimator] if args.estimator else list(ESTIMATORS)
        config["estimators"] = estimators
        for est in estimators:
            summary = run_experiment(table2_grid(est, args.reps, seed), parallelism=args.jobs)
            rows = [
                [str(a), str(t), _fmt(cell.rmse)]
                for (a, t), cell in sorted(summary.cells.items())
            ]
            _write_csv(out / f"table2_{est}.csv", ["ability", "difficulty", "rmse"], rows)

    elif args.experiment == "trajectory":
        config.update(
            {"truth_grade": args.truth_grade, "initial_grade": args.initial_grade}
        )
        runs = trajectory_runs(
            seed=seed,
            truth_grade=args.truth_grade,
            initial_grade=args.initial_grade,
        )
        for n, traj in runs.items():
            rows = [
                [str(i), f"{t:.6f}", f"{e:.6f}"]
                for i, (t, e) in enumerate(zip(traj.true_abilities, traj.estimates))
            ]
            _write_csv(out / f"trajectory_n{n}.csv", ["test_index", "truth", "estimate"], rows)

    elif args.experiment == "learning":
        config["spread_is_variance"] = args.spread_is_variance
        summary = run_experiment(
            learning_grid(args.reps, seed, spread_is_variance=args.spread_is_variance),
            parallelism=args.jobs,
        )
        rows = [
            [profile, str(n), _fmt(cell.mean_convergence_point), _fmt(cell.rmse)]
            for (profile, n), cell in sorted(summary.cells.items())
        ]
        _write_csv(out / "learning.csv", ["profile", "n", "mean_convergence", "rmse"], rows)

    manifest = RunManifest(
        command=f"simulate {args.experiment}",
        config=config,
        seed=seed,
        tool_version=__version__,
        started=started,
        finished=_utcnow(),
    )
    manifest.write(out / "manifest.json")
    return 0


def _env_seed() -> int:
    raw = os.environ.get("ACQUEST_SEED")
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"ACQUEST_SEED must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acquest",
        description="Grade-scale ability estimation and simulation experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="score one test and update a learner state")
    p_est.add_argument("--items", required=True, help="CSV with header item_id,difficulty")
    p_est.add_argument("--responses", required=True, help="CSV with header item_id,correct")
    p_est.add_argument("--state", required=True, help="learner state JSON (created if missing)")
    p_est.add_argument("--r", type=float, default=0.5, help="population proportion (default 0.5)")
    p_est.add_argument("--c", type=float, default=0.01, help="smoothing constant (default 0.01)")
    p_est.add_argument(
        "--n", type=int, default=12, help="EMA window for newly created states (default 12)"
    )
    p_est.set_defaults(func=_cmd_estimate)

    p_sim = sub.add_parser("simulate", help="run a canned simulation experiment")
    p_sim.add_argument(
        "experiment", choices=["table1", "table2", "trajectory", "learning"]
    )
    p_sim.add_argument("--reps", type=int, default=1000, help="replications per cell")
    p_sim.add_argument(
        "--seed", type=int, default=None, help="master seed (or ACQUEST_SEED env var)"
    )
    p_sim.add_argument("--out", default=".", help="output directory (default .)")
    p_sim.add_argument(
        "--estimator",
        choices=list(ESTIMATORS),
        default=None,
        help="restrict table2 to one estimator (default: all three)",
    )
    p_sim.add_argument(
        "--spread-is-variance",
        action="store_true",
        help="read the learning-factor spread as a variance instead of an sd",
    )
    p_sim.add_argument("--truth-grade", type=int, default=6, help="trajectory truth grade")
    p_sim.add_argument("--initial-grade", type=int, default=1, help="trajectory initial grade")
    p_sim.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_cmp = sub.add_parser("compare", help="run all three estimators on one test")
    p_cmp.add_argument("--items", required=True)
    p_cmp.add_argument("--responses", required=True)
    p_cmp.add_argument("--prior-mu", type=float, default=3.0)
    p_cmp.add_argument("--prior-sigma", type=float, default=1.0)
    p_cmp.add_argument("--r", type=float, default=0.5)
    p_cmp.add_argument("--c", type=float, default=0.01)
    p_cmp.set_defaults(func=_cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate" and args.seed is None:
            args.seed = _env_seed()
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
