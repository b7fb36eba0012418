"""
Command-line entry point.

    surfdist solve PROBLEM [--out PATH] [--trajectory PATH] [--seed N] ...
    surfdist oracle PROBLEM [--per-axis N | --counts-a ... --counts-b ...] [--compare]

PROBLEM is a problem document path or ``builtin:NAME``. Results are JSON
records on stdout (or --out), logs go to stderr. Flags override document
fields, which override defaults; a solve record carries the effective
settings as document sections, so the record alone reproduces the run.
Trajectories requested by the document alone go into the record.

Exit status: 0 converged, 1 input error, 2 not converged or numeric failure.
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import __version__
from .errors import AllStartsFailed, GeometryError, InputError, SolverError
from .oracle import DEFAULT_CAP, GridSpec, grid_min_distance
from .problem import ProblemDocument, config_sections, load_problem
from .solver import SolveResult, SolverConfig, best_of, multi_start, solve

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FAILED = 2

DEFAULT_PER_AXIS = 100


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", help="problem document (JSON) or builtin:NAME")
    common.add_argument("--out", help="write the result record here instead of stdout")
    common.add_argument("--seed", type=int, help="seed for multi-start and re-seeding")
    common.add_argument("--starts", type=int, help="number of multi-start seeds")
    common.add_argument("--max-steps", type=int, help="step cap per trajectory")
    common.add_argument("--dt", type=float, help="integration step")
    common.add_argument("--workers", type=int, help="threads for multi-start")
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for progress, -vv for debug output"
    )

    parser = argparse.ArgumentParser(
        prog="surfdist",
        description="Minimum distance between two parametric surfaces by damped mechanical dynamics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    solve_cmd = commands.add_parser("solve", parents=[common], help="run the dynamics solver")
    solve_cmd.add_argument("--trajectory", help="write the sampled trajectory as CSV")
    solve_cmd.set_defaults(handler=run_solve)

    oracle_cmd = commands.add_parser("oracle", parents=[common], help="run the grid oracle")
    grid = oracle_cmd.add_mutually_exclusive_group()
    grid.add_argument("--per-axis", type=int, help=f"samples per parameter (default {DEFAULT_PER_AXIS})")
    grid.add_argument("--counts-a", type=int, nargs="+", help="samples per parameter of surface_a")
    oracle_cmd.add_argument("--counts-b", type=int, nargs="+", help="samples per parameter of surface_b")
    oracle_cmd.add_argument("--cap", type=float, default=DEFAULT_CAP, help="maximum pair evaluations")
    oracle_cmd.add_argument("--compare", action="store_true", help="also run the solver and report the gap")
    oracle_cmd.set_defaults(handler=run_oracle)
    return parser


def _config(problem: ProblemDocument, args: argparse.Namespace, **extra) -> SolverConfig:
    return problem.config.replace(
        seed=args.seed,
        starts=args.starts,
        max_steps=args.max_steps,
        dt=args.dt,
        workers=args.workers,
        **extra,
    )


def _run_solver(problem: ProblemDocument, config: SolverConfig) -> Tuple[SolveResult, int]:
    """Single start when the document fixes one, multi-start otherwise."""
    try:
        if problem.initial is not None:
            result = solve(problem.surfaces, config=config, initial=problem.initial)
        else:
            result = multi_start(problem.surfaces, config=config)
    except AllStartsFailed as exc:
        if not exc.results:
            raise
        logger.warning("%s; reporting the best unconverged start", exc)
        return best_of(exc.results), EXIT_FAILED
    return result, EXIT_OK if result.converged else EXIT_FAILED


def _emit(record: Dict[str, Any], out: Optional[str]) -> None:
    text = json.dumps(record, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def trajectory_header(dim: int) -> List[str]:
    return ["time"] + [f"q{i}" for i in range(1, dim + 1)] + ["r", "E"]


def write_trajectory(path: str, result: SolveResult) -> None:
    """CSV with columns time, q1..q{n+m}, r, E."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(trajectory_header(result.minimizer.shape[0]))
        for sample in result.trajectory:
            writer.writerow([repr(sample.time), *map(repr, sample.q.tolist()), repr(sample.r), repr(sample.energy)])


def run_solve(args: argparse.Namespace) -> int:
    problem = load_problem(args.problem)
    config = _config(problem, args, record_trajectory=True if args.trajectory else None)
    result, status = _run_solver(problem, config)
    record = result.to_record()
    record["problem"] = args.problem
    record["settings"] = config_sections(config)
    if config.record_trajectory and not args.trajectory:
        record["trajectory"] = [sample.to_record() for sample in result.trajectory]
    _emit(record, args.out)
    if args.trajectory:
        write_trajectory(args.trajectory, result)
    return status


def run_oracle(args: argparse.Namespace) -> int:
    problem = load_problem(args.problem)
    surface_a, surface_b = problem.surfaces
    if (args.counts_a is None) != (args.counts_b is None):
        raise InputError("--counts-a and --counts-b must be given together")
    if args.counts_a is not None:
        grid = GridSpec.from_counts(surface_a, surface_b, args.counts_a, args.counts_b, args.cap)
    else:
        grid = GridSpec.uniform(surface_a, surface_b, args.per_axis or DEFAULT_PER_AXIS, args.cap)

    oracle = grid_min_distance(surface_a, surface_b, grid)
    record = oracle.to_record()
    record["problem"] = args.problem
    status = EXIT_OK
    if args.compare:
        result, status = _run_solver(problem, _config(problem, args))
        gap = abs(result.distance - oracle.distance)
        record.update(
            solver_distance=result.distance,
            solver_converged=result.converged,
            agreement_gap=gap,
            within_resolution=gap <= oracle.resolution,
        )
    _emit(record, args.out)
    return status


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.handler(args)
    except InputError as exc:
        print(f"surfdist: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GeometryError as exc:
        state = getattr(exc, "state", None)
        where = "" if state is None else f" at state {_describe_state(state)}"
        print(f"surfdist: numeric failure{where}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except SolverError as exc:
        print(f"surfdist: {exc}", file=sys.stderr)
        return EXIT_FAILED


def _describe_state(state: Any) -> str:
    q = getattr(state, "q", state)
    try:
        return json.dumps(list(map(float, q)))
    except TypeError:
        return repr(state)


if __name__ == "__main__":
    sys.exit(main())
