"""Command-line entry point.

Exit codes: 0 success or match, 1 semantic failure (bound mismatch, no
violation found), 2 usage, I/O or domain error.
"""
import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from bellbound import __version__
from bellbound.config import settings
from bellbound.exceptions import BellboundError, CapacityError
from bellbound.schemas.experiments import beats_bound
from bellbound.schemas.quantum import QuantumModel, SeesawConfig
from bellbound.schemas.scenario import BellFunctional
from bellbound.schemas.strategy import BoundResult, OneBitStrategy
from bellbound.services.classical_bounds import ClassicalBounds
from bellbound.services.experiments import SIGMA_COUNT, SIGMA_MAX, SIGMA_MIN, ExperimentService, default_sigma_grid
from bellbound.services.games import GameService
from bellbound.services.ns_lp import NoSignalingBounds
from bellbound.services.quantum import QuantumService
from bellbound.services.seesaw import SeesawOptimizer

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2

BOUND_KINDS = ("local", "onebit", "ns")


def _load_functional(path: str) -> BellFunctional:
    return BellFunctional.model_validate_json(Path(path).read_text())


def _write_text(path: str, text: str) -> None:
    Path(path).write_text(text + "\n")


def _exact(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def _strategy_line(result: BoundResult) -> str:
    strategy = result.witness()
    if isinstance(strategy, OneBitStrategy):
        bob = " ".join(f"{b0}{b1}" for b0, b1 in strategy.bob_outputs)
        return (f"  f={','.join(map(str, strategy.alice_outputs))} "
                f"h={''.join(map(str, strategy.comm))} g={bob}")
    return (f"  f={','.join(map(str, strategy.alice_outputs))} "
            f"g={','.join(map(str, strategy.bob_outputs))}")


def _seesaw_config(args: argparse.Namespace, restarts: int) -> SeesawConfig:
    return SeesawConfig(
        restarts=restarts,
        sweeps_max=args.sweeps_max,
        improvement_tol=args.tol,
        rng_seed=args.seed,
    )


def cmd_game(args: argparse.Namespace) -> int:
    game = GameService.make_xor_game(args.d, args.bob_inputs)
    _write_text(args.out, game.model_dump_json())
    dimension = game.scenario.probability_dimension()
    logger.info("Wrote XOR-%d game with %d Bob inputs to %s", args.d, args.bob_inputs, args.out)
    if args.json:
        print(json.dumps({"path": args.out, "scenario": str(game.scenario), "probability_dimension": dimension}))
    else:
        print(f"{game.scenario} probability dimension {dimension}")
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace) -> int:
    functional = _load_functional(args.functional)
    which = args.which or list(BOUND_KINDS)
    record = {}
    lines = []
    if "local" in which:
        local = ClassicalBounds.local_bound(functional)
        record["local"] = local.model_dump()
        lines += [f"local {local.value}", _strategy_line(local)]
    if "onebit" in which:
        onebit = ClassicalBounds.one_bit_bound(functional, workers=args.threads)
        record["onebit"] = onebit.model_dump()
        lines += [f"onebit {onebit.value} partition {onebit.witness_partition}", _strategy_line(onebit)]
    if "ns" in which:
        ns = NoSignalingBounds.ns_bound(functional)
        record["ns"] = ns.numerator if ns.denominator == 1 else _exact(ns)
        lines.append(f"ns {_exact(ns)}")
    print(json.dumps(record) if args.json else "\n".join(lines))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    functional = _load_functional(args.functional)
    scenario = functional.scenario
    vertices = ClassicalBounds.count_onebit_vertices(scenario)
    if vertices > settings.verify_vertex_limit and not args.force:
        raise CapacityError(
            f"{scenario} has {vertices} one-bit vertices (limit {settings.verify_vertex_limit}); pass --force to run anyway"
        )
    limit = ClassicalBounds.bruteforce_candidates(scenario) if args.force else None
    decomposed = ClassicalBounds.one_bit_bound(functional, workers=args.threads).value
    brute = ClassicalBounds.one_bit_bound_bruteforce(functional, max_candidates=limit)
    match = decomposed == brute
    if args.json:
        print(json.dumps({"match": match, "one_bit_bound": decomposed, "bruteforce": brute}))
    elif match:
        print(f"MATCH {decomposed}")
    else:
        print(f"MISMATCH one_bit_bound={decomposed} bruteforce={brute}")
    return EXIT_OK if match else EXIT_FAILED


def cmd_seesaw(args: argparse.Namespace) -> int:
    functional = _load_functional(args.functional)
    d = functional.scenario.o_a
    config = _seesaw_config(args, args.restarts)
    state = QuantumService.maximally_entangled_state(d)
    score, model = SeesawOptimizer.seesaw_optimize(functional, state, config, workers=args.threads)
    onebit = ClassicalBounds.one_bit_bound(functional, workers=args.threads).value
    violated = beats_bound(score, onebit)
    if args.out:
        _write_text(args.out, model.model_dump_json())
        logger.info("Wrote optimized model to %s", args.out)
    if args.json:
        print(json.dumps({"score": score, "onebit_bound": onebit, "beats_onebit": violated}))
    else:
        print(f"score {score!r}")
        print(f"onebit {onebit} {'violated' if violated else 'not violated'}")
    if args.require_violation and not violated:
        return EXIT_FAILED
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    grid = default_sigma_grid(args.sigma_min, args.sigma_max, args.sigma_count, args.include_zero)
    config = _seesaw_config(args, args.restarts)
    rows = ExperimentService.noise_sweep(args.d, grid, args.trials, config, workers=args.threads)
    with open(args.out, "w", newline="") as stream:
        ExperimentService.write_sweep_csv(rows, stream)
    onebit = ClassicalBounds.one_bit_bound(GameService.make_truncated_xor_game(args.d)).value
    lowest_beating, highest_failing = ExperimentService.violation_threshold(rows, onebit)
    if args.json:
        print(json.dumps({
            "rows": len(rows),
            "onebit_bound": onebit,
            "lowest_violating_fidelity": lowest_beating,
            "highest_nonviolating_fidelity": highest_failing,
        }))
    else:
        print(f"{len(rows)} rows written to {args.out}")
        print(f"lowest violating fidelity {lowest_beating!r}")
        print(f"highest non-violating fidelity {highest_failing!r}")
    return EXIT_OK


def cmd_table(args: argparse.Namespace) -> int:
    config = _seesaw_config(args, args.restarts)
    rows = ExperimentService.bounds_table(args.d_min, args.d_max, config, workers=args.threads,
                                          quantum=not args.no_quantum)
    if args.out:
        with open(args.out, "w", newline="") as stream:
            ExperimentService.write_bounds_csv(rows, stream)
    if args.json:
        print(json.dumps([row.model_dump() for row in rows]))
    else:
        ExperimentService.write_bounds_csv(rows, sys.stdout)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    model = QuantumModel.model_validate_json(Path(args.model).read_text())
    functional = _load_functional(args.functional)
    report = ExperimentService.structure_report(model, functional)
    print(report.model_dump_json(indent=None if args.json else 2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellbound",
        description="Exact local, one-bit and no-signaling bounds of Bell functionals, plus seesaw quantum scores.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--threads", type=int, default=settings.threads, help="Worker processes (default: all cores).")
    parser.add_argument("--seed", type=int, default=settings.seed, help="Master RNG seed.")
    parser.add_argument("--json", action="store_true", help="Machine-readable output on stdout.")
    parser.add_argument("--log-level", default=settings.log_level, help="Logging level for stderr.")
    commands = parser.add_subparsers(dest="command", required=True)

    game = commands.add_parser("game", help="Write a truncated XOR-d game as JSON.")
    game.add_argument("--d", type=int, required=True)
    game.add_argument("--bob-inputs", type=int, default=2, help="Bob inputs; 2 gives the truncated game.")
    game.add_argument("--out", required=True)
    game.set_defaults(handler=cmd_game)

    bounds = commands.add_parser("bounds", help="Exact bounds of a functional file.")
    bounds.add_argument("functional")
    bounds.add_argument("--which", nargs="+", choices=BOUND_KINDS)
    bounds.set_defaults(handler=cmd_bounds)

    verify = commands.add_parser("verify", help="Check the one-bit bound against brute force.")
    verify.add_argument("functional")
    verify.add_argument("--force", action="store_true", help="Run even above the vertex limit.")
    verify.set_defaults(handler=cmd_verify)

    seesaw_defaults = argparse.ArgumentParser(add_help=False)
    seesaw_defaults.add_argument("--sweeps-max", type=int, default=settings.seesaw_sweeps_max)
    seesaw_defaults.add_argument("--tol", type=float, default=settings.seesaw_improvement_tol)

    seesaw = commands.add_parser("seesaw", parents=[seesaw_defaults],
                                 help="Optimize measurements on the maximally entangled state.")
    seesaw.add_argument("functional")
    seesaw.add_argument("--restarts", type=int, default=settings.seesaw_restarts)
    seesaw.add_argument("--out", help="Where to write the optimized model JSON.")
    seesaw.add_argument("--require-violation", action="store_true",
                        help="Exit 1 unless the score beats the one-bit bound.")
    seesaw.set_defaults(handler=cmd_seesaw)

    sweep = commands.add_parser("sweep", parents=[seesaw_defaults], help="Noise-robustness sweep to CSV.")
    sweep.add_argument("--d", type=int, default=5)
    sweep.add_argument("--sigma-min", type=float, default=SIGMA_MIN)
    sweep.add_argument("--sigma-max", type=float, default=SIGMA_MAX)
    sweep.add_argument("--sigma-count", type=int, default=SIGMA_COUNT)
    sweep.add_argument("--include-zero", action="store_true", help="Add noiseless control rows.")
    sweep.add_argument("--trials", type=int, default=10)
    sweep.add_argument("--restarts", type=int, default=settings.sweep_restarts)
    sweep.add_argument("--out", required=True)
    sweep.set_defaults(handler=cmd_sweep)

    table = commands.add_parser("table", parents=[seesaw_defaults], help="Bounds of the truncated games over a d range.")
    table.add_argument("--d-min", type=int, default=2)
    table.add_argument("--d-max", type=int, default=8)
    table.add_argument("--restarts", type=int, default=settings.seesaw_restarts)
    table.add_argument("--no-quantum", action="store_true", help="Skip the seesaw column.")
    table.add_argument("--out")
    table.set_defaults(handler=cmd_table)

    report = commands.add_parser("report", help="Structure report of an optimized model.")
    report.add_argument("model")
    report.add_argument("functional")
    report.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except (BellboundError, ValueError, OSError) as exc:
        logger.debug("Command %s failed", args.command, exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
