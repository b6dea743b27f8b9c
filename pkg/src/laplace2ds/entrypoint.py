import argparse
import logging

from laplace2ds.commands import (
    BENCH_ENGINES,
    COMPUTE_ENGINES,
    FAMILY_PARAMETERS,
    HEAT_ENGINES,
    OutputSpec,
    SolverConfig,
    cmd_bench,
    cmd_centrality,
    cmd_check,
    cmd_compute,
    cmd_gen,
    cmd_heat,
)
from laplace2ds.constants import NAME, VERSION, logger
from laplace2ds.errors import Laplace2dsError


def solver_defaults() -> SolverConfig:
    """Returns the default configuration for computing B."""
    return SolverConfig(h="1", engine="auto", exact=False)


def output_defaults(output_format: str = "json") -> OutputSpec:
    return OutputSpec(format=output_format, destination="-")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(token) for token in text.split(",") if token.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from e
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return values


def _engine_list(text: str) -> list[str]:
    engines = [token.strip() for token in text.split(",") if token.strip()]
    unknown = [engine for engine in engines if engine not in BENCH_ENGINES]
    if not engines or unknown:
        raise argparse.ArgumentTypeError(
            f"engines must be among {', '.join(BENCH_ENGINES)}, got {text!r}"
        )
    return engines


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=NAME,
        description="Doubly stochastic inverses (I + hL_G)^{-1} of graph Laplacians",
    )

    parser.add_argument(
        "--debug", help="Enable verbose output", action="store_true", default=False
    )

    parser.add_argument(
        "--version",
        help="Display version and exit",
        action="version",
        version=VERSION,
    )

    subparsers = parser.add_subparsers(dest="command", required=True)

    gen = subparsers.add_parser("gen", help="Generate a graph as an edge list.")
    gen.add_argument("family", choices=list(FAMILY_PARAMETERS))
    gen.add_argument(
        "params",
        nargs="*",
        help="Family parameters, e.g. 'path 4', 'broom 6 5', 'starlike 3 3 4'.",
    )
    gen.add_argument(
        "--cone", help="Join a new vertex to every vertex.", action="store_true"
    )
    gen.add_argument(
        "--seed", help="Seed of random families. Default: 0", type=int, default=0
    )
    OutputSpec.add_flags(gen, output_defaults("edges"), formats=("edges",))
    gen.set_defaults(handler=cmd_gen)

    compute = subparsers.add_parser("compute", help="Compute B or one of its columns.")
    compute.add_argument("graph", help="Edge list file, '-' for standard input.")
    compute.add_argument(
        "--column", help="Only compute column K, 0-based.", type=int, metavar="K"
    )
    SolverConfig.add_flags(compute, solver_defaults(), COMPUTE_ENGINES)
    OutputSpec.add_flags(compute, output_defaults())
    compute.set_defaults(handler=cmd_compute)

    check = subparsers.add_parser("check", help="Check the properties of B.")
    check.add_argument("graph", help="Edge list file, '-' for standard input.")
    check.add_argument(
        "--suite",
        help="Check suite to run, 'all' by default. Use --suite several times or "
        "with values separated by a comma to run several.",
        action="append",
    )
    SolverConfig.add_flags(check, solver_defaults(), COMPUTE_ENGINES)
    OutputSpec.add_flags(check, output_defaults("text"), formats=("text", "json"))
    check.set_defaults(handler=cmd_check)

    heat = subparsers.add_parser("heat", help="Simulate implicit Euler diffusion.")
    heat.add_argument("graph", help="Edge list file, '-' for standard input.")
    heat.add_argument(
        "--steps", help="Number of steps. Default: 1", type=int, default=1
    )
    heat.add_argument(
        "--u0",
        help="Initial temperatures: 'uniform', 'delta:K' or a file with one "
        "value per vertex. Default: 'delta:0'",
        default="delta:0",
    )
    heat.add_argument(
        "--record-every",
        help="Record every N-th step. Default: 1",
        type=int,
        default=1,
        metavar="N",
    )
    heat.add_argument(
        "--summary",
        help="File for the summary CSV. Default: after the trajectory, "
        "separated by a blank line.",
    )
    SolverConfig.add_flags(heat, solver_defaults(), HEAT_ENGINES, with_exact=False)
    OutputSpec.add_flags(heat, output_defaults("csv"), formats=("csv",))
    heat.set_defaults(handler=cmd_heat)

    centrality = subparsers.add_parser(
        "centrality", help="Rank vertices by remoteness."
    )
    centrality.add_argument("graph", help="Edge list file, '-' for standard input.")
    SolverConfig.add_flags(centrality, solver_defaults(), COMPUTE_ENGINES)
    OutputSpec.add_flags(centrality, output_defaults(), formats=("json",))
    centrality.set_defaults(handler=cmd_centrality)

    bench = subparsers.add_parser("bench", help="Time the engines.")
    bench.add_argument(
        "--sizes",
        help="Comma separated graph sizes. Default: 1000,2000,4000",
        type=_int_list,
        default=[1000, 2000, 4000],
    )
    bench.add_argument(
        "--engine",
        help=f"Comma separated engines among {', '.join(BENCH_ENGINES)}. "
        "Default: all",
        type=_engine_list,
        default=list(BENCH_ENGINES),
        dest="engines",
    )
    bench.add_argument(
        "--family",
        help="Graphs to time on. Default: 'path'",
        choices=["path", "random-tree"],
        default="path",
    )
    bench.add_argument(
        "--columns",
        help="Columns timed per tree engine run. Default: 10",
        type=int,
        default=10,
    )
    bench.add_argument(
        "--full-max",
        help="Largest n for which the full matrix is timed. Default: 2000",
        type=int,
        default=2000,
    )
    bench.add_argument("--seed", help="Seed of random trees.", type=int, default=0)
    bench.add_argument("--h", help="Step parameter. Default: '1'", default="1")
    OutputSpec.add_flags(bench, output_defaults("csv"), formats=("csv",))
    bench.set_defaults(handler=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> None:
    args = build_parser().parse_args(argv)

    logger.setLevel(level=logging.DEBUG if args.debug else logging.INFO)

    try:
        status = args.handler(args)
    except (Laplace2dsError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        raise SystemExit(2) from e
    except Exception as e:
        logger.exception(e)
        logger.error(f"{args.command} failed with the following error: {e}")
        raise SystemExit(1) from e

    if status:
        raise SystemExit(status)


if __name__ == "__main__":
    main()
