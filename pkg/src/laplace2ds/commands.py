import argparse
import csv
import io
import sys
import time
from collections.abc import Sequence
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt
from jinja2 import Environment, FileSystemLoader
from pydantic import BaseModel, TypeAdapter, ValidationError

from laplace2ds.analysis import (
    SuiteReport,
    centrality_document,
    centrality_report,
    run_checks,
)
from laplace2ds.constants import ROOT_DIR, logger
from laplace2ds.dense import cholesky_factor, cholesky_solve, compute_B_dense
from laplace2ds.errors import DisconnectedGraphError, Laplace2dsError
from laplace2ds.graph import (
    Graph,
    GraphFamily,
    InvalidFamilyError,
    PathFamily,
    RandomTreeFamily,
    VertexOutOfRangeError,
    classify,
    format_edge_list,
    generate,
    is_labeled_path,
    is_tree,
    modified_laplacian,
    parse_edge_list,
)
from laplace2ds.heat import (
    EngineMismatchError,
    HeatEngine,
    simulate,
    write_summary_csv,
    write_trajectory_csv,
)
from laplace2ds.matrix import (
    ColumnDocument,
    DSMatrix,
    Engine,
    Mode,
    column_document,
    format_fraction,
    parse_step,
)
from laplace2ds.path import compute_B_path, path_last_column
from laplace2ds.tree import StepCounter, compute_B_tree, solve_column

# Positional parameters of every generator family, starlike takes any number.
FAMILY_PARAMETERS: dict[str, tuple[str, ...]] = {
    "path": ("n",),
    "star": ("n",),
    "complete": ("n",),
    "empty": ("n",),
    "broom": ("k", "ell"),
    "starlike": ("arms",),
    "random-tree": ("n",),
    "random-connected": ("n", "p"),
    "t3": ("depth",),
    "random-t3": ("internal",),
}
RANDOM_FAMILIES = ("random-tree", "random-connected", "random-t3")

COMPUTE_ENGINES = ("auto", "dense", "tree", "path")
HEAT_ENGINES = tuple(engine.value for engine in HeatEngine)
BENCH_ENGINES = ("tree", "dense", "path")

# Full exact closed-form matrices grow too quickly to benchmark past this size.
BENCH_PATH_FULL_MAX = 200

FAMILY_ADAPTER: TypeAdapter[GraphFamily] = TypeAdapter(GraphFamily)


class InvalidInitialConditionError(Laplace2dsError):
    """Raised when the --u0 argument can't be turned into a temperature vector."""

    pass


class SolverConfig(BaseModel):
    """How B is computed."""

    # Step parameter as text: "1", "0.1" or "1/3".
    h: str
    # Engine name, auto picks one from the shape of the graph.
    engine: str
    # Exact rational arithmetic instead of floats.
    exact: bool = False

    @staticmethod
    def add_flags(
        parser: argparse.ArgumentParser,
        defaults: "SolverConfig",
        engines: Sequence[str] = COMPUTE_ENGINES,
        *,
        with_exact: bool = True,
    ):
        """Adds flags to the given parser with the given defaults."""
        parser.add_argument(
            "--h",
            help="Step parameter h > 0, as an integer, decimal or fraction. "
            f"Default: {defaults.h!r}",
            default=defaults.h,
        )

        if with_exact:
            parser.add_argument(
                "--exact",
                help="Use exact rational arithmetic, entries are printed as p/q.",
                action="store_true",
                default=defaults.exact,
            )

        parser.add_argument(
            "--engine",
            help=f"Algorithm to use. Default: {defaults.engine!r}",
            choices=engines,
            default=defaults.engine,
        )

    @staticmethod
    def of(namespace: argparse.Namespace) -> "SolverConfig":
        """Parses a namespace to create a new SolverConfig."""
        return SolverConfig.model_validate(namespace, from_attributes=True)

    @property
    def step(self) -> Fraction:
        """Raises: InvalidStepError."""
        return parse_step(self.h)

    @property
    def mode(self) -> Mode:
        return Mode.EXACT if self.exact else Mode.FLOAT


class OutputSpec(BaseModel):
    """Where and how a result is written."""

    # json, csv or text.
    format: str
    # File path, "-" for standard output.
    destination: str

    @staticmethod
    def add_flags(
        parser: argparse.ArgumentParser,
        defaults: "OutputSpec",
        formats: Sequence[str] = ("json", "csv"),
    ):
        """Adds flags to the given parser with the given defaults."""
        if len(formats) > 1:
            parser.add_argument(
                "--format",
                help=f"Output format. Default: {defaults.format!r}",
                choices=formats,
                default=defaults.format,
            )
        else:
            parser.set_defaults(format=formats[0])

        parser.add_argument(
            "--output",
            help="File to write to, '-' for standard output. "
            f"Default: {defaults.destination!r}",
            default=defaults.destination,
            dest="destination",
        )

    @staticmethod
    def of(namespace: argparse.Namespace) -> "OutputSpec":
        """Parses a namespace to create a new OutputSpec."""
        return OutputSpec.model_validate(namespace, from_attributes=True)

    def write(self, text: str) -> None:
        if self.destination == "-":
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        Path(self.destination).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {self.destination}")


def read_graph(path: str) -> Graph:
    """Reads an edge list file, '-' reads standard input.

    Raises: EdgeListParseError, OSError.
    """
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    graph = parse_edge_list(text)
    logger.debug(f"Read graph with n={graph.n} and m={graph.m} from {path}")
    return graph


def family_spec(
    kind: str, params: Sequence[str], *, seed: int = 0, cone: bool = False
) -> GraphFamily:
    """Validates positional generator parameters into a family.

    Raises: InvalidFamilyError.
    """
    if kind not in FAMILY_PARAMETERS:
        raise InvalidFamilyError(f"unknown family {kind!r}")

    names = FAMILY_PARAMETERS[kind]
    data: dict[str, Any] = {"kind": kind}
    if kind == "starlike":
        data["arms"] = list(params)
    elif len(params) != len(names):
        raise InvalidFamilyError(
            f"{kind} takes {len(names)} parameter(s) ({', '.join(names)}), "
            f"got {len(params)}"
        )
    else:
        data.update(zip(names, params, strict=True))
    if kind in RANDOM_FAMILIES:
        data["seed"] = seed
    if cone:
        data = {"kind": "cone", "base": data}

    try:
        return FAMILY_ADAPTER.validate_python(data)
    except ValidationError as e:
        raise InvalidFamilyError(
            f"invalid parameters {list(params)} for {kind}: "
            + "; ".join(error["msg"] for error in e.errors())
        ) from e


def cmd_gen(args: argparse.Namespace) -> int:
    family = family_spec(args.family, args.params, seed=args.seed, cone=args.cone)
    graph = generate(family)
    logger.info(f"Generated {args.family} graph with n={graph.n} and m={graph.m}")
    OutputSpec.of(args).write(format_edge_list(graph))
    return 0


def compute_matrix(graph: Graph, config: SolverConfig) -> DSMatrix:
    """Full B with the configured engine.

    Auto uses the tree engine for trees and the dense engine otherwise. The
    path closed form only runs when asked for, on the labeled path at h = 1.

    Raises: EngineMismatchError, NotATreeError, InvalidStepError.
    """
    step, mode = config.step, config.mode
    if config.engine == "path":
        _require_path_closed_form(graph, step)
        b = compute_B_path(graph.n)
        if mode == Mode.FLOAT:
            b = DSMatrix(
                n=b.n, h=b.h, mode=Mode.FLOAT, engine=b.engine, entries=b.as_float()
            )
    elif config.engine == "tree" or (config.engine == "auto" and is_tree(graph)):
        b = compute_B_tree(graph, step, mode)
    else:
        b = compute_B_dense(graph, step, mode)

    logger.info(
        f"Computed B for n={graph.n} with the {b.engine.value} engine "
        f"in {mode.value} mode"
    )
    return b


def _require_path_closed_form(graph: Graph, step: Fraction) -> None:
    if not is_labeled_path(graph):
        raise EngineMismatchError(
            "the path closed form needs the labeled path 0 - 1 - ... - (n-1)"
        )
    if step != 1:
        raise EngineMismatchError(
            f"the path closed form holds for h = 1, got h = {format_fraction(step)}"
        )


def compute_column(graph: Graph, config: SolverConfig, column: int) -> ColumnDocument:
    """Column K of B, through the cheapest engine that applies.

    Raises: VertexOutOfRangeError, EngineMismatchError, NotATreeError,
    InvalidStepError.
    """
    if not 0 <= column < graph.n:
        raise VertexOutOfRangeError(
            f"column {column} is out of range for {graph.n} vertices"
        )
    step, mode = config.step, config.mode

    closed_form = (
        config.engine == "auto"
        and mode == Mode.EXACT
        and step == 1
        and column == graph.n - 1
        and is_labeled_path(graph)
    )
    values: list[Any]
    if config.engine == "path" or closed_form:
        _require_path_closed_form(graph, step)
        if column == graph.n - 1:
            values = list(path_last_column(graph.n))
        else:
            values = compute_B_path(graph.n).column(column)
        if mode == Mode.FLOAT:
            values = [float(v) for v in values]
        engine = Engine.PATH
    elif config.engine == "tree" or (config.engine == "auto" and is_tree(graph)):
        values = solve_column(graph, column, step, mode)
        engine = Engine.TREE
    else:
        values = compute_B_dense(graph, step, mode).column(column)
        engine = Engine.DENSE

    logger.info(f"Computed column {column} of B with the {engine.value} engine")
    return column_document(values, column=column, h=step, mode=mode, engine=engine)


def cmd_compute(args: argparse.Namespace) -> int:
    graph = read_graph(args.graph)
    config = SolverConfig.of(args)
    output = OutputSpec.of(args)

    if args.column is not None:
        document = compute_column(graph, config, args.column)
        if output.format == "csv":
            output.write(
                "".join(
                    f"{value}\n" if isinstance(value, str) else f"{value:.17g}\n"
                    for value in document.values
                )
            )
        else:
            output.write(document.model_dump_json() + "\n")
        return 0

    b = compute_matrix(graph, config)
    output.write(b.to_csv() if output.format == "csv" else b.to_json() + "\n")
    return 0


def render_check_report(report: SuiteReport) -> str:
    env = Environment(
        loader=FileSystemLoader(ROOT_DIR.joinpath("templates")),
        autoescape=False,
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    template = env.get_template("check_report.txt")
    return template.render(
        report=report,
        passed=sum(1 for check in report.checks if check.passed),
        total=len(report.checks),
    )


def _suite_names(values: Sequence[str] | None) -> list[str]:
    if not values:
        return ["all"]
    return [name.strip() for value in values for name in value.split(",") if name]


def cmd_check(args: argparse.Namespace) -> int:
    graph = read_graph(args.graph)
    config = SolverConfig.of(args)
    output = OutputSpec.of(args)

    b = compute_matrix(graph, config)
    report = run_checks(graph, b, _suite_names(args.suite))

    if output.format == "text":
        output.write(render_check_report(report))
    else:
        output.write(report.model_dump_json() + "\n")

    failed = [check.name for check in report.checks if not check.passed]
    if failed:
        logger.error(f"Failed checks: {', '.join(failed)}")
        return 1
    logger.info(f"All {len(report.checks)} checks passed")
    return 0


def initial_condition(spec: str, n: int) -> npt.NDArray[np.float64]:
    """Reads --u0: "uniform", "delta:k" or a file of n numbers.

    Raises: InvalidInitialConditionError, OSError.
    """
    if spec == "uniform":
        return np.full(n, 1.0 / n)

    if spec.startswith("delta:"):
        try:
            k = int(spec.removeprefix("delta:"))
        except ValueError as e:
            raise InvalidInitialConditionError(f"invalid vertex in {spec!r}") from e
        if not 0 <= k < n:
            raise InvalidInitialConditionError(
                f"vertex {k} is out of range for {n} vertices"
            )
        u0 = np.zeros(n)
        u0[k] = 1.0
        return u0

    tokens = Path(spec).read_text(encoding="utf-8").replace(",", " ").split()
    try:
        return np.array([float(token) for token in tokens], dtype=np.float64)
    except ValueError as e:
        raise InvalidInitialConditionError(f"{spec} holds a non-numeric value") from e


def cmd_heat(args: argparse.Namespace) -> int:
    graph = read_graph(args.graph)
    config = SolverConfig.of(args)
    output = OutputSpec.of(args)

    trajectory = simulate(
        graph,
        initial_condition(args.u0, graph.n),
        config.step,
        steps=args.steps,
        record_every=args.record_every,
        engine=config.engine,
    )

    trajectory_csv = io.StringIO()
    write_trajectory_csv(trajectory, trajectory_csv)
    summary_csv = io.StringIO()
    write_summary_csv(trajectory, summary_csv)

    if args.summary:
        output.write(trajectory_csv.getvalue())
        OutputSpec(format="csv", destination=args.summary).write(
            summary_csv.getvalue()
        )
    else:
        output.write(trajectory_csv.getvalue() + "\n" + summary_csv.getvalue())

    if trajectory.predicted_contraction is not None:
        logger.info(
            f"Contraction per step: predicted {trajectory.predicted_contraction:.12g}, "
            f"observed {trajectory.observed_contraction}"
        )
    if trajectory.max_principle_violations or trajectory.min_principle_violations:
        logger.warning(
            f"Maximum principle violated {trajectory.max_principle_violations} "
            f"times, minimum principle {trajectory.min_principle_violations} times"
        )
    return 0


def cmd_centrality(args: argparse.Namespace) -> int:
    graph = read_graph(args.graph)
    if not classify(graph).is_connected:
        raise DisconnectedGraphError("centrality needs a connected graph")

    b = compute_matrix(graph, SolverConfig.of(args))
    report = centrality_report(b)
    logger.info(f"Least remote vertices: {report.least_remote}")
    OutputSpec.of(args).write(
        centrality_document(report).model_dump_json() + "\n"
    )
    return 0


class BenchRow(BaseModel):
    """Timings of one engine at one size."""

    engine: str
    n: int
    per_column_seconds: float | None = None
    full_matrix_seconds: float | None = None
    operations_per_column: float | None = None


def _timed(function: Any, *args: Any) -> float:
    start = time.perf_counter()
    function(*args)
    return time.perf_counter() - start


def bench_engine(
    engine: str,
    graph: Graph,
    *,
    columns: int = 10,
    full_max: int = 2000,
    h: Fraction = Fraction(1),
) -> BenchRow | None:
    """Times one engine on one graph, float mode except for the closed form.

    Returns None when the engine doesn't apply to the graph.
    """
    n = graph.n
    row = BenchRow(engine=engine, n=n)

    if engine == "tree":
        sample = sorted({int(k) for k in np.linspace(0, n - 1, num=min(columns, n))})
        counter = StepCounter()
        start = time.perf_counter()
        for i in sample:
            solve_column(graph, i, h, Mode.FLOAT, counter)
        row.per_column_seconds = (time.perf_counter() - start) / len(sample)
        row.operations_per_column = counter.steps / len(sample)
        if n <= full_max:
            row.full_matrix_seconds = _timed(compute_B_tree, graph, h, Mode.FLOAT)
    elif engine == "dense":
        if n <= full_max:
            rhs = np.zeros(n)
            rhs[n - 1] = 1.0
            start = time.perf_counter()
            cholesky_solve(cholesky_factor(modified_laplacian(graph, h)), rhs)
            row.per_column_seconds = time.perf_counter() - start
            row.full_matrix_seconds = _timed(compute_B_dense, graph, h, Mode.FLOAT)
    elif engine == "path":
        if not is_labeled_path(graph) or h != 1:
            return None
        row.per_column_seconds = _timed(path_last_column, n)
        if n <= min(full_max, BENCH_PATH_FULL_MAX):
            row.full_matrix_seconds = _timed(compute_B_path, n)
    else:
        raise EngineMismatchError(f"unknown engine {engine!r}")

    logger.debug(f"Bench {engine} n={n}: {row}")
    return row


def write_bench_csv(rows: Sequence[BenchRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    fields = list(BenchRow.model_fields)
    writer.writerow(fields)
    for row in rows:
        values = row.model_dump()
        writer.writerow(
            ["" if values[field] is None else values[field] for field in fields]
        )
    return out.getvalue()


def cmd_bench(args: argparse.Namespace) -> int:
    step = parse_step(args.h)
    rows: list[BenchRow] = []
    for n in args.sizes:
        if args.family == "path":
            graph = PathFamily(n=n).build()
        else:
            graph = RandomTreeFamily(n=n, seed=args.seed).build()
        for engine in args.engines:
            row = bench_engine(
                engine, graph, columns=args.columns, full_max=args.full_max, h=step
            )
            if row is None:
                logger.warning(f"Skipping the {engine} engine on {args.family} n={n}")
                continue
            logger.info(
                f"{engine} n={n}: {row.per_column_seconds} s per column, "
                f"{row.full_matrix_seconds} s full"
            )
            rows.append(row)

    OutputSpec.of(args).write(write_bench_csv(rows))
    return 0
