"""Implicit Euler diffusion on graphs.

Every step solves (I + hL_G) u' = u, so u' = B u with B doubly stochastic:
mass is conserved and each new value is a convex combination of old ones.
"""

import csv
import math
from collections.abc import Iterable
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import TextIO

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field

from laplace2ds.constants import logger
from laplace2ds.dense import (
    algebraic_connectivity,
    cholesky_factor,
    cholesky_solve,
    compute_B_dense,
)
from laplace2ds.errors import Laplace2dsError
from laplace2ds.graph import Graph, connected_components, is_tree, modified_laplacian
from laplace2ds.matrix import Mode, parse_step
from laplace2ds.tree import TreeFactor, tree_factor

# A step may raise the maximum or lower the minimum by at most this much.
PRINCIPLE_TOLERANCE = 1e-12


class EngineMismatchError(Laplace2dsError):
    """Raised when an engine can't handle the graph it is given."""

    pass


class DimensionMismatchError(Laplace2dsError):
    """Raised when a temperature vector doesn't have one value per vertex."""

    pass


class InvalidScheduleError(Laplace2dsError, ValueError):
    """Raised on a negative step count or a non-positive recording interval."""

    pass


class HeatEngine(str, Enum):
    AUTO = "auto"
    DENSE = "dense"
    TREE = "tree"


@dataclass(frozen=True)
class HeatSolver:
    """Applies (I + hL_G)^{-1}, factored once.

    Immutable once built, so one solver can drive several trajectories.
    """

    n: int
    h: Fraction
    engine: HeatEngine
    cholesky: npt.NDArray[np.float64] | None = None
    tree: TreeFactor | None = None

    def apply(self, u: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Returns u' with (I + hL_G) u' = u.

        Raises: DimensionMismatchError.
        """
        values = np.asarray(u, dtype=np.float64)
        if values.shape != (self.n,):
            raise DimensionMismatchError(
                f"expected {self.n} values, got shape {values.shape}"
            )
        if self.tree is not None:
            return self.tree.solve(values)
        if self.cholesky is None:
            raise EngineMismatchError("solver has no factorization")
        return cholesky_solve(self.cholesky, values)


def make_heat_solver(
    graph: Graph,
    h: float | Fraction | str = 1,
    engine: HeatEngine | str = HeatEngine.AUTO,
) -> HeatSolver:
    """Factors I + hL_G once. Auto uses the tree engine for trees.

    Raises: EngineMismatchError if the tree engine is asked for a non-tree,
    InvalidStepError.
    """
    step = parse_step(h)
    engine = HeatEngine(engine)
    tree = is_tree(graph)
    if engine == HeatEngine.AUTO:
        engine = HeatEngine.TREE if tree else HeatEngine.DENSE
    elif engine == HeatEngine.TREE and not tree:
        raise EngineMismatchError(
            f"tree engine needs a tree, got n={graph.n} and m={graph.m}"
        )

    logger.debug(f"Heat solver for n={graph.n} uses the {engine.value} engine")
    if engine == HeatEngine.TREE:
        return HeatSolver(
            n=graph.n, h=step, engine=engine, tree=tree_factor(graph, step)
        )
    return HeatSolver(
        n=graph.n,
        h=step,
        engine=engine,
        cholesky=cholesky_factor(modified_laplacian(graph, step)),
    )


@dataclass(frozen=True)
class HeatState:
    """Temperatures u^k after step_index steps of size h."""

    u: npt.NDArray[np.float64]
    step_index: int
    h: Fraction

    @property
    def mass(self) -> float:
        return float(np.sum(self.u))


def step(solver: HeatSolver, state: HeatState) -> HeatState:
    """Raises: DimensionMismatchError."""
    return HeatState(
        u=solver.apply(state.u), step_index=state.step_index + 1, h=solver.h
    )


def step_exact(
    graph: Graph, u: Iterable[Fraction | int], h: Fraction | int | str = 1
) -> list[Fraction]:
    """One step in exact arithmetic, through the exact inverse. For small n only.

    Raises: DimensionMismatchError, InvalidStepError.
    """
    values = [Fraction(v) for v in u]
    if len(values) != graph.n:
        raise DimensionMismatchError(f"expected {graph.n} values, got {len(values)}")
    entries = compute_B_dense(graph, h, Mode.EXACT).entries
    return [
        sum((entries[i, j] * values[j] for j in range(graph.n)), Fraction(0))
        for i in range(graph.n)
    ]


class HeatRecord(BaseModel):
    """Recorded state with its summary."""

    step: int
    # Total heat e.u.
    mass: float
    max: float
    min: float
    # Euclidean distance to the uniform vector with the same mass.
    dist_to_mean: float
    values: list[float]


class HeatTrajectory(BaseModel):
    """Recorded states of a simulation and what they say about convergence."""

    n: int
    h: float
    engine: str
    steps: int
    records: list[HeatRecord] = Field(default_factory=list)
    # 1 / (1 + h a(G)), only for connected graphs with n >= 2.
    predicted_contraction: float | None = None
    # Ratio of the distances to the mean after the last two steps.
    observed_contraction: float | None = None
    # Steps that raised the maximum or lowered the minimum beyond tolerance.
    max_principle_violations: int = 0
    min_principle_violations: int = 0
    # Largest |mass_k - mass_0| over all steps.
    mass_drift: float = 0.0
    # Mean of u0 over every connected component, the limit of the iteration.
    component_means: list[float] = Field(default_factory=list)


def _record(index: int, u: npt.NDArray[np.float64]) -> HeatRecord:
    mean = float(np.mean(u))
    return HeatRecord(
        step=index,
        mass=float(np.sum(u)),
        max=float(np.max(u)),
        min=float(np.min(u)),
        dist_to_mean=float(np.linalg.norm(u - mean)),
        values=[float(v) for v in u],
    )


def simulate(
    graph: Graph,
    u0: npt.ArrayLike,
    h: float | Fraction | str = 1,
    steps: int = 1,
    record_every: int = 1,
    engine: HeatEngine | str = HeatEngine.AUTO,
    solver: HeatSolver | None = None,
) -> HeatTrajectory:
    """Iterates implicit Euler steps from u0.

    The initial and the final state are always recorded, and every
    record_every-th step in between.

    Raises: DimensionMismatchError if u0 has the wrong length or isn't
    finite, InvalidScheduleError, EngineMismatchError, InvalidStepError.
    """
    if steps < 0:
        raise InvalidScheduleError(f"steps must be nonnegative, got {steps}")
    if record_every < 1:
        raise InvalidScheduleError(
            f"record_every must be positive, got {record_every}"
        )

    u = np.asarray(u0, dtype=np.float64)
    if u.shape != (graph.n,):
        raise DimensionMismatchError(
            f"initial condition needs {graph.n} values, got shape {u.shape}"
        )
    if not np.all(np.isfinite(u)):
        raise DimensionMismatchError("initial condition has non-finite values")

    if solver is None:
        solver = make_heat_solver(graph, h, engine)

    components = connected_components(graph)
    component_means = [0.0] * graph.n
    for members in components:
        mean = float(np.mean(u[members]))
        for v in members:
            component_means[v] = mean

    predicted = None
    if graph.n >= 2 and len(components) == 1:
        predicted = 1 / (1 + float(solver.h) * algebraic_connectivity(graph))

    trajectory = HeatTrajectory(
        n=graph.n,
        h=float(solver.h),
        engine=solver.engine.value,
        steps=steps,
        predicted_contraction=predicted,
        component_means=component_means,
    )
    trajectory.records.append(_record(0, u))

    state = HeatState(u=u, step_index=0, h=solver.h)
    mass0 = state.mass
    distance = float(np.linalg.norm(u - np.mean(u)))
    for index in range(1, steps + 1):
        previous = state.u
        state = step(solver, state)
        current = state.u

        if np.max(current) > np.max(previous) + PRINCIPLE_TOLERANCE:
            trajectory.max_principle_violations += 1
        if np.min(current) < np.min(previous) - PRINCIPLE_TOLERANCE:
            trajectory.min_principle_violations += 1
        trajectory.mass_drift = max(trajectory.mass_drift, abs(state.mass - mass0))

        new_distance = float(np.linalg.norm(current - np.mean(current)))
        if distance > 0 and math.isfinite(new_distance):
            trajectory.observed_contraction = new_distance / distance
        distance = new_distance

        if index % record_every == 0 or index == steps:
            trajectory.records.append(_record(index, current))

    logger.debug(
        f"Simulated {steps} steps on n={graph.n}, "
        f"{len(trajectory.records)} records, mass drift {trajectory.mass_drift:.3g}"
    )
    return trajectory


def write_trajectory_csv(trajectory: HeatTrajectory, stream: TextIO) -> None:
    """Rows step,vertex,value for every recorded state."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["step", "vertex", "value"])
    for record in trajectory.records:
        for vertex, value in enumerate(record.values):
            writer.writerow([record.step, vertex, f"{value:.17g}"])


def write_summary_csv(trajectory: HeatTrajectory, stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["step", "mass", "max", "min", "dist_to_mean"])
    for record in trajectory.records:
        writer.writerow(
            [
                record.step,
                f"{record.mass:.17g}",
                f"{record.max:.17g}",
                f"{record.min:.17g}",
                f"{record.dist_to_mean:.17g}",
            ]
        )
