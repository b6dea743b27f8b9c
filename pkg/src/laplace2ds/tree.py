"""Leaves-to-root multiplier algorithm for trees.

Rooting a tree at v_i and directing every edge away from it, the column
x = B e_i satisfies x_p = m_pk x_k along each directed edge (p, k). The
multipliers only depend on the direction of the edge, so they are computed
leaves first and x is recovered from the root outwards in O(n) per column.
"""

from collections.abc import Iterator
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np
import numpy.typing as npt

from laplace2ds.constants import logger
from laplace2ds.errors import NotATreeError
from laplace2ds.graph import Graph, VertexOutOfRangeError, is_tree
from laplace2ds.matrix import DSMatrix, Engine, Mode, parse_step

# An exact Fraction or a float, depending on the mode.
Scalar = Any


class StepCounter:
    """Counts elementary vertex and edge steps of the tree algorithm."""

    def __init__(self) -> None:
        self.steps = 0

    def tick(self, amount: int = 1) -> None:
        self.steps += amount


@dataclass(frozen=True)
class RootedTree:
    """A tree with every edge directed away from root."""

    root: int
    # Parent of every vertex, -1 for the root.
    parent: tuple[int, ...]
    # Out-neighbors of every vertex.
    children: tuple[tuple[int, ...], ...]
    # Breadth-first order from the root.
    order: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.parent)

    def leaves_first(self) -> Iterator[int]:
        return reversed(self.order)

    def directed_edges(self) -> Iterator[tuple[int, int]]:
        for k in self.order[1:]:
            yield self.parent[k], k


@dataclass(frozen=True)
class MultiplierMap:
    """Multiplier m_pk = x_p / x_k of every directed edge (p, k)."""

    root: int
    h: Fraction
    mode: Mode
    values: dict[tuple[int, int], Scalar]
    children: tuple[tuple[int, ...], ...]

    def __getitem__(self, edge: tuple[int, int]) -> Scalar:
        return self.values[edge]

    def __len__(self) -> int:
        return len(self.values)

    def edges(self) -> Iterator[tuple[int, int, Scalar]]:
        for (p, k), value in self.values.items():
            yield p, k, value

    def children_of(self, k: int) -> tuple[int, ...]:
        return self.children[k]


def _scalars(step: Fraction, mode: Mode) -> tuple[Scalar, Scalar, Scalar]:
    """Returns zero, one and h in the arithmetic of mode."""
    if mode == Mode.EXACT:
        return Fraction(0), Fraction(1), step
    return 0.0, 1.0, float(step)


def _require_tree(graph: Graph, root: int | None = None) -> None:
    if not is_tree(graph):
        raise NotATreeError(
            f"expected a tree, got a graph with n={graph.n} and m={graph.m}"
        )
    if root is not None and not 0 <= root < graph.n:
        raise VertexOutOfRangeError(f"vertex {root} is out of range")


def _orient(graph: Graph, root: int, counter: StepCounter | None) -> RootedTree:
    adjacency = graph.adjacency
    parent = [-1] * graph.n
    seen = [False] * graph.n
    seen[root] = True
    children: list[tuple[int, ...]] = [()] * graph.n
    order = [root]
    for v in order:
        grown = [w for w in adjacency[v] if not seen[w]]
        for w in grown:
            seen[w] = True
            parent[w] = v
        order.extend(grown)
        children[v] = tuple(grown)
        if counter is not None:
            counter.tick(1 + len(adjacency[v]))
    return RootedTree(
        root=root, parent=tuple(parent), children=tuple(children), order=tuple(order)
    )


def orient(graph: Graph, root: int, counter: StepCounter | None = None) -> RootedTree:
    """Directs every edge of a tree away from root.

    Raises: NotATreeError, VertexOutOfRangeError.
    """
    _require_tree(graph, root)
    return _orient(graph, root, counter)


def multipliers(
    rooted: RootedTree,
    degrees: tuple[int, ...],
    h: float | Fraction | str = 1,
    mode: Mode = Mode.EXACT,
    counter: StepCounter | None = None,
) -> MultiplierMap:
    """Labels every directed edge leaves first.

    m_pk = 1/h + d_k - sum of 1/m_kj over the children j of k, so pendant
    edges get (1 + h) / h.

    Raises: InvalidStepError if h <= 0.
    """
    step = parse_step(h)
    zero, one, h_value = _scalars(step, mode)
    inv_h = one / h_value

    values: dict[tuple[int, int], Scalar] = {}
    reciprocal_sum = [zero] * rooted.n
    for k in rooted.leaves_first():
        if k == rooted.root:
            continue
        multiplier = inv_h + degrees[k] - reciprocal_sum[k]
        p = rooted.parent[k]
        values[(p, k)] = multiplier
        reciprocal_sum[p] += one / multiplier
        if counter is not None:
            counter.tick()

    return MultiplierMap(
        root=rooted.root, h=step, mode=mode, values=values, children=rooted.children
    )


def column_from_multipliers(
    rooted: RootedTree,
    mults: MultiplierMap,
    degrees: tuple[int, ...],
    counter: StepCounter | None = None,
) -> list[Scalar]:
    """Recovers x = B e_root from the multipliers, root outwards."""
    zero, one, h_value = _scalars(mults.h, mults.mode)
    root = rooted.root

    reciprocal_sum = zero
    for child in rooted.children[root]:
        reciprocal_sum += one / mults[(root, child)]

    x: list[Scalar] = [zero] * rooted.n
    x[root] = one / (one + h_value * (degrees[root] - reciprocal_sum))
    for k in rooted.order[1:]:
        p = rooted.parent[k]
        x[k] = x[p] / mults[(p, k)]
        if counter is not None:
            counter.tick()
    return x


def solve_column(
    graph: Graph,
    i: int,
    h: float | Fraction | str = 1,
    mode: Mode = Mode.EXACT,
    counter: StepCounter | None = None,
) -> list[Scalar]:
    """Column i of (I + hL_T)^{-1} for a tree T in O(n) steps.

    Raises: NotATreeError, VertexOutOfRangeError, InvalidStepError.
    """
    rooted = orient(graph, i, counter)
    mults = multipliers(rooted, graph.degrees, h, mode, counter)
    return column_from_multipliers(rooted, mults, graph.degrees, counter)


@dataclass(frozen=True)
class EdgeMultipliers:
    """Multipliers of both directions of every edge.

    out[v][idx] is the multiplier of the edge directed from v to its
    neighbor adjacency[v][idx], whatever the root.
    """

    h: Fraction
    mode: Mode
    out: tuple[tuple[Scalar, ...], ...]
    # Sum of 1/m over every edge leaving v.
    reciprocal_totals: tuple[Scalar, ...]


def edge_multipliers(
    graph: Graph, h: float | Fraction | str = 1, mode: Mode = Mode.EXACT
) -> EdgeMultipliers:
    """All 2(n-1) directed multipliers from one rooting and one re-rooting pass.

    Raises: NotATreeError, InvalidStepError.
    """
    _require_tree(graph)
    step = parse_step(h)
    zero, one, h_value = _scalars(step, mode)
    inv_h = one / h_value
    degrees = graph.degrees
    adjacency = graph.adjacency

    rooted = _orient(graph, 0, None)
    down = multipliers(rooted, degrees, step, mode)

    index_of = [{w: idx for idx, w in enumerate(row)} for row in adjacency]
    out: list[list[Scalar]] = [[zero] * len(row) for row in adjacency]
    for p, k, value in down.edges():
        out[p][index_of[p][k]] = value

    totals: list[Scalar] = [zero] * graph.n
    for q in rooted.order:
        total = sum((one / value for value in out[q]), zero)
        totals[q] = total
        for p in rooted.children[q]:
            towards_q = inv_h + degrees[q] - (total - one / out[q][index_of[q][p]])
            out[p][index_of[p][q]] = towards_q

    return EdgeMultipliers(
        h=step,
        mode=mode,
        out=tuple(tuple(row) for row in out),
        reciprocal_totals=tuple(totals),
    )


def column_from_edge_multipliers(
    graph: Graph, mults: EdgeMultipliers, i: int
) -> list[Scalar]:
    _, one, h_value = _scalars(mults.h, mults.mode)
    adjacency = graph.adjacency
    out = mults.out

    x: list[Scalar] = [None] * graph.n
    x[i] = one / (one + h_value * (len(adjacency[i]) - mults.reciprocal_totals[i]))
    visit = [i]
    for v in visit:
        x_v = x[v]
        row = out[v]
        for idx, w in enumerate(adjacency[v]):
            if x[w] is None:
                x[w] = x_v / row[idx]
                visit.append(w)
    return x


def compute_B_tree(
    graph: Graph, h: float | Fraction | str = 1, mode: Mode = Mode.EXACT
) -> DSMatrix:
    """Every column of (I + hL_T)^{-1}, O(n) each.

    Exact mode gives an exactly symmetric matrix with row sums exactly 1.
    Float mode stores (B + B.T) / 2.

    Raises: NotATreeError, InvalidStepError.
    """
    mults = edge_multipliers(graph, h, mode)
    n = graph.n

    if mode == Mode.EXACT:
        entries: Any = np.empty((n, n), dtype=object)
        for i in range(n):
            for k, value in enumerate(column_from_edge_multipliers(graph, mults, i)):
                entries[k, i] = value
    else:
        columns = np.empty((n, n), dtype=np.float64)
        for i in range(n):
            columns[:, i] = column_from_edge_multipliers(graph, mults, i)
        entries = (columns + columns.T) / 2

    logger.debug(f"Tree {mode.value} inverse computed for n={n}")
    return DSMatrix(n=n, h=mults.h, mode=mode, engine=Engine.TREE, entries=entries)


@dataclass(frozen=True)
class TreeFactor:
    """Elimination of I + hL_T along a rooted tree, reusable for any right-hand side.

    The pivot of non-root vertex k is h * m_pk for its incoming edge.
    """

    rooted: RootedTree
    h: float
    pivots: tuple[float, ...]
    root_pivot: float

    def solve(self, rhs: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        """Returns u with (I + hL_T) u = rhs."""
        rooted = self.rooted
        parent = rooted.parent
        pivots = self.pivots
        h = self.h

        reduced = [float(v) for v in rhs]
        for k in rooted.leaves_first():
            if k != rooted.root:
                reduced[parent[k]] += h * reduced[k] / pivots[k]

        u = [0.0] * rooted.n
        u[rooted.root] = reduced[rooted.root] / self.root_pivot
        for k in rooted.order[1:]:
            u[k] = (reduced[k] + h * u[parent[k]]) / pivots[k]
        return np.array(u, dtype=np.float64)


def tree_factor(
    graph: Graph, h: float | Fraction | str = 1, root: int = 0
) -> TreeFactor:
    """Raises: NotATreeError, InvalidStepError."""
    rooted = orient(graph, root)
    mults = multipliers(rooted, graph.degrees, h, Mode.FLOAT)
    step = float(mults.h)

    pivots = [0.0] * graph.n
    for _, k, value in mults.edges():
        pivots[k] = step * value
    reciprocal_sum = sum(1.0 / mults[(root, c)] for c in rooted.children[root])
    root_pivot = 1.0 + step * (graph.degrees[root] - reciprocal_sum)
    return TreeFactor(
        rooted=rooted, h=step, pivots=tuple(pivots), root_pivot=root_pivot
    )
