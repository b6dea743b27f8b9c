"""Spanning rooted forest counts, an exhaustive oracle for B.

A rooted forest is an acyclic edge subset with one root chosen in every
component. If xi counts all of them and xi_pair[i][j] counts those where v_i
and v_j share a tree rooted at v_i, then b_ij = xi_pair[j][i] / xi.
"""

from collections import Counter
from fractions import Fraction
from math import prod

import numpy as np
from pydantic import BaseModel

from laplace2ds.constants import FOREST_MAX_EDGES, logger
from laplace2ds.errors import Laplace2dsError
from laplace2ds.graph import ExactMatrix, Graph


class ForestOracleLimitError(Laplace2dsError):
    """Raised when a graph has too many edges to enumerate its forests."""

    pass


class ForestCount(BaseModel):
    """Rooted forest counts of a graph."""

    # Number of spanning rooted forests.
    xi_total: int
    # xi_pair[i][j]: forests where v_i and v_j share a tree rooted at v_i.
    xi_pair: list[list[int]]
    # Number of acyclic edge subsets that were enumerated.
    forests: int

    def accessibility(self, i: int, j: int) -> Fraction:
        """b_ij as a ratio of forest counts."""
        return Fraction(self.xi_pair[j][i], self.xi_total)

    def matrix(self) -> ExactMatrix:
        n = len(self.xi_pair)
        matrix = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                matrix[i, j] = self.accessibility(i, j)
        return matrix


def _partitions(graph: Graph) -> Counter[tuple[int, ...]]:
    """Counts acyclic edge subsets by the vertex partition they induce."""
    n = graph.n
    edges = graph.edges
    parent = list(range(n))
    size = [1] * n
    partitions: Counter[tuple[int, ...]] = Counter()

    def find(v: int) -> int:
        while parent[v] != v:
            v = parent[v]
        return v

    def canonical() -> tuple[int, ...]:
        labels: dict[int, int] = {}
        return tuple(labels.setdefault(find(v), len(labels)) for v in range(n))

    def visit(index: int) -> None:
        if index == len(edges):
            partitions[canonical()] += 1
            return

        visit(index + 1)

        u, v = edges[index]
        root_u, root_v = find(u), find(v)
        if root_u == root_v:
            return
        if size[root_u] < size[root_v]:
            root_u, root_v = root_v, root_u
        parent[root_v] = root_u
        size[root_u] += size[root_v]
        visit(index + 1)
        parent[root_v] = root_v
        size[root_u] -= size[root_v]

    visit(0)
    return partitions


def forest_count_oracle(graph: Graph) -> ForestCount:
    """Enumerates every acyclic edge subset and counts root choices.

    A forest with components C_1..C_r has prod |C_t| rootings, and a pair
    inside C_t with a fixed root accounts for prod / |C_t| of them.

    Raises: ForestOracleLimitError if the graph has more than
    FOREST_MAX_EDGES edges.
    """
    if graph.m > FOREST_MAX_EDGES:
        raise ForestOracleLimitError(
            f"forest enumeration is limited to {FOREST_MAX_EDGES} edges, "
            f"got {graph.m}"
        )

    n = graph.n
    xi_total = 0
    xi_pair = [[0] * n for _ in range(n)]
    forests = 0
    for labels, count in _partitions(graph).items():
        forests += count
        groups: dict[int, list[int]] = {}
        for v, label in enumerate(labels):
            groups.setdefault(label, []).append(v)
        rootings = prod(len(members) for members in groups.values())
        xi_total += count * rootings
        for members in groups.values():
            share = count * rootings // len(members)
            for i in members:
                row = xi_pair[i]
                for j in members:
                    row[j] += share

    logger.debug(f"Enumerated {forests} forests for n={n}, m={graph.m}")
    return ForestCount(xi_total=xi_total, xi_pair=xi_pair, forests=forests)
