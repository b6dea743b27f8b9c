from collections.abc import Iterable
from fractions import Fraction
from functools import cached_property
from typing import Annotated, Literal

import networkx as nx
import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from laplace2ds.errors import InvalidStepError, Laplace2dsError

# Dense symmetric real matrix, stored row-major.
SymMatrix = npt.NDArray[np.float64]

# Dense matrix of fractions.Fraction entries.
ExactMatrix = npt.NDArray[np.object_]


class GraphError(Laplace2dsError):
    """Base class for invalid graphs and graph descriptions."""

    pass


class EdgeListParseError(GraphError):
    """Raised when edge list text can't be turned into a graph."""

    pass


class MalformedLineError(EdgeListParseError):
    """Raised when a line isn't a pair of non-negative integers."""

    pass


class VertexOutOfRangeError(EdgeListParseError):
    """Raised when an edge names a vertex outside 0..n-1."""

    pass


class DuplicateEdgeError(EdgeListParseError):
    """Raised when the same unordered edge is listed twice."""

    pass


class SelfLoopError(EdgeListParseError):
    """Raised when an edge joins a vertex to itself."""

    pass


class EdgeCountMismatchError(EdgeListParseError):
    """Raised when the header edge count disagrees with the listed edges."""

    pass


class InvalidFamilyError(GraphError):
    """Raised when a graph family is given invalid size parameters."""

    pass


class Graph(BaseModel):
    """Immutable simple undirected graph on vertices 0..n-1.

    Vertex k of a 1-based listing is index k - 1.
    """

    model_config = ConfigDict(frozen=True)

    # Number of vertices.
    n: int
    # Unordered edges (u, v) with u < v, sorted.
    edges: tuple[tuple[int, int], ...]
    # Sorted neighbor list of every vertex.
    adjacency: tuple[tuple[int, ...], ...]

    @model_validator(mode="after")
    def _check_consistency(self) -> "Graph":
        if self.n < 1:
            raise ValueError(f"a graph needs at least one vertex, got n={self.n}")
        seen: set[tuple[int, int]] = set()
        for u, v in self.edges:
            key = _check_edge(self.n, u, v, seen)
            if key != (u, v):
                raise ValueError(f"edge ({u}, {v}) must be stored as {key}")
            seen.add(key)
        if list(self.edges) != sorted(self.edges):
            raise ValueError("edges must be sorted")
        if len(self.adjacency) != self.n:
            raise ValueError("adjacency must have one entry per vertex")
        expected = _adjacency(self.n, self.edges)
        if expected != self.adjacency:
            raise ValueError("adjacency is inconsistent with the edge list")
        return self

    @staticmethod
    def from_edges(n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Builds a graph from unordered edges in any order or orientation.

        Raises: VertexOutOfRangeError, SelfLoopError or DuplicateEdgeError.
        """
        if n < 1:
            raise InvalidFamilyError(f"a graph needs at least one vertex, got n={n}")

        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            seen.add(_check_edge(n, u, v, seen))

        normalized = tuple(sorted(seen))
        return Graph(n=n, edges=normalized, adjacency=_adjacency(n, normalized))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(neighbors) for neighbors in self.adjacency)

    @cached_property
    def nx_graph(self) -> nx.Graph:
        """Read-only networkx view, built on first use."""
        view = nx.Graph()
        view.add_nodes_from(range(self.n))
        view.add_edges_from(self.edges)
        return nx.freeze(view)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]


def _check_edge(
    n: int, u: int, v: int, seen: set[tuple[int, int]], where: str = ""
) -> tuple[int, int]:
    """Normalized (min, max) key of an edge not yet in seen.

    Raises: VertexOutOfRangeError, SelfLoopError or DuplicateEdgeError.
    """
    if not (0 <= u < n and 0 <= v < n):
        raise VertexOutOfRangeError(
            f"{where}edge ({u}, {v}) is out of range for {n} vertices"
        )
    if u == v:
        raise SelfLoopError(f"{where}self-loop at vertex {u}")
    key = (min(u, v), max(u, v))
    if key in seen:
        raise DuplicateEdgeError(f"{where}duplicate edge {key}")
    return key


def _adjacency(
    n: int, edges: Iterable[tuple[int, int]]
) -> tuple[tuple[int, ...], ...]:
    neighbors: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        neighbors[u].append(v)
        neighbors[v].append(u)
    return tuple(tuple(sorted(row)) for row in neighbors)


def _parse_pair(lineno: int, content: str) -> tuple[int, int]:
    tokens = content.split()
    if len(tokens) != 2:
        raise MalformedLineError(
            f"line {lineno}: expected two integers, got {content!r}"
        )
    try:
        first, second = int(tokens[0]), int(tokens[1])
    except ValueError as e:
        raise MalformedLineError(
            f"line {lineno}: expected two integers, got {content!r}"
        ) from e
    return first, second


def parse_edge_list(text: str) -> Graph:
    """Parses the edge list format.

    The first non-comment line is "n m", followed by m lines "u v" with
    0 <= u, v < n. A '#' starts a comment that runs to the end of the line.
    """
    lines: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if content:
            lines.append((lineno, content))

    if not lines:
        raise MalformedLineError("missing 'n m' header line")

    header_lineno, header = lines[0]
    n, m = _parse_pair(header_lineno, header)
    if n < 1 or m < 0:
        raise MalformedLineError(
            f"line {header_lineno}: invalid header {header!r}, need n >= 1 and m >= 0"
        )

    seen: set[tuple[int, int]] = set()
    for lineno, content in lines[1:]:
        u, v = _parse_pair(lineno, content)
        seen.add(_check_edge(n, u, v, seen, where=f"line {lineno}: "))

    if len(seen) != m:
        raise EdgeCountMismatchError(
            f"header announces {m} edges but {len(seen)} were listed"
        )

    return Graph.from_edges(n, seen)


def format_edge_list(graph: Graph) -> str:
    """Writes a graph in the format read by parse_edge_list."""
    lines = [f"{graph.n} {graph.m}"]
    lines.extend(f"{u} {v}" for u, v in graph.edges)
    return "\n".join(lines) + "\n"


def _require_positive(name: str, value: int) -> None:
    if value < 1:
        raise InvalidFamilyError(f"{name} must be at least 1, got {value}")


class PathFamily(BaseModel):
    """Path P_n, vertices 0..n-1 in order."""

    kind: Literal["path"] = "path"
    n: int

    def build(self) -> Graph:
        _require_positive("n", self.n)
        return Graph.from_edges(self.n, [(k, k + 1) for k in range(self.n - 1)])


class StarFamily(BaseModel):
    """Star S_n, the center is the last vertex n-1."""

    kind: Literal["star"] = "star"
    n: int

    def build(self) -> Graph:
        _require_positive("n", self.n)
        center = self.n - 1
        return Graph.from_edges(self.n, [(j, center) for j in range(center)])


class CompleteFamily(BaseModel):
    """Complete graph K_n."""

    kind: Literal["complete"] = "complete"
    n: int

    def build(self) -> Graph:
        _require_positive("n", self.n)
        return Graph.from_edges(
            self.n, [(u, v) for u in range(self.n) for v in range(u + 1, self.n)]
        )


class EmptyFamily(BaseModel):
    """n isolated vertices."""

    kind: Literal["empty"] = "empty"
    n: int

    def build(self) -> Graph:
        _require_positive("n", self.n)
        return Graph.from_edges(self.n, [])


class BroomFamily(BaseModel):
    """Broom Br(k, l): path 0..k-1 with l pendants attached to vertex k-1."""

    kind: Literal["broom"] = "broom"
    k: int
    ell: int

    def build(self) -> Graph:
        _require_positive("k", self.k)
        _require_positive("ell", self.ell)
        edges = [(p, p + 1) for p in range(self.k - 1)]
        edges.extend((self.k - 1, self.k + q) for q in range(self.ell))
        return Graph.from_edges(self.k + self.ell, edges)


class StarlikeFamily(BaseModel):
    """Starlike tree S(n_1, ..., n_{k-1}).

    The center is vertex 0, arm centers are 1..k-1 and the pendants follow,
    grouped by arm.
    """

    kind: Literal["starlike"] = "starlike"
    arms: list[int]

    def build(self) -> Graph:
        if not self.arms:
            raise InvalidFamilyError("a starlike tree needs at least one arm")
        for count in self.arms:
            _require_positive("arm size", count)

        edges: list[tuple[int, int]] = []
        next_vertex = len(self.arms) + 1
        for arm, count in enumerate(self.arms, start=1):
            edges.append((0, arm))
            for _ in range(count):
                edges.append((arm, next_vertex))
                next_vertex += 1
        return Graph.from_edges(next_vertex, edges)


class RandomTreeFamily(BaseModel):
    """Uniform random labeled tree from a seeded Prüfer sequence."""

    kind: Literal["random-tree"] = "random-tree"
    n: int
    seed: int = 0

    def build(self) -> Graph:
        _require_positive("n", self.n)
        if self.n <= 2:
            return PathFamily(n=self.n).build()
        rng = np.random.default_rng(self.seed)
        sequence = rng.integers(0, self.n, size=self.n - 2).tolist()
        tree = nx.from_prufer_sequence(sequence)
        return Graph.from_edges(self.n, tree.edges())


class RandomConnectedFamily(BaseModel):
    """Random connected graph: a random tree united with a G(n, p) sample."""

    kind: Literal["random-connected"] = "random-connected"
    n: int
    p: float
    seed: int = 0

    def build(self) -> Graph:
        _require_positive("n", self.n)
        if not 0.0 <= self.p <= 1.0:
            raise InvalidFamilyError(
                f"edge probability must be in [0, 1], got {self.p}"
            )
        tree = RandomTreeFamily(n=self.n, seed=self.seed).build()
        sample = nx.gnp_random_graph(self.n, self.p, seed=self.seed + 1)
        edges = set(tree.edges)
        edges.update((min(u, v), max(u, v)) for u, v in sample.edges())
        return Graph.from_edges(self.n, edges)


class T3TreeFamily(BaseModel):
    """Degree-3 tree: a root with three complete binary subtrees.

    depth=1 is S_4, and every non-pendant vertex has degree 3.
    """

    kind: Literal["t3"] = "t3"
    depth: int

    def build(self) -> Graph:
        _require_positive("depth", self.depth)
        edges: list[tuple[int, int]] = []
        frontier = [0]
        next_vertex = 1
        for _ in range(self.depth):
            grown: list[int] = []
            for v in frontier:
                for _ in range(3 if v == 0 else 2):
                    edges.append((v, next_vertex))
                    grown.append(next_vertex)
                    next_vertex += 1
            frontier = grown
        return Graph.from_edges(next_vertex, edges)


class RandomT3TreeFamily(BaseModel):
    """Random degree-3 tree with the given number of internal vertices.

    Starts from S_4 and repeatedly gives a random pendant two new leaves.
    """

    kind: Literal["random-t3"] = "random-t3"
    internal: int
    seed: int = 0

    def build(self) -> Graph:
        _require_positive("internal", self.internal)
        rng = np.random.default_rng(self.seed)
        edges = [(0, 1), (0, 2), (0, 3)]
        leaves = [1, 2, 3]
        next_vertex = 4
        for _ in range(self.internal - 1):
            index = int(rng.integers(len(leaves)))
            leaves[index], leaves[-1] = leaves[-1], leaves[index]
            grown = leaves.pop()
            for _ in range(2):
                edges.append((grown, next_vertex))
                leaves.append(next_vertex)
                next_vertex += 1
        return Graph.from_edges(next_vertex, edges)


class ConeFamily(BaseModel):
    """Cone over another family: a new last vertex joined to every vertex."""

    kind: Literal["cone"] = "cone"
    base: "GraphFamily"

    def build(self) -> Graph:
        return cone(self.base.build())


GraphFamily = Annotated[
    PathFamily
    | StarFamily
    | CompleteFamily
    | EmptyFamily
    | BroomFamily
    | StarlikeFamily
    | RandomTreeFamily
    | RandomConnectedFamily
    | T3TreeFamily
    | RandomT3TreeFamily
    | ConeFamily,
    Field(discriminator="kind"),
]

ConeFamily.model_rebuild()


def generate(family: GraphFamily) -> Graph:
    """Builds the graph described by family.

    Raises: InvalidFamilyError on zero or negative size parameters.
    """
    return family.build()


def cone(graph: Graph) -> Graph:
    """Adds vertex n adjacent to every vertex 0..n-1."""
    apex = graph.n
    edges = list(graph.edges)
    edges.extend((v, apex) for v in range(graph.n))
    return Graph.from_edges(graph.n + 1, edges)


def laplacian(graph: Graph) -> SymMatrix:
    """L_G = D - A as a dense float matrix."""
    lap = np.zeros((graph.n, graph.n), dtype=np.float64)
    if graph.edges:
        us, vs = np.array(graph.edges, dtype=np.intp).T
        lap[us, vs] = -1.0
        lap[vs, us] = -1.0
    lap[np.diag_indices(graph.n)] = np.array(graph.degrees, dtype=np.float64)
    return lap


def modified_laplacian(graph: Graph, h: float | Fraction = 1.0) -> SymMatrix:
    """I + h * L_G, symmetric positive definite with unit row sums.

    Raises: InvalidStepError if h <= 0.
    """
    if h <= 0:
        raise InvalidStepError(f"step h must be positive, got {h}")
    return np.eye(graph.n) + float(h) * laplacian(graph)


def modified_laplacian_exact(graph: Graph, h: Fraction | int = 1) -> ExactMatrix:
    """I + h * L_G with Fraction entries.

    Raises: InvalidStepError if h <= 0.
    """
    step = Fraction(h)
    if step <= 0:
        raise InvalidStepError(f"step h must be positive, got {step}")
    matrix = np.full((graph.n, graph.n), Fraction(0), dtype=object)
    for u, v in graph.edges:
        matrix[u, v] = -step
        matrix[v, u] = -step
    for v, degree in enumerate(graph.degrees):
        matrix[v, v] = 1 + step * degree
    return matrix


def bfs_distances(graph: Graph, source: int) -> npt.NDArray[np.float64]:
    """Shortest-path edge counts from source, unreachable vertices are inf."""
    if not 0 <= source < graph.n:
        raise VertexOutOfRangeError(f"vertex {source} is out of range")
    distances = np.full(graph.n, np.inf)
    lengths = nx.single_source_shortest_path_length(graph.nx_graph, source)
    for v, length in lengths.items():
        distances[v] = length
    return distances


def connected_components(graph: Graph) -> list[list[int]]:
    """Vertex sets of the connected components, each sorted, ordered by minimum."""
    components = [sorted(c) for c in nx.connected_components(graph.nx_graph)]
    return sorted(components, key=lambda members: members[0])


class GraphReport(BaseModel):
    """Structural summary of a graph."""

    # Number of vertices and edges.
    n: int
    m: int
    # Number of connected components.
    components: int
    is_connected: bool
    # Connected with m = n - 1.
    is_tree: bool
    # Degree-one vertices, V_p.
    pendant_vertices: list[int]
    # Degree of every vertex.
    degrees: list[int]


def classify(graph: Graph) -> GraphReport:
    view = graph.nx_graph
    degrees = list(graph.degrees)
    is_connected = nx.is_connected(view)
    return GraphReport(
        n=graph.n,
        m=graph.m,
        components=nx.number_connected_components(view),
        is_connected=is_connected,
        is_tree=nx.is_tree(view),
        pendant_vertices=[v for v, d in enumerate(degrees) if d == 1],
        degrees=degrees,
    )


def is_tree(graph: Graph) -> bool:
    return nx.is_tree(graph.nx_graph)


def is_path_graph(graph: Graph) -> bool:
    """A path under some labeling."""
    return is_tree(graph) and max(graph.degrees, default=0) <= 2


def is_labeled_path(graph: Graph) -> bool:
    """The path 0 - 1 - ... - (n-1) exactly."""
    return graph.edges == tuple((k, k + 1) for k in range(graph.n - 1))


def is_star_graph(graph: Graph) -> bool:
    """A star S_n with n >= 2 under some labeling."""
    return (
        graph.n >= 2
        and is_tree(graph)
        and max(graph.degrees) == graph.n - 1
    )


def is_complete_graph(graph: Graph) -> bool:
    return graph.m == graph.n * (graph.n - 1) // 2


def is_t3_tree(graph: Graph) -> bool:
    """A tree whose non-pendant vertices all have degree 3."""
    return (
        graph.n >= 2
        and is_tree(graph)
        and all(d in (1, 3) for d in graph.degrees)
    )
