"""Executable checks of the structural properties of B = (I + hL_G)^{-1}.

Every check returns a CheckReport listing the witnesses of any violation.
Exact matrices are compared exactly. Float matrices use MATRIX_TOLERANCE for
identities and treat a strict inequality as satisfied when its margin exceeds
STRICT_MARGIN, counting smaller positive margins as near ties.
"""

import math
from collections.abc import Callable, Iterable
from enum import Enum
from fractions import Fraction
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field

from laplace2ds.constants import (
    EQUALITY_RTOL,
    FOREST_MAX_EDGES,
    MATRIX_TOLERANCE,
    MAX_REPORTED_VIOLATIONS,
    SPECTRAL_TOLERANCE,
    STRICT_MARGIN,
    logger,
)
from laplace2ds.dense import (
    algebraic_connectivity,
    bareiss_determinant,
    cholesky_factor,
    cholesky_solve,
    compute_B_dense,
    spectrum_report,
)
from laplace2ds.errors import DisconnectedGraphError, Laplace2dsError, NotATreeError
from laplace2ds.forest import forest_count_oracle
from laplace2ds.graph import (
    Graph,
    GraphReport,
    bfs_distances,
    classify,
    is_complete_graph,
    is_labeled_path,
    is_path_graph,
    is_star_graph,
    is_t3_tree,
    is_tree,
    modified_laplacian_exact,
)
from laplace2ds.matrix import DSMatrix, Mode, format_value
from laplace2ds.path import fib
from laplace2ds.tree import MultiplierMap, compute_B_tree, multipliers, orient


class DegreeConditionError(Laplace2dsError):
    """Raised when a degree-3 tree is required and the graph isn't one."""

    pass


class MonotonePathError(Laplace2dsError):
    """Raised when no neighbor strictly improves the row entry."""

    pass


class RecoveryError(Laplace2dsError):
    """Raised when a matrix isn't the inverse of I + L_G for a simple graph."""

    pass


class CheckStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIP = "skip"


class Violation(BaseModel):
    """A failed comparison."""

    # What was expected and what was found.
    message: str
    # Vertices the comparison is about.
    vertices: list[int] = Field(default_factory=list)


class CheckReport(BaseModel):
    """Outcome of one named check."""

    name: str
    status: CheckStatus
    # Number of individual comparisons made.
    checked: int = 0
    # Total number of failed comparisons.
    violation_count: int = 0
    # Strict inequalities satisfied by less than STRICT_MARGIN.
    near_ties: int = 0
    # The first MAX_REPORTED_VIOLATIONS failures.
    violations: list[Violation] = Field(default_factory=list)
    # Skip reasons, equality flags and other witnesses.
    notes: list[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status != CheckStatus.FAIL


class _Recorder:
    def __init__(self, name: str) -> None:
        self.name = name
        self.checked = 0
        self.violation_count = 0
        self.near_ties = 0
        self.violations: list[Violation] = []
        self.notes: list[str] = []

    def expect(self, ok: bool, message: str, vertices: Iterable[int] = ()) -> bool:
        self.checked += 1
        if not ok:
            self.violation_count += 1
            if len(self.violations) < MAX_REPORTED_VIOLATIONS:
                self.violations.append(
                    Violation(message=message, vertices=list(vertices))
                )
        return ok

    def expect_greater(
        self,
        larger: Any,
        smaller: Any,
        exact: bool,
        message: str,
        vertices: Iterable[int] = (),
    ) -> bool:
        """Records larger > smaller under the strictness policy."""
        difference = larger - smaller
        if exact:
            return self.expect(difference > 0, message, vertices)
        if 0 < difference <= STRICT_MARGIN:
            self.near_ties += 1
        return self.expect(difference > 0, message, vertices)

    def note(self, message: str) -> None:
        self.notes.append(message)

    def report(self) -> CheckReport:
        return CheckReport(
            name=self.name,
            status=CheckStatus.FAIL if self.violation_count else CheckStatus.PASS,
            checked=self.checked,
            violation_count=self.violation_count,
            near_ties=self.near_ties,
            violations=self.violations,
            notes=self.notes,
        )


def skipped(name: str, reason: str) -> CheckReport:
    return CheckReport(name=name, status=CheckStatus.SKIP, notes=[f"skipped: {reason}"])


def _tolerance(b: DSMatrix, tol: float | None = None) -> Any:
    if tol is not None:
        return tol
    return 0 if b.is_exact else MATRIX_TOLERANCE


def _in_mode(b: DSMatrix, value: Fraction) -> Any:
    return value if b.is_exact else float(value)


def _pendant_factor(b: DSMatrix, h: Fraction | None) -> Any:
    step = b.h if h is None else Fraction(h)
    return _in_mode(b, (1 + step) / step)


def check_doubly_stochastic(b: DSMatrix, tol: float | None = None) -> CheckReport:
    """Unit row and column sums, nonnegative entries, symmetry."""
    recorder = _Recorder("doubly-stochastic")
    tolerance = _tolerance(b, tol)
    entries = b.entries
    n = b.n

    for i in range(n):
        row_sum = sum(entries[i, :])
        recorder.expect(
            abs(row_sum - 1) <= tolerance,
            f"row {i} sums to {format_value(row_sum)}",
            [i],
        )
        column_sum = sum(entries[:, i])
        recorder.expect(
            abs(column_sum - 1) <= tolerance,
            f"column {i} sums to {format_value(column_sum)}",
            [i],
        )
    for i in range(n):
        for j in range(n):
            value = entries[i, j]
            recorder.expect(
                value >= -tolerance,
                f"entry ({i}, {j}) is negative: {format_value(value)}",
                [i, j],
            )
            if j > i:
                recorder.expect(
                    abs(value - entries[j, i]) <= tolerance,
                    f"entries ({i}, {j}) and ({j}, {i}) differ",
                    [i, j],
                )
    return recorder.report()


def check_pendant_relation(
    graph: Graph, b: DSMatrix, h: Fraction | None = None, tol: float | None = None
) -> CheckReport:
    """b_ik = ((1 + h) / h) b_ij for pendant v_j with neighbor v_k and every i != j."""
    recorder = _Recorder("pendant")
    tolerance = _tolerance(b, tol)
    factor = _pendant_factor(b, h)
    entries = b.entries

    pendants = [v for v, d in enumerate(graph.degrees) if d == 1]
    if not pendants:
        recorder.note("no pendant vertices")
    for j in pendants:
        k = graph.adjacency[j][0]
        recorder.note(f"pendant {j} attached to {k}")
        for i in range(graph.n):
            if i == j:
                continue
            recorder.expect(
                abs(entries[i, k] - factor * entries[i, j]) <= tolerance,
                f"b[{i},{k}]={format_value(entries[i, k])} isn't "
                f"{format_value(factor)} * b[{i},{j}]={format_value(entries[i, j])}",
                [i, j, k],
            )
    return recorder.report()


def check_tree_decay(
    graph: Graph, b: DSMatrix, h: Fraction | None = None, tol: float | None = None
) -> CheckReport:
    """b_ip >= ((1 + h) / h) b_ik along every edge (p, k) directed away from i."""
    name = "tree-decay"
    if not is_tree(graph):
        return skipped(name, "not a tree")

    recorder = _Recorder(name)
    tolerance = _tolerance(b, tol)
    factor = _pendant_factor(b, h)
    entries = b.entries
    for i in range(graph.n):
        for p, k in orient(graph, i).directed_edges():
            recorder.expect(
                entries[i, p] >= factor * entries[i, k] - tolerance,
                f"row {i}: b[{i},{p}] < {format_value(factor)} * b[{i},{k}]",
                [i, p, k],
            )
    return recorder.report()


def check_d_monotone(b: DSMatrix, tol: float | None = None) -> CheckReport:
    """Rows strictly increase up to the diagonal and strictly decrease after it.

    Also checks the decay by at least (1 + h) / h between neighbors, which
    holds for the labeled path.
    """
    recorder = _Recorder("d-monotone")
    tolerance = _tolerance(b, tol)
    factor = _pendant_factor(b, None)
    entries = b.entries
    n = b.n

    for i in range(n):
        for j in range(n - 1):
            nearer, farther = (j + 1, j) if j < i else (j, j + 1)
            recorder.expect_greater(
                entries[i, nearer],
                entries[i, farther],
                b.is_exact,
                f"row {i}: b[{i},{nearer}] isn't above b[{i},{farther}]",
                [i, nearer, farther],
            )
            recorder.expect(
                entries[i, nearer] >= factor * entries[i, farther] - tolerance,
                f"row {i}: b[{i},{nearer}] < {format_value(factor)} * b[{i},{farther}]",
                [i, nearer, farther],
            )
    return recorder.report()


def check_diagonal_dominance(b: DSMatrix) -> CheckReport:
    """b_ii > b_ij for all j != i."""
    recorder = _Recorder("diagonal")
    entries = b.entries
    for i in range(b.n):
        for j in range(b.n):
            if i != j:
                recorder.expect_greater(
                    entries[i, i],
                    entries[i, j],
                    b.is_exact,
                    f"b[{i},{i}] isn't above b[{i},{j}]",
                    [i, j],
                )
    return recorder.report()


def increasing_path(b: DSMatrix, graph: Graph, i: int, j: int) -> list[int]:
    """Path j, ..., i along edges of G on which row i of B strictly increases.

    Greedy: always moves to the neighbor with the largest entry, ties to the
    smallest index.

    Raises: DisconnectedGraphError, MonotonePathError.
    """
    if not classify(graph).is_connected:
        raise DisconnectedGraphError("increasing paths need a connected graph")

    entries = b.entries
    path = [j]
    current = j
    while current != i:
        best = max(graph.adjacency[current], key=lambda w: (entries[i, w], -w))
        if not entries[i, best] > entries[i, current] or len(path) > graph.n:
            raise MonotonePathError(
                f"no neighbor of {current} improves b[{i},{current}]"
            )
        path.append(best)
        current = best
    return path


def check_increasing_paths(graph: Graph, b: DSMatrix) -> CheckReport:
    name = "increasing-path"
    if not classify(graph).is_connected:
        return skipped(name, "not connected")

    recorder = _Recorder(name)
    entries = b.entries
    longest = 0
    for i in range(graph.n):
        for j in range(graph.n):
            if i == j:
                continue
            try:
                path = increasing_path(b, graph, i, j)
            except MonotonePathError as e:
                recorder.expect(False, str(e), [i, j])
                continue
            longest = max(longest, len(path) - 1)
            for a, c in zip(path, path[1:], strict=False):
                recorder.expect_greater(
                    entries[i, c],
                    entries[i, a],
                    b.is_exact,
                    f"row {i}: step {a} -> {c} doesn't increase",
                    [i, a, c],
                )
    recorder.note(f"longest increasing path has {longest} edges")
    return recorder.report()


def diag_lower_bound(graph: Graph, i: int, h: Fraction | int | str = 1) -> Fraction:
    """(sum over j of (h / (1 + h))^d(i, j))^{-1}, a lower bound on b_ii for trees.

    Raises: NotATreeError.
    """
    if not is_tree(graph):
        raise NotATreeError("the diagonal bound needs a tree")
    step = Fraction(h)
    ratio = step / (1 + step)
    total = sum((ratio ** int(d) for d in bfs_distances(graph, i)), Fraction(0))
    return 1 / total


def broom_diag_lower_bound(k: int, ell: int, vertex: int) -> Fraction:
    """Closed forms of diag_lower_bound for the broom Br(k, l) at h = 1.

    Path vertex p (1-based) gives 1 / (3 - (1/2)^(p-1) + (l-2)(1/2)^(k-p+1)),
    a brush pendant gives 1 / (7/4 + l/4 - (1/2)^k).
    """
    half = Fraction(1, 2)
    if vertex < k:
        p = vertex + 1
        return 1 / (3 - half ** (p - 1) + (ell - 2) * half ** (k - p + 1))
    return 1 / (Fraction(7, 4) + Fraction(ell, 4) - half**k)


def check_diag_lower_bound(
    graph: Graph, b: DSMatrix, tol: float | None = None
) -> CheckReport:
    name = "diag-bound"
    if not is_tree(graph):
        return skipped(name, "not a tree")

    recorder = _Recorder(name)
    tolerance = _tolerance(b, tol)
    for i in range(graph.n):
        bound = _in_mode(b, diag_lower_bound(graph, i, b.h))
        recorder.expect(
            b.entries[i, i] >= bound - tolerance,
            f"b[{i},{i}]={format_value(b.entries[i, i])} is below "
            f"{format_value(bound)}",
            [i],
        )
    return recorder.report()


class Deg3Bounds(BaseModel):
    """Brackets for row i of B_T, T a tree whose inner vertices have degree 3."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    vertex: int
    # Lower and upper bounds on the product of inverse multipliers towards j.
    eta_tilde: dict[int, Fraction]
    eta_hat: dict[int, Fraction]
    diag_lower: Fraction
    diag_upper: Fraction
    entry_lower: dict[int, Fraction]
    entry_upper: dict[int, Fraction]


def t3_bounds(graph: Graph, i: int) -> Deg3Bounds:
    """Raises: DegreeConditionError if a non-pendant vertex hasn't degree 3."""
    if not is_t3_tree(graph):
        raise DegreeConditionError(
            "every non-pendant vertex of the tree must have degree 3"
        )

    distances = bfs_distances(graph, i)
    degrees = graph.degrees
    eta_tilde: dict[int, Fraction] = {}
    eta_hat: dict[int, Fraction] = {}
    for j in range(graph.n):
        if j == i:
            continue
        d = int(distances[j])
        if degrees[j] == 1:
            eta_tilde[j] = Fraction(1, 2) * Fraction(1, 4) ** (d - 1)
            eta_hat[j] = Fraction(1, 2) * Fraction(1, 3) ** (d - 1)
        else:
            eta_tilde[j] = Fraction(1, 4) ** d
            eta_hat[j] = Fraction(1, 3) ** d

    diag_lower = 1 / (1 + sum(eta_hat.values(), Fraction(0)))
    diag_upper = 1 / (1 + sum(eta_tilde.values(), Fraction(0)))
    return Deg3Bounds(
        vertex=i,
        eta_tilde=eta_tilde,
        eta_hat=eta_hat,
        diag_lower=diag_lower,
        diag_upper=diag_upper,
        entry_lower={j: eta * diag_lower for j, eta in eta_tilde.items()},
        entry_upper={j: eta * diag_upper for j, eta in eta_hat.items()},
    )


def check_t3_bounds(graph: Graph, b: DSMatrix, tol: float | None = None) -> CheckReport:
    name = "t3-bounds"
    if not is_t3_tree(graph):
        return skipped(name, "not a tree with inner degrees 3")
    if b.h != 1:
        return skipped(name, "brackets hold for h = 1 only")

    recorder = _Recorder(name)
    tolerance = _tolerance(b, tol)
    entries = b.entries
    for i in range(graph.n):
        bounds = t3_bounds(graph, i)
        low, high = _in_mode(b, bounds.diag_lower), _in_mode(b, bounds.diag_upper)
        recorder.expect(
            low - tolerance <= entries[i, i] <= high + tolerance,
            f"b[{i},{i}]={format_value(entries[i, i])} outside "
            f"[{format_value(low)}, {format_value(high)}]",
            [i],
        )
        for j in bounds.eta_tilde:
            recorder.expect(
                bounds.eta_tilde[j] <= bounds.eta_hat[j],
                f"eta bounds for ({i}, {j}) are inverted",
                [i, j],
            )
            low = _in_mode(b, bounds.entry_lower[j])
            high = _in_mode(b, bounds.entry_upper[j])
            recorder.expect(
                low - tolerance <= entries[i, j] <= high + tolerance,
                f"b[{i},{j}]={format_value(entries[i, j])} outside "
                f"[{format_value(low)}, {format_value(high)}]",
                [i, j],
            )
    return recorder.report()


def multiplier_bounds_check(
    mults: MultiplierMap,
    degrees: tuple[int, ...],
    h: Fraction | None = None,
    tol: float | None = None,
) -> CheckReport:
    """1 + 1/h <= (1 - h/(h+1)) d_k + h/(h+1) + 1/h <= m_pk <= d_k + 1/h.

    With m* the smallest multiplier leaving v_k, also m_pk >= 1/h + d_k - (d_k - 1)/m*.
    """
    recorder = _Recorder("multiplier-bounds")
    exact = mults.mode == Mode.EXACT
    tolerance = (0 if exact else MATRIX_TOLERANCE) if tol is None else tol
    step = mults.h if h is None else Fraction(h)

    def value(x: Fraction) -> Any:
        return x if exact else float(x)

    inv_h = 1 / step
    floor = value(1 + inv_h)
    ratio = step / (step + 1)
    equalities = 0
    for p, k, m in mults.edges():
        d = degrees[k]
        lower = value((1 - ratio) * d + ratio + inv_h)
        upper = value(d + inv_h)
        recorder.expect(
            floor <= lower + tolerance,
            f"lower bound {format_value(lower)} for ({p}, {k}) is below the floor",
            [p, k],
        )
        recorder.expect(
            lower - tolerance <= m <= upper + tolerance,
            f"m[{p},{k}]={format_value(m)} outside "
            f"[{format_value(lower)}, {format_value(upper)}]",
            [p, k],
        )
        children = mults.children_of(k)
        if children:
            smallest = min(mults[(k, c)] for c in children)
            refined = value(inv_h) + d - (d - 1) / smallest
            recorder.expect(
                m >= refined - tolerance,
                f"m[{p},{k}]={format_value(m)} below refined {format_value(refined)}",
                [p, k],
            )
        if abs(m - lower) <= tolerance:
            equalities += 1
    recorder.note(f"{equalities} multipliers meet the lower bound")
    return recorder.report()


def check_multiplier_bounds(
    graph: Graph, h: Fraction | int | str = 1, mode: Mode = Mode.EXACT
) -> CheckReport:
    """Runs multiplier_bounds_check for every root of a tree."""
    name = "multiplier-bounds"
    if not is_tree(graph):
        return skipped(name, "not a tree")

    merged = _Recorder(name)
    for root in range(graph.n):
        mults = multipliers(orient(graph, root), graph.degrees, h, mode)
        report = multiplier_bounds_check(mults, graph.degrees)
        merged.checked += report.checked
        merged.violation_count += report.violation_count
        room = MAX_REPORTED_VIOLATIONS - len(merged.violations)
        merged.violations.extend(report.violations[:room])
    return merged.report()


def exact_inverse(graph: Graph) -> DSMatrix:
    """Exact B at h = 1, from the tree engine when possible."""
    if is_tree(graph):
        return compute_B_tree(graph, 1, Mode.EXACT)
    return compute_B_dense(graph, 1, Mode.EXACT)


def check_forest_oracle(
    graph: Graph, b: DSMatrix | None = None, tol: float | None = None
) -> CheckReport:
    """b_ij against forest count ratios and xi against det(I + L_G)."""
    name = "forest-oracle"
    if graph.m > FOREST_MAX_EDGES:
        return skipped(name, f"more than {FOREST_MAX_EDGES} edges")
    if b is None:
        b = exact_inverse(graph)
    if b.h != 1:
        return skipped(name, "forest counts describe h = 1 only")

    recorder = _Recorder(name)
    tolerance = _tolerance(b, tol)
    count = forest_count_oracle(graph)
    determinant = bareiss_determinant(modified_laplacian_exact(graph, 1))
    recorder.expect(
        count.xi_total == determinant,
        f"{count.xi_total} rooted forests but det(I + L) = {determinant}",
    )
    recorder.note(f"{count.xi_total} rooted forests")
    for i in range(graph.n):
        for j in range(graph.n):
            expected = _in_mode(b, count.accessibility(i, j))
            recorder.expect(
                abs(b.entries[i, j] - expected) <= tolerance,
                f"b[{i},{j}]={format_value(b.entries[i, j])} but forests give "
                f"{format_value(expected)}",
                [i, j],
            )
            recorder.expect(
                count.xi_pair[i][j] == count.xi_pair[j][i],
                f"forest counts for ({i}, {j}) aren't symmetric",
                [i, j],
            )
    return recorder.report()


def check_spectrum(graph: Graph, b: DSMatrix) -> CheckReport:
    """Sorted eigenvalues of B against 1 / (1 + h lambda_i)."""
    recorder = _Recorder("spectrum")
    report = spectrum_report(graph, b.h, b)
    for k, (found, predicted) in enumerate(
        zip(report.b_eigs, report.predicted_b_eigs, strict=True)
    ):
        recorder.expect(
            abs(found - predicted) <= SPECTRAL_TOLERANCE,
            f"eigenvalue {k} of B is {found}, expected {predicted}",
        )
    recorder.note(f"a(G) = {report.algebraic_connectivity:.12g}")
    return recorder.report()


class BoundsReport(BaseModel):
    """Smallest entry omega(G) of B against the known bounds."""

    n: int
    omega: str | float
    # omega <= 1 / (n + 1), equality for complete graphs, needs n >= 2.
    upper_bound: str | float
    upper_bound_holds: bool
    complete_equality: bool
    is_tree: bool
    # 1 / f_{2n} <= omega <= 1 / (2(n + 1)) for trees with n >= 3.
    tree_lower: str | float | None = None
    tree_upper: str | float | None = None
    tree_bounds_hold: bool | None = None
    path_equality: bool | None = None
    star_equality: bool | None = None
    # a(G) >= 2(n + 1) omega.
    algebraic_connectivity: float
    connectivity_bound: float
    connectivity_bound_holds: bool

    @property
    def holds(self) -> bool:
        return (
            self.upper_bound_holds
            and self.tree_bounds_hold is not False
            and self.connectivity_bound_holds
        )


def bounds_report(graph: Graph, b: DSMatrix) -> BoundsReport:
    """Raises: DisconnectedGraphError."""
    if not classify(graph).is_connected:
        raise DisconnectedGraphError("omega bounds need a connected graph")

    n = graph.n
    tolerance = _tolerance(b)
    omega = b.min_entry()

    def equal(first: Any, second: Any) -> bool:
        if b.is_exact:
            return first == second
        return math.isclose(float(first), float(second), rel_tol=EQUALITY_RTOL)

    if n >= 2:
        upper = _in_mode(b, Fraction(1, n + 1))
        upper_holds = bool(omega <= upper + tolerance)
        complete_equality = equal(omega, upper)
    else:
        upper = _in_mode(b, Fraction(1))
        upper_holds = True
        complete_equality = False

    tree = is_tree(graph)
    report: dict[str, Any] = {}
    if tree and n >= 3:
        lower = _in_mode(b, Fraction(1, fib(2 * n)))
        tree_upper = _in_mode(b, Fraction(1, 2 * (n + 1)))
        report = {
            "tree_lower": format_value(lower),
            "tree_upper": format_value(tree_upper),
            "tree_bounds_hold": bool(
                lower - tolerance <= omega <= tree_upper + tolerance
            ),
            "path_equality": equal(omega, lower),
            "star_equality": equal(omega, tree_upper),
        }

    connectivity = algebraic_connectivity(graph)
    connectivity_bound = 2 * (n + 1) * float(omega)
    connectivity_holds = n < 2 or connectivity >= connectivity_bound - MATRIX_TOLERANCE
    return BoundsReport(
        n=n,
        omega=format_value(omega),
        upper_bound=format_value(upper),
        upper_bound_holds=upper_holds,
        complete_equality=complete_equality,
        is_tree=tree,
        algebraic_connectivity=connectivity,
        connectivity_bound=connectivity_bound,
        connectivity_bound_holds=connectivity_holds,
        **report,
    )


def check_bounds(graph: Graph, b: DSMatrix) -> CheckReport:
    name = "bounds"
    if not classify(graph).is_connected:
        return skipped(name, "not connected")
    if b.h != 1:
        return skipped(name, "omega bounds are stated for h = 1")

    recorder = _Recorder(name)
    report = bounds_report(graph, b)
    recorder.expect(
        report.upper_bound_holds,
        f"omega={report.omega} exceeds 1/(n+1)={report.upper_bound}",
    )
    if report.tree_bounds_hold is not None:
        recorder.expect(
            report.tree_bounds_hold,
            f"omega={report.omega} outside [{report.tree_lower}, {report.tree_upper}]",
        )
    recorder.expect(
        report.connectivity_bound_holds,
        f"a(G)={report.algebraic_connectivity} below 2(n+1) omega="
        f"{report.connectivity_bound}",
    )

    recorder.note(f"omega = {report.omega}")
    if report.complete_equality:
        recorder.note("omega equals 1/(n+1)")
    if report.path_equality:
        recorder.note("omega equals 1/f_2n")
    if report.star_equality:
        recorder.note("omega equals 1/(2(n+1))")

    # Equality characterizes the extremal graphs.
    recorder.expect(
        report.complete_equality == (graph.n >= 2 and is_complete_graph(graph)),
        "equality in omega <= 1/(n+1) doesn't match completeness",
    )
    if report.path_equality is not None:
        recorder.expect(
            report.path_equality == is_path_graph(graph),
            "equality omega = 1/f_2n doesn't match being a path",
        )
        recorder.expect(
            report.star_equality == is_star_graph(graph),
            "equality omega = 1/(2(n+1)) doesn't match being a star",
        )
    return recorder.report()


class CentralityReport(BaseModel):
    """Resistance-like distance rho and remoteness r.

    rho(v_i, v_j) = b_ii + b_jj - 2 b_ij and r(i) = sum_j rho(v_i, v_j).
    """

    model_config = ConfigDict(frozen=True)

    # Matrix of rho values, Fractions or floats.
    rho: Any
    remoteness: list[Any]
    # Minimizers of r, and minimizers of the diagonal of B.
    least_remote: list[int]
    least_diagonal: list[int]
    # Vertices by increasing remoteness, ties by index.
    ranking: list[int]

    @property
    def consistent(self) -> bool:
        return self.least_remote == self.least_diagonal


def _argmin(values: list[Any], tolerance: Any) -> list[int]:
    smallest = min(values)
    return [k for k, v in enumerate(values) if v - smallest <= tolerance]


def centrality_report(b: DSMatrix) -> CentralityReport:
    n = b.n
    entries = b.entries
    tolerance = _tolerance(b)
    diagonal = b.diagonal()

    if b.is_exact:
        rho: Any = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                rho[i, j] = diagonal[i] + diagonal[j] - 2 * entries[i, j]
    else:
        diag = np.array(diagonal, dtype=np.float64)
        rho = diag[:, None] + diag[None, :] - 2 * np.asarray(entries, dtype=np.float64)

    remoteness = [sum(rho[i, :]) for i in range(n)]
    return CentralityReport(
        rho=rho,
        remoteness=remoteness,
        least_remote=_argmin(remoteness, tolerance),
        least_diagonal=_argmin(diagonal, tolerance),
        ranking=sorted(range(n), key=lambda k: (remoteness[k], k)),
    )


class CentralityDocument(BaseModel):
    """JSON summary of a centrality report."""

    least_remote: list[int]
    least_diagonal: list[int]
    ranking: list[int]
    remoteness: list[str | float]
    # Pair with the smallest and the largest rho, i < j.
    closest_pair: list[int] | None
    closest_rho: str | float | None
    farthest_pair: list[int] | None
    farthest_rho: str | float | None


def centrality_document(report: CentralityReport) -> CentralityDocument:
    n = len(report.remoteness)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    closest = min(pairs, key=lambda p: report.rho[p], default=None)
    farthest = max(pairs, key=lambda p: report.rho[p], default=None)
    return CentralityDocument(
        least_remote=report.least_remote,
        least_diagonal=report.least_diagonal,
        ranking=report.ranking,
        remoteness=[format_value(v) for v in report.remoteness],
        closest_pair=list(closest) if closest else None,
        closest_rho=format_value(report.rho[closest]) if closest else None,
        farthest_pair=list(farthest) if farthest else None,
        farthest_rho=format_value(report.rho[farthest]) if farthest else None,
    )


def check_metric(b: DSMatrix) -> CheckReport:
    """rho is a metric and the least remote vertices minimize the diagonal."""
    recorder = _Recorder("metric")
    report = centrality_report(b)
    rho = report.rho
    tolerance = _tolerance(b)
    n = b.n
    for i in range(n):
        recorder.expect(abs(rho[i, i]) <= tolerance, f"rho({i},{i}) isn't 0", [i])
        for j in range(n):
            recorder.expect(rho[i, j] >= -tolerance, f"rho({i},{j}) < 0", [i, j])
            recorder.expect(
                abs(rho[i, j] - rho[j, i]) <= tolerance,
                f"rho({i},{j}) != rho({j},{i})",
                [i, j],
            )
            if i != j:
                recorder.expect_greater(
                    rho[i, j], 0, b.is_exact, f"rho({i},{j}) isn't positive", [i, j]
                )
            for k in range(n):
                recorder.expect(
                    rho[i, k] <= rho[i, j] + rho[j, k] + tolerance,
                    f"triangle inequality fails for {i}, {j}, {k}",
                    [i, j, k],
                )
    recorder.expect(
        report.consistent,
        f"least remote {report.least_remote} differ from smallest diagonal "
        f"{report.least_diagonal}",
    )
    recorder.note(f"least remote vertices: {report.least_remote}")
    return recorder.report()


def recover_graph(b: Any, tol: float = 0.1) -> Graph:
    """Inverts a possibly rounded B and reads off the graph with B = (I + L_G)^{-1}.

    Raises: RecoveryError if the rounded inverse isn't I + L_G.
    """
    matrix = np.asarray(b, dtype=np.float64)
    matrix = (matrix + matrix.T) / 2
    n = matrix.shape[0]
    inverse = cholesky_solve(cholesky_factor(matrix), np.eye(n))
    rounded = np.rint(inverse)

    error = float(np.max(np.abs(inverse - rounded)))
    if error > tol:
        raise RecoveryError(f"inverse is {error:.3g} away from an integer matrix")
    if not np.array_equal(rounded, rounded.T):
        raise RecoveryError("rounded inverse isn't symmetric")

    edges: list[tuple[int, int]] = []
    for u in range(n):
        for v in range(u + 1, n):
            if rounded[u, v] == -1:
                edges.append((u, v))
            elif rounded[u, v] != 0:
                raise RecoveryError(f"entry ({u}, {v}) is {rounded[u, v]:g}")
    graph = Graph.from_edges(n, edges)
    for v, degree in enumerate(graph.degrees):
        if rounded[v, v] != 1 + degree:
            raise RecoveryError(f"diagonal entry {v} isn't 1 + degree")
    return graph


# Suite name to check, in the order they run.
SUITES: dict[str, Callable[[Graph, DSMatrix], CheckReport]] = {
    "doubly-stochastic": lambda g, b: check_doubly_stochastic(b),
    "diagonal": lambda g, b: check_diagonal_dominance(b),
    "pendant": check_pendant_relation,
    "tree-decay": check_tree_decay,
    "d-monotone": lambda g, b: (
        check_d_monotone(b)
        if is_labeled_path(g)
        else skipped("d-monotone", "not a labeled path")
    ),
    "increasing-path": check_increasing_paths,
    "diag-bound": check_diag_lower_bound,
    "multiplier-bounds": lambda g, b: check_multiplier_bounds(g, b.h, b.mode),
    "t3-bounds": check_t3_bounds,
    "forest-oracle": check_forest_oracle,
    "spectrum": check_spectrum,
    "bounds": check_bounds,
    "metric": lambda g, b: check_metric(b),
}


class SuiteReport(BaseModel):
    """Outcome of a run of named checks on one graph."""

    graph: GraphReport
    h: str
    mode: str
    checks: list[CheckReport]

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


class UnknownSuiteError(Laplace2dsError):
    """Raised when a check suite name isn't known."""

    pass


def run_checks(
    graph: Graph, b: DSMatrix, suites: Iterable[str] = ("all",)
) -> SuiteReport:
    """Raises: UnknownSuiteError."""
    names: list[str] = []
    for suite in suites:
        if suite == "all":
            names.extend(SUITES)
        elif suite in SUITES:
            names.append(suite)
        else:
            raise UnknownSuiteError(
                f"unknown suite {suite!r}, choose from: all, {', '.join(SUITES)}"
            )

    checks: list[CheckReport] = []
    for name in dict.fromkeys(names):
        report = SUITES[name](graph, b)
        logger.debug(f"Check {name}: {report.status.value}")
        checks.append(report)

    return SuiteReport(
        graph=classify(graph),
        h=f"{b.h.numerator}/{b.h.denominator}",
        mode=b.mode.value,
        checks=checks,
    )
