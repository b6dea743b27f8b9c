import json
from fractions import Fraction
from unittest import TestCase

import numpy as np
from pydantic import BaseModel, ValidationError

from laplace2ds.analysis import (
    CheckStatus,
    DegreeConditionError,
    RecoveryError,
    UnknownSuiteError,
    bounds_report,
    broom_diag_lower_bound,
    centrality_document,
    centrality_report,
    check_bounds,
    check_d_monotone,
    check_diag_lower_bound,
    check_diagonal_dominance,
    check_doubly_stochastic,
    check_increasing_paths,
    check_metric,
    check_multiplier_bounds,
    check_pendant_relation,
    check_spectrum,
    check_t3_bounds,
    check_tree_decay,
    diag_lower_bound,
    increasing_path,
    multiplier_bounds_check,
    recover_graph,
    run_checks,
    t3_bounds,
)
from laplace2ds.dense import compute_B_dense
from laplace2ds.errors import DisconnectedGraphError, NotATreeError
from laplace2ds.graph import (
    BroomFamily,
    CompleteFamily,
    Graph,
    PathFamily,
    RandomConnectedFamily,
    RandomT3TreeFamily,
    RandomTreeFamily,
    StarFamily,
    StarlikeFamily,
    T3TreeFamily,
    is_tree,
)
from laplace2ds.matrix import DSMatrix, Mode
from laplace2ds.tree import compute_B_tree, multipliers, orient

# Rounded inverse of I + L_T for a ten vertex tree, as printed to four digits.
PRINTED_MATRIX = [
    [0.3723, 0.1861, 0.1168, 0.0365, 0.0146, 0.0584, 0.0073, 0.1861, 0.0146, 0.0073],
    [0.1861, 0.5931, 0.0584, 0.0182, 0.0073, 0.0292, 0.0036, 0.0931, 0.0073, 0.0036],
    [0.1168, 0.0584, 0.3504, 0.1095, 0.0438, 0.1752, 0.0219, 0.0584, 0.0438, 0.0219],
    [0.0365, 0.0182, 0.1095, 0.3467, 0.1387, 0.0547, 0.0693, 0.0182, 0.1387, 0.0693],
    [0.0146, 0.0073, 0.0438, 0.1387, 0.4555, 0.0219, 0.2277, 0.0073, 0.0555, 0.0277],
    [0.0584, 0.0292, 0.1752, 0.0547, 0.0219, 0.5876, 0.0109, 0.0292, 0.0219, 0.0109],
    [0.0073, 0.0036, 0.0219, 0.0693, 0.2277, 0.0109, 0.6139, 0.0036, 0.0277, 0.0139],
    [0.1861, 0.0931, 0.0584, 0.0182, 0.0073, 0.0292, 0.0036, 0.5931, 0.0073, 0.0036],
    [0.0146, 0.0073, 0.0438, 0.1387, 0.0555, 0.0219, 0.0277, 0.0073, 0.4555, 0.2277],
    [0.0073, 0.0036, 0.0219, 0.0693, 0.0277, 0.0109, 0.0139, 0.0036, 0.2277, 0.6139],
]
PRINTED_TREE_EDGES = [(1, 2), (1, 8), (1, 3), (3, 6), (3, 4), (4, 5), (4, 9), (5, 7)]
PRINTED_TREE_EDGES += [(9, 10)]

STEPS = ("1/10", "1/2", "1", "2", "10")


def fig_tree() -> Graph:
    return Graph.from_edges(6, [(5, 4), (5, 3), (4, 1), (4, 2), (3, 0)])


def perturbed(b: DSMatrix, i: int, j: int, delta: Fraction) -> DSMatrix:
    entries = b.entries.copy()
    entries[i, j] += delta
    return b.model_copy(update={"entries": entries})


class TestDoublyStochastic(TestCase):
    def test_pass(self):
        report = check_doubly_stochastic(compute_B_tree(PathFamily(n=4).build()))

        self.assertEqual(CheckStatus.PASS, report.status)
        self.assertEqual(0, report.violation_count)
        self.assertGreater(report.checked, 0)

    def test_fail(self):
        b = perturbed(compute_B_tree(PathFamily(n=4).build()), 0, 1, Fraction(1, 100))
        report = check_doubly_stochastic(b)

        self.assertEqual(CheckStatus.FAIL, report.status)
        self.assertFalse(report.passed)
        self.assertIn("row 0 sums to 101/100", [v.message for v in report.violations])

    def test_float(self):
        graph = RandomConnectedFamily(n=40, p=0.2, seed=3).build()

        self.assertTrue(check_doubly_stochastic(compute_B_dense(graph, 2)).passed)


class TestPendant(TestCase):
    def test_example_tree(self):
        report = check_pendant_relation(fig_tree(), compute_B_tree(fig_tree()))

        self.assertTrue(report.passed)
        self.assertIn("pendant 0 attached to 3", report.notes)
        self.assertIn("pendant 1 attached to 4", report.notes)

    def test_with_step_on_graph(self):
        graph = RandomConnectedFamily(n=12, p=0.1, seed=6).build()
        b = compute_B_dense(graph, "1/3", Mode.EXACT)

        self.assertTrue(check_pendant_relation(graph, b).passed)

    def test_wrong_factor_fails(self):
        graph = StarFamily(n=4).build()
        b = compute_B_tree(graph)

        self.assertFalse(check_pendant_relation(graph, b, h=Fraction(2)).passed)

    def test_no_pendants(self):
        report = check_pendant_relation(
            CompleteFamily(n=4).build(), compute_B_dense(CompleteFamily(n=4).build())
        )

        self.assertTrue(report.passed)
        self.assertEqual(["no pendant vertices"], report.notes)


class TestMonotonicity(TestCase):
    def test_tree_decay(self):
        graph = RandomTreeFamily(n=20, seed=4).build()

        self.assertTrue(check_tree_decay(graph, compute_B_tree(graph, "0.1")).passed)

    def test_tree_decay_skips_non_trees(self):
        graph = CompleteFamily(n=4).build()
        report = check_tree_decay(graph, compute_B_dense(graph))

        self.assertEqual(CheckStatus.SKIP, report.status)
        self.assertEqual(["skipped: not a tree"], report.notes)
        self.assertTrue(report.passed)

    def test_d_monotone(self):
        for h in STEPS:
            with self.subTest(h=h):
                b = compute_B_tree(PathFamily(n=7).build(), h)
                self.assertTrue(check_d_monotone(b).passed)

    def test_d_monotone_fails_off_path(self):
        b = compute_B_tree(StarFamily(n=4).build())

        self.assertFalse(check_d_monotone(b).passed)

    def test_diagonal_dominance(self):
        graph = RandomConnectedFamily(n=15, p=0.4, seed=1).build()

        self.assertTrue(check_diagonal_dominance(compute_B_dense(graph, 10)).passed)

    def test_diagonal_dominance_near_ties_counted(self):
        b = compute_B_dense(PathFamily(n=3).build())
        entries = b.entries.copy()
        entries[0, 1] = entries[0, 0] - 1e-13
        report = check_diagonal_dominance(b.model_copy(update={"entries": entries}))

        self.assertTrue(report.passed)
        self.assertEqual(1, report.near_ties)

    def test_increasing_path(self):
        graph = PathFamily(n=4).build()
        path = increasing_path(compute_B_tree(graph), graph, 3, 0)

        self.assertEqual([0, 1, 2, 3], path)

    def test_increasing_path_greedy(self):
        graph = CompleteFamily(n=4).build()
        b = compute_B_dense(graph, 1, Mode.EXACT)

        self.assertEqual([2, 0], increasing_path(b, graph, 0, 2))

    def test_increasing_path_disconnected(self):
        graph = Graph.from_edges(3, [(0, 1)])
        b = compute_B_dense(graph)

        self.assertRaises(DisconnectedGraphError, increasing_path, b, graph, 0, 2)
        self.assertEqual(
            CheckStatus.SKIP, check_increasing_paths(graph, b).status
        )

    def test_increasing_paths(self):
        graph = RandomConnectedFamily(n=12, p=0.3, seed=2).build()
        report = check_increasing_paths(graph, compute_B_dense(graph, "1/2"))

        self.assertTrue(report.passed)
        self.assertEqual(1, len(report.notes))


class TestDiagonalBounds(TestCase):
    def test_broom_closed_forms(self):
        for k, ell in [(6, 5), (3, 2), (4, 7), (2, 3)]:
            graph = BroomFamily(k=k, ell=ell).build()
            for vertex in range(graph.n):
                with self.subTest(k=k, ell=ell, vertex=vertex):
                    self.assertEqual(
                        broom_diag_lower_bound(k, ell, vertex),
                        diag_lower_bound(graph, vertex),
                    )

    def test_broom_brush_pendant(self):
        self.assertEqual(Fraction(64, 191), broom_diag_lower_bound(6, 5, 6))

    def test_bound_below_diagonal(self):
        graph = BroomFamily(k=6, ell=5).build()
        b = compute_B_tree(graph)

        for vertex in range(graph.n):
            bound = diag_lower_bound(graph, vertex)
            self.assertLessEqual(bound, b.entry(vertex, vertex))
        self.assertTrue(check_diag_lower_bound(graph, b).passed)

    def test_bound_needs_tree(self):
        self.assertRaises(
            NotATreeError, diag_lower_bound, CompleteFamily(n=3).build(), 0
        )

    def test_t3_star(self):
        bounds = t3_bounds(T3TreeFamily(depth=1).build(), 0)

        self.assertEqual(Fraction(2, 5), bounds.diag_lower)
        self.assertEqual(Fraction(2, 5), bounds.diag_upper)
        self.assertEqual(Fraction(1, 5), bounds.entry_lower[1])
        self.assertEqual(Fraction(1, 5), bounds.entry_upper[1])

    def test_t3_brackets(self):
        for seed in range(5):
            graph = RandomT3TreeFamily(internal=7, seed=seed).build()
            with self.subTest(seed=seed):
                report = check_t3_bounds(graph, compute_B_tree(graph))
                self.assertEqual(CheckStatus.PASS, report.status)

        graph = T3TreeFamily(depth=3).build()
        b = compute_B_tree(graph, 1, Mode.FLOAT)
        self.assertTrue(check_t3_bounds(graph, b).passed)

    def test_t3_requires_degree_three(self):
        self.assertRaises(DegreeConditionError, t3_bounds, PathFamily(n=4).build(), 0)

        graph = PathFamily(n=4).build()
        self.assertEqual(
            CheckStatus.SKIP, check_t3_bounds(graph, compute_B_tree(graph)).status
        )

    def test_t3_skips_other_steps(self):
        graph = T3TreeFamily(depth=2).build()
        report = check_t3_bounds(graph, compute_B_tree(graph, 2))

        self.assertEqual(["skipped: brackets hold for h = 1 only"], report.notes)


class TestMultiplierBounds(TestCase):
    def test_example_tree(self):
        graph = fig_tree()
        mults = multipliers(orient(graph, 5), graph.degrees)
        report = multiplier_bounds_check(mults, graph.degrees)

        self.assertTrue(report.passed)
        # Every child of 3 and 4 is a pendant, so all five bounds are attained.
        self.assertEqual(["5 multipliers meet the lower bound"], report.notes)

    def test_every_root_and_step(self):
        graph = StarlikeFamily(arms=[3, 3, 4]).build()
        for h in STEPS:
            for mode in Mode:
                with self.subTest(h=h, mode=mode):
                    self.assertTrue(check_multiplier_bounds(graph, h, mode).passed)

    def test_skips_non_trees(self):
        report = check_multiplier_bounds(CompleteFamily(n=3).build())

        self.assertEqual(CheckStatus.SKIP, report.status)


class TestSpectrum(TestCase):
    def test_random_graphs(self):
        for seed in range(3):
            graph = RandomConnectedFamily(n=30, p=0.2, seed=seed).build()
            for h in ("1/10", "2"):
                with self.subTest(seed=seed, h=h):
                    report = check_spectrum(graph, compute_B_dense(graph, h))
                    self.assertTrue(report.passed)


class TestBounds(TestCase):
    def test_complete(self):
        graph = CompleteFamily(n=5).build()
        report = bounds_report(graph, compute_B_dense(graph, 1, Mode.EXACT))

        self.assertEqual("1/6", report.omega)
        self.assertTrue(report.complete_equality)
        self.assertTrue(report.holds)
        self.assertIsNone(report.tree_bounds_hold)

    def test_path(self):
        graph = PathFamily(n=6).build()
        report = bounds_report(graph, compute_B_tree(graph))

        self.assertEqual("1/144", report.omega)
        self.assertTrue(report.path_equality)
        self.assertFalse(report.star_equality)
        self.assertFalse(report.complete_equality)
        self.assertTrue(report.holds)

    def test_long_path_float(self):
        graph = PathFamily(n=20).build()
        report = bounds_report(graph, compute_B_tree(graph, 1, Mode.FLOAT))

        self.assertTrue(report.path_equality)
        self.assertFalse(report.star_equality)

    def test_star(self):
        graph = StarFamily(n=7).build()
        report = bounds_report(graph, compute_B_tree(graph))

        self.assertEqual("1/16", report.omega)
        self.assertTrue(report.star_equality)
        self.assertFalse(report.path_equality)
        # a(S_n) = 1 meets the connectivity bound.
        self.assertAlmostEqual(1.0, report.connectivity_bound)

    def test_other_tree(self):
        graph = StarlikeFamily(arms=[2, 2, 3]).build()
        report = bounds_report(graph, compute_B_tree(graph))

        self.assertFalse(report.path_equality)
        self.assertFalse(report.star_equality)
        self.assertTrue(report.tree_bounds_hold)

    def test_check_bounds(self):
        for graph in [
            CompleteFamily(n=4).build(),
            PathFamily(n=2).build(),
            PathFamily(n=3).build(),
            StarFamily(n=6).build(),
            RandomConnectedFamily(n=10, p=0.3, seed=0).build(),
            RandomTreeFamily(n=15, seed=0).build(),
        ]:
            with self.subTest(edges=graph.edges):
                report = check_bounds(graph, compute_B_dense(graph))
                self.assertTrue(report.passed)

    def test_disconnected(self):
        graph = Graph.from_edges(3, [(0, 1)])
        b = compute_B_dense(graph)

        self.assertRaises(DisconnectedGraphError, bounds_report, graph, b)
        self.assertEqual(CheckStatus.SKIP, check_bounds(graph, b).status)


class TestCentrality(TestCase):
    def test_star_center(self):
        report = centrality_report(compute_B_tree(StarFamily(n=5).build()))

        self.assertEqual([4], report.least_remote)
        self.assertTrue(report.consistent)
        self.assertEqual(4, report.ranking[0])

    def test_path_middle(self):
        report = centrality_report(compute_B_tree(PathFamily(n=4).build()))

        self.assertEqual([1, 2], report.least_remote)
        self.assertEqual([1, 2], report.least_diagonal)

    def test_complete_tie(self):
        graph = CompleteFamily(n=4).build()
        report = centrality_report(compute_B_dense(graph))

        self.assertEqual([0, 1, 2, 3], report.least_remote)

    def test_reports_are_frozen_models(self):
        report = centrality_report(compute_B_tree(StarFamily(n=3).build()))
        bounds = t3_bounds(T3TreeFamily(depth=1).build(), 0)

        for model, field, value in ((report, "ranking", [0]), (bounds, "vertex", 1)):
            with self.subTest(model=type(model).__name__):
                self.assertIsInstance(model, BaseModel)
                self.assertRaises(ValidationError, setattr, model, field, value)

    def test_document(self):
        report = centrality_report(compute_B_tree(PathFamily(n=3).build()))
        document = json.loads(centrality_document(report).model_dump_json())

        self.assertEqual([1], document["least_remote"])
        self.assertEqual([0, 2], document["farthest_pair"])
        # rho(0, 2) = 5/8 + 5/8 - 2/8
        self.assertEqual("1/1", document["farthest_rho"])

    def test_metric(self):
        for graph in [
            PathFamily(n=5).build(),
            RandomConnectedFamily(n=9, p=0.3, seed=5).build(),
        ]:
            with self.subTest(edges=graph.edges):
                report = check_metric(compute_B_dense(graph, 1, Mode.EXACT))
                self.assertTrue(report.passed)


class TestRecoverGraph(TestCase):
    def test_printed_matrix(self):
        graph = recover_graph(PRINTED_MATRIX)
        expected = Graph.from_edges(10, [(u - 1, v - 1) for u, v in PRINTED_TREE_EDGES])

        self.assertEqual(expected, graph)
        self.assertTrue(is_tree(graph))

        report = centrality_report(compute_B_tree(graph))
        self.assertEqual([3], report.least_remote)
        self.assertEqual([3, 2], report.ranking[:2])

    def test_exact_matrix(self):
        graph = RandomConnectedFamily(n=8, p=0.4, seed=3).build()

        self.assertEqual(graph, recover_graph(compute_B_dense(graph).entries))

    def test_not_an_inverse(self):
        self.assertRaises(RecoveryError, recover_graph, np.eye(3) * 0.7)
        self.assertRaises(RecoveryError, recover_graph, [[0.5, 0.2], [0.2, 0.5]])


class TestRunChecks(TestCase):
    def test_all_on_path(self):
        graph = PathFamily(n=4).build()
        report = run_checks(graph, compute_B_tree(graph))

        self.assertTrue(report.passed)
        self.assertEqual("1/1", report.h)
        self.assertEqual(13, len(report.checks))
        self.assertTrue(json.loads(report.model_dump_json())["passed"])

    def test_named_suites(self):
        graph = CompleteFamily(n=4).build()
        report = run_checks(graph, compute_B_dense(graph), ["tree-decay", "d-monotone"])

        self.assertEqual(["tree-decay", "d-monotone"], [c.name for c in report.checks])
        self.assertEqual(
            ["skipped: not a tree", "skipped: not a labeled path"],
            [c.notes[0] for c in report.checks],
        )
        self.assertTrue(report.passed)

    def test_duplicates_run_once(self):
        graph = PathFamily(n=3).build()
        report = run_checks(graph, compute_B_tree(graph), ["pendant", "pendant"])

        self.assertEqual(1, len(report.checks))

    def test_unknown_suite(self):
        graph = PathFamily(n=3).build()

        self.assertRaises(
            UnknownSuiteError, run_checks, graph, compute_B_tree(graph), ["nope"]
        )


class TestRandomizedSuites(TestCase):
    """Seeded trees and graphs, with every step size, must show no violation."""

    suites = (
        "doubly-stochastic",
        "diagonal",
        "pendant",
        "tree-decay",
        "d-monotone",
        "increasing-path",
        "diag-bound",
        "multiplier-bounds",
        "t3-bounds",
        "spectrum",
        "bounds",
    )

    def case(self, seed: int) -> tuple[Graph, str]:
        rng = np.random.default_rng(seed)
        h = STEPS[seed % len(STEPS)]
        kind = seed % 4
        if kind == 0:
            graph = RandomTreeFamily(n=int(rng.integers(2, 41)), seed=seed).build()
        elif kind == 1:
            graph = RandomConnectedFamily(
                n=int(rng.integers(2, 26)), p=0.2, seed=seed
            ).build()
        elif kind == 2:
            graph = PathFamily(n=int(rng.integers(1, 30))).build()
        else:
            graph = RandomT3TreeFamily(
                internal=int(rng.integers(1, 12)), seed=seed
            ).build()
        return graph, h

    def test_random_cases(self):
        for seed in range(220):
            graph, h = self.case(seed)
            mode = Mode.EXACT if graph.n <= 12 else Mode.FLOAT
            if is_tree(graph):
                b = compute_B_tree(graph, h, mode)
            else:
                b = compute_B_dense(graph, h, mode)
            with self.subTest(seed=seed, n=graph.n, h=h):
                report = run_checks(graph, b, self.suites)
                failures = [
                    (check.name, [v.message for v in check.violations[:3]])
                    for check in report.checks
                    if not check.passed
                ]
                self.assertEqual([], failures)

    def test_large_cases(self):
        cheap = ("doubly-stochastic", "pendant", "tree-decay", "diag-bound")
        for seed in range(4):
            h = STEPS[seed]
            tree = RandomTreeFamily(n=200, seed=seed).build()
            graph = RandomConnectedFamily(n=100, p=0.05, seed=seed).build()
            with self.subTest(seed=seed, h=h):
                report = run_checks(tree, compute_B_tree(tree, h, Mode.FLOAT), cheap)
                self.assertTrue(report.passed)
                report = run_checks(
                    graph,
                    compute_B_dense(graph, h),
                    ("doubly-stochastic", "diagonal", "pendant"),
                )
                self.assertTrue(report.passed)
