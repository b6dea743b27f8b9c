import math
from fractions import Fraction
from unittest import TestCase

from laplace2ds.graph import PathFamily, modified_laplacian_exact
from laplace2ds.matrix import Engine, exact_equal, exact_identity
from laplace2ds.path import (
    InvalidIndexError,
    compute_B_path,
    det_M,
    fib,
    l1_inverse,
    l1_inverse_entry,
    l1_matrix,
    l1u_factors,
    l1u_product,
    omega_path,
    omega_path_closed_form,
    path_last_column,
    u_inverse,
    u_inverse_entry,
    u_matrix,
)
from laplace2ds.tree import compute_B_tree, multipliers, orient, solve_column


class TestFib(TestCase):
    def test_values(self):
        self.assertEqual([1, 1, 2, 3, 5, 8, 13, 21], [fib(k) for k in range(1, 9)])
        self.assertEqual(354224848179261915075, fib(100))

    def test_invalid(self):
        self.assertRaises(InvalidIndexError, fib, 0)
        self.assertRaises(ValueError, fib, -3)


class TestL1U(TestCase):
    def test_factors(self):
        factors = l1u_factors(4)

        self.assertEqual(
            (Fraction(-1, 2), Fraction(-2, 5), Fraction(-5, 13)), factors.x
        )
        self.assertEqual(
            (Fraction(2), Fraction(5, 2), Fraction(13, 5), Fraction(21, 13)),
            factors.y,
        )

    def test_factors_need_two_vertices(self):
        self.assertRaises(InvalidIndexError, l1u_factors, 1)

    def test_product_is_modified_laplacian(self):
        for n in (2, 3, 10, 100, 500):
            with self.subTest(n=n):
                expected = modified_laplacian_exact(PathFamily(n=n).build())
                self.assertTrue(exact_equal(expected, l1u_product(n)))

    def test_dense_product(self):
        factors = l1u_factors(6)
        expected = modified_laplacian_exact(PathFamily(n=6).build())

        self.assertTrue(
            exact_equal(expected, l1_matrix(factors) @ u_matrix(factors))
        )

    def test_inverses(self):
        factors = l1u_factors(7)

        self.assertTrue(
            exact_equal(exact_identity(7), u_inverse(7) @ u_matrix(factors))
        )
        self.assertTrue(
            exact_equal(exact_identity(7), l1_inverse(7) @ l1_matrix(factors))
        )

    def test_inverses_up_to_100(self):
        for n in range(2, 101):
            factors = l1u_factors(n)
            x, y = factors.x, factors.y
            u_inv, l1_inv = u_inverse(n), l1_inverse(n)
            with self.subTest(n=n):
                for i in range(n):
                    for j in range(n):
                        identity = Fraction(int(i == j))
                        # U and L_1 are bidiagonal, so each product row has two terms
                        u_row = y[i] * u_inv[i, j]
                        if i + 1 < n:
                            u_row -= u_inv[i + 1, j]
                        l1_row = l1_inv[i, j]
                        if i > 0:
                            l1_row += x[i - 1] * l1_inv[i - 1, j]
                        self.assertEqual(identity, u_row)
                        self.assertEqual(identity, l1_row)

    def test_entries(self):
        self.assertEqual(Fraction(1, 21), u_inverse_entry(4, 1, 4))
        self.assertEqual(Fraction(2, 13), u_inverse_entry(4, 2, 3))
        self.assertEqual(Fraction(0), u_inverse_entry(4, 3, 2))
        self.assertEqual(Fraction(2, 13), l1_inverse_entry(4, 4, 2))
        self.assertEqual(Fraction(0), l1_inverse_entry(4, 1, 2))
        self.assertRaises(InvalidIndexError, u_inverse_entry, 4, 0, 1)
        self.assertRaises(InvalidIndexError, l1_inverse_entry, 4, 5, 1)


class TestClosedForms(TestCase):
    def test_compute_b_path_matches_tree(self):
        for n in [*range(1, 13), 30, 60]:
            with self.subTest(n=n):
                b = compute_B_path(n)
                self.assertEqual(Engine.PATH, b.engine)
                self.assertTrue(
                    exact_equal(
                        compute_B_tree(PathFamily(n=n).build()).entries, b.entries
                    )
                )

    def test_det_m(self):
        self.assertEqual(2, det_M(1))
        self.assertEqual(5, det_M(2))
        for k in range(1, 201):
            self.assertEqual(fib(2 * k + 1), det_M(k))
        self.assertRaises(InvalidIndexError, det_M, 0)

    def test_last_column(self):
        self.assertEqual(
            [Fraction(1, 21), Fraction(2, 21), Fraction(5, 21), Fraction(13, 21)],
            path_last_column(4),
        )
        for n in range(1, 201):
            graph = PathFamily(n=n).build()
            self.assertEqual(solve_column(graph, n - 1), path_last_column(n))

    def test_omega(self):
        self.assertEqual(Fraction(1, 21), omega_path(4))
        self.assertEqual(Fraction(1, 3), omega_path(2))
        for n in range(1, 40):
            self.assertAlmostEqual(
                1.0, omega_path_closed_form(n) / float(omega_path(n)), places=10
            )

    def test_omega_closed_form_large_n(self):
        for n in (200, 700):
            self.assertAlmostEqual(
                1.0, omega_path_closed_form(n) / float(omega_path(n)), places=9
            )
        self.assertGreater(omega_path_closed_form(738), 0.0)
        self.assertEqual(0.0, omega_path_closed_form(800))
        self.assertEqual(0.0, omega_path_closed_form(100_000))
        self.assertRaises(InvalidIndexError, omega_path_closed_form, 0)

    def test_path_multipliers(self):
        for n in range(2, 61):
            graph = PathFamily(n=n).build()
            mults = multipliers(orient(graph, n - 1), graph.degrees)
            with self.subTest(n=n):
                # vertex j has child j - 1 when the path is rooted at its last vertex
                for j in range(1, n):
                    value = mults[(j, j - 1)]
                    self.assertEqual(Fraction(fib(2 * j + 1), fib(2 * j - 1)), value)
                    if j >= 2:
                        self.assertGreaterEqual(value, Fraction(5, 2))

    def test_last_column_denominator(self):
        for n in range(1, 101):
            column = solve_column(PathFamily(n=n).build(), n - 1)
            self.assertEqual(fib(2 * n), math.lcm(*(x.denominator for x in column)))

    def test_invalid_sizes(self):
        self.assertRaises(InvalidIndexError, compute_B_path, 0)
        self.assertRaises(InvalidIndexError, path_last_column, 0)
        self.assertRaises(InvalidIndexError, omega_path, 0)
