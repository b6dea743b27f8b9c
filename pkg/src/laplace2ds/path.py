"""Fibonacci closed forms for the path P_n at h = 1.

Indices in this module follow the 1-based labels of the formulas: vertex k of
the path is internal index k - 1.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from laplace2ds.errors import Laplace2dsError
from laplace2ds.graph import ExactMatrix
from laplace2ds.matrix import DSMatrix, Engine, Mode


class InvalidIndexError(Laplace2dsError, ValueError):
    """Raised when a Fibonacci or matrix index is out of range."""

    pass


class FibCache:
    """Memoized Fibonacci numbers with f_1 = f_2 = 1."""

    def __init__(self) -> None:
        self._values = [0, 1, 1]

    def __call__(self, k: int) -> int:
        if k < 1:
            raise InvalidIndexError(f"Fibonacci numbers start at f_1, got k={k}")
        values = self._values
        while len(values) <= k:
            values.append(values[-1] + values[-2])
        return values[k]


fib = FibCache()


@dataclass(frozen=True)
class L1UFactors:
    """I + L_{P_n} = L_1 U with L_1 unit lower bidiagonal and U upper bidiagonal.

    x holds the subdiagonal of L_1, y the diagonal of U. The superdiagonal of
    U is all -1.
    """

    n: int
    x: tuple[Fraction, ...]
    y: tuple[Fraction, ...]


def l1u_factors(n: int) -> L1UFactors:
    if n < 2:
        raise InvalidIndexError(f"the factorization needs n >= 2, got n={n}")
    x = tuple(Fraction(-fib(2 * i - 1), fib(2 * i + 1)) for i in range(1, n))
    y = [Fraction(fib(2 * i + 1), fib(2 * i - 1)) for i in range(1, n)]
    y.append(Fraction(fib(2 * n), fib(2 * n - 1)))
    return L1UFactors(n=n, x=x, y=tuple(y))


def _zeros(n: int) -> ExactMatrix:
    return np.full((n, n), Fraction(0), dtype=object)


def l1_matrix(factors: L1UFactors) -> ExactMatrix:
    matrix = _zeros(factors.n)
    for k in range(factors.n):
        matrix[k, k] = Fraction(1)
    for k, value in enumerate(factors.x):
        matrix[k + 1, k] = value
    return matrix


def u_matrix(factors: L1UFactors) -> ExactMatrix:
    matrix = _zeros(factors.n)
    for k, value in enumerate(factors.y):
        matrix[k, k] = value
    for k in range(factors.n - 1):
        matrix[k, k + 1] = Fraction(-1)
    return matrix


def l1u_product(n: int) -> ExactMatrix:
    """L_1 U assembled from the bands of the factors."""
    factors = l1u_factors(n)
    x, y = factors.x, factors.y
    product = _zeros(n)
    for k in range(n):
        product[k, k] = y[k] - (x[k - 1] if k > 0 else 0)
        if k + 1 < n:
            product[k, k + 1] = Fraction(-1)
            product[k + 1, k] = x[k] * y[k]
    return product


def _check_entry(n: int, i: int, j: int) -> None:
    if n < 1 or not (1 <= i <= n and 1 <= j <= n):
        raise InvalidIndexError(f"entry ({i}, {j}) is out of range for n={n}")


def u_inverse_entry(n: int, i: int, j: int) -> Fraction:
    """U^{-1}[i][j], 1-based."""
    _check_entry(n, i, j)
    if i > j:
        return Fraction(0)
    if j < n:
        return Fraction(fib(2 * i - 1), fib(2 * j + 1))
    return Fraction(fib(2 * i - 1), fib(2 * n))


def l1_inverse_entry(n: int, i: int, j: int) -> Fraction:
    """L_1^{-1}[i][j], 1-based."""
    _check_entry(n, i, j)
    if j > i:
        return Fraction(0)
    return Fraction(fib(2 * j - 1), fib(2 * i - 1))


def u_inverse(n: int) -> ExactMatrix:
    matrix = _zeros(n)
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            matrix[i - 1, j - 1] = u_inverse_entry(n, i, j)
    return matrix


def l1_inverse(n: int) -> ExactMatrix:
    matrix = _zeros(n)
    for i in range(1, n + 1):
        for j in range(1, i + 1):
            matrix[i - 1, j - 1] = l1_inverse_entry(n, i, j)
    return matrix


def compute_B_path(n: int) -> DSMatrix:
    """B_{P_n} = U^{-1} L_1^{-1} for the labeled path, h = 1."""
    if n < 1:
        raise InvalidIndexError(f"a path needs at least one vertex, got n={n}")
    if n == 1:
        entries = np.full((1, 1), Fraction(1), dtype=object)
    else:
        entries = u_inverse(n) @ l1_inverse(n)
    return DSMatrix(
        n=n, h=Fraction(1), mode=Mode.EXACT, engine=Engine.PATH, entries=entries
    )


def det_M(k: int) -> int:
    """det M_k, where M_k is I + L_{P_k} with its (1, 1) entry raised to 3.

    det M_1 = 2, det M_2 = 5 and det M_k = 3 det M_{k-1} - det M_{k-2}.
    """
    if k < 1:
        raise InvalidIndexError(f"k must be at least 1, got k={k}")
    previous, current = 2, 5
    if k == 1:
        return previous
    for _ in range(k - 2):
        previous, current = current, 3 * current - previous
    return current


def path_last_column(n: int) -> list[Fraction]:
    """Column n of B_{P_n}: component k is f_{2k-1} / f_{2n}."""
    if n < 1:
        raise InvalidIndexError(f"a path needs at least one vertex, got n={n}")
    denominator = fib(2 * n)
    return [Fraction(fib(2 * k - 1), denominator) for k in range(1, n + 1)]


def omega_path(n: int) -> Fraction:
    """Smallest entry of B_{P_n}, 1 / f_{2n}."""
    if n < 1:
        raise InvalidIndexError(f"a path needs at least one vertex, got n={n}")
    return Fraction(1, fib(2 * n))


def omega_path_closed_form(n: int) -> float:
    """sqrt(5) / (((3 + sqrt 5) / 2)^n - ((3 - sqrt 5) / 2)^n) in floating point.

    Evaluated as sqrt(5) t / (1 - t^2) with t = ((3 - sqrt 5) / 2)^n, which
    underflows to the limit 0 for large n instead of overflowing.
    """
    if n < 1:
        raise InvalidIndexError(f"a path needs at least one vertex, got n={n}")
    root5 = math.sqrt(5)
    tail = ((3 - root5) / 2) ** n
    return root5 * tail / (1 - tail * tail)
