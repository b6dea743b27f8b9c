import math
from fractions import Fraction
from typing import Any

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel

from laplace2ds.constants import JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE, logger
from laplace2ds.errors import Laplace2dsError
from laplace2ds.graph import (
    ExactMatrix,
    Graph,
    SymMatrix,
    laplacian,
    modified_laplacian,
    modified_laplacian_exact,
)
from laplace2ds.matrix import DSMatrix, Engine, Mode, parse_step


class NotPositiveDefiniteError(Laplace2dsError):
    """Raised when a factorization meets a non-positive pivot."""

    pass


class EigenvalueConvergenceError(Laplace2dsError):
    """Raised when Jacobi rotations don't converge within the sweep cap."""

    pass


def cholesky_factor(matrix: SymMatrix) -> SymMatrix:
    """Lower triangular C with C @ C.T == matrix.

    Raises: NotPositiveDefiniteError if a pivot isn't positive, which for
    I + hL means h <= 0 or a corrupted matrix.
    """
    a = np.asarray(matrix, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise NotPositiveDefiniteError(f"expected a square matrix, got {a.shape}")

    factor = np.zeros((n, n), dtype=np.float64)
    for k in range(n):
        pivot = a[k, k] - factor[k, :k] @ factor[k, :k]
        if not pivot > 0:
            raise NotPositiveDefiniteError(
                f"non-positive pivot {pivot} at row {k}, matrix isn't SPD"
            )
        factor[k, k] = math.sqrt(pivot)
        factor[k + 1 :, k] = (
            a[k + 1 :, k] - factor[k + 1 :, :k] @ factor[k, :k]
        ) / factor[k, k]
    return factor


def cholesky_solve(
    factor: SymMatrix, rhs: npt.NDArray[np.float64]
) -> npt.NDArray[np.float64]:
    """Solves (C @ C.T) x = rhs for a vector or a matrix of right-hand sides."""
    n = factor.shape[0]
    y = np.array(rhs, dtype=np.float64)
    for i in range(n):
        y[i] = (y[i] - factor[i, :i] @ y[:i]) / factor[i, i]
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - factor[i + 1 :, i] @ y[i + 1 :]) / factor[i, i]
    return y


def invert_exact(matrix: ExactMatrix) -> ExactMatrix:
    """Gauss-Jordan inverse over Fractions.

    Raises: NotPositiveDefiniteError if the matrix is singular.
    """
    n = matrix.shape[0]
    left = [[Fraction(v) for v in row] for row in matrix]
    right = [[Fraction(int(r == c)) for c in range(n)] for r in range(n)]

    for col in range(n):
        pivot_row = next((r for r in range(col, n) if left[r][col] != 0), None)
        if pivot_row is None:
            raise NotPositiveDefiniteError("matrix is singular")
        left[col], left[pivot_row] = left[pivot_row], left[col]
        right[col], right[pivot_row] = right[pivot_row], right[col]

        pivot = left[col][col]
        left[col] = [v / pivot for v in left[col]]
        right[col] = [v / pivot for v in right[col]]

        for r in range(n):
            factor = left[r][col]
            if r == col or factor == 0:
                continue
            left[r] = [a - factor * b for a, b in zip(left[r], left[col], strict=True)]
            right[r] = [
                a - factor * b for a, b in zip(right[r], right[col], strict=True)
            ]

    inverse = np.empty((n, n), dtype=object)
    for r in range(n):
        for c in range(n):
            inverse[r, c] = right[r][c]
    return inverse


def bareiss_determinant(matrix: Any) -> Fraction:
    """Exact determinant by fraction-free elimination."""
    a = [[Fraction(v) for v in row] for row in matrix]
    n = len(a)
    if n == 0:
        return Fraction(1)

    sign = 1
    previous = Fraction(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return Fraction(0)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / previous
        previous = a[k][k]
    return sign * a[n - 1][n - 1]


def compute_B_dense(
    graph: Graph, h: float | Fraction | str = 1, mode: Mode = Mode.FLOAT
) -> DSMatrix:
    """B = (I + hL_G)^{-1} for any graph.

    Float mode factors once with Cholesky, solves against the identity and
    stores (B + B.T) / 2. Exact mode inverts over Fractions.

    Raises: InvalidStepError if h <= 0.
    """
    step = parse_step(h)

    if mode == Mode.EXACT:
        entries: Any = invert_exact(modified_laplacian_exact(graph, step))
    else:
        factor = cholesky_factor(modified_laplacian(graph, step))
        solved = cholesky_solve(factor, np.eye(graph.n))
        entries = (solved + solved.T) / 2

    logger.debug(f"Dense {mode.value} inverse computed for n={graph.n}")
    return DSMatrix(
        n=graph.n, h=step, mode=mode, engine=Engine.DENSE, entries=entries
    )


def jacobi_eigenvalues(matrix: SymMatrix) -> npt.NDArray[np.float64]:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.

    Sweeps stop once the off-diagonal Frobenius norm is at most
    JACOBI_TOLERANCE times the norm of the input.

    Raises: EigenvalueConvergenceError after JACOBI_MAX_SWEEPS sweeps.
    """
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    threshold = JACOBI_TOLERANCE * float(np.sqrt(np.sum(a * a)))

    for sweep in range(JACOBI_MAX_SWEEPS + 1):
        off_diagonal = float(np.sqrt(2 * np.sum(np.triu(a, 1) ** 2)))
        if off_diagonal <= threshold:
            logger.debug(f"Jacobi converged after {sweep} sweeps for n={n}")
            return np.sort(np.diag(a))[::-1]
        if sweep == JACOBI_MAX_SWEEPS:
            break

        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * apq)
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(theta * theta + 1)
                )
                c = 1 / math.sqrt(t * t + 1)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

    raise EigenvalueConvergenceError(
        f"Jacobi rotations didn't converge in {JACOBI_MAX_SWEEPS} sweeps"
    )


class SpectrumReport(BaseModel):
    """Laplacian spectrum paired with the spectrum of B."""

    # Laplacian eigenvalues, descending.
    laplacian_eigs: list[float]
    # Second smallest Laplacian eigenvalue a(G), 0 for a single vertex.
    algebraic_connectivity: float
    # Eigenvalues of B, ascending, so position i pairs with laplacian_eigs[i].
    b_eigs: list[float]
    # 1 / (1 + h * lambda_i) for every Laplacian eigenvalue.
    predicted_b_eigs: list[float]

    @property
    def max_deviation(self) -> float:
        return max(
            (
                abs(a - b)
                for a, b in zip(self.b_eigs, self.predicted_b_eigs, strict=True)
            ),
            default=0.0,
        )


def algebraic_connectivity(graph: Graph) -> float:
    if graph.n < 2:
        return 0.0
    return float(jacobi_eigenvalues(laplacian(graph))[-2])


def spectrum_report(
    graph: Graph, h: float | Fraction | str = 1, b: DSMatrix | None = None
) -> SpectrumReport:
    """Pairs the sorted Laplacian eigenvalues with the sorted eigenvalues of B."""
    step = float(parse_step(h))
    lap_eigs = jacobi_eigenvalues(laplacian(graph))
    if b is None:
        b = compute_B_dense(graph, h)
    b_eigs = np.sort(jacobi_eigenvalues(b.as_float()))

    return SpectrumReport(
        laplacian_eigs=[float(v) for v in lap_eigs],
        algebraic_connectivity=float(lap_eigs[-2]) if graph.n >= 2 else 0.0,
        b_eigs=[float(v) for v in b_eigs],
        predicted_b_eigs=[1 / (1 + step * float(v)) for v in lap_eigs],
    )
