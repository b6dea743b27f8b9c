import io
from enum import Enum
from fractions import Fraction
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict

from laplace2ds.errors import InvalidStepError
from laplace2ds.graph import ExactMatrix, SymMatrix


class Mode(str, Enum):
    """Arithmetic used to compute a matrix."""

    EXACT = "exact"
    FLOAT = "float"


class Engine(str, Enum):
    """Algorithm that produced a matrix."""

    DENSE = "dense"
    TREE = "tree"
    PATH = "path-closed-form"


def parse_step(text: str | float | Fraction) -> Fraction:
    """Reads the step parameter h as an exact rational.

    Accepts "1", "0.1", "1/3" and numbers.

    Raises: InvalidStepError if the value isn't a positive number.
    """
    try:
        step = Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise InvalidStepError(f"invalid step {text!r}") from e
    if step <= 0:
        raise InvalidStepError(f"step h must be positive, got {text!r}")
    return step


def format_fraction(value: Fraction) -> str:
    """Always "p/q", including whole numbers."""
    return f"{value.numerator}/{value.denominator}"


def format_float(value: float) -> float:
    """Rounds to 17 significant digits, enough to round-trip a double."""
    return float(f"{value:.17g}")


def format_value(value: Any) -> str | float:
    """Formats a Fraction as "p/q" and anything else as a 17 digit float."""
    if isinstance(value, Fraction):
        return format_fraction(value)
    return format_float(float(value))


def exact_identity(n: int) -> ExactMatrix:
    matrix = np.full((n, n), Fraction(0), dtype=object)
    for k in range(n):
        matrix[k, k] = Fraction(1)
    return matrix


def exact_equal(first: ExactMatrix, second: ExactMatrix) -> bool:
    return first.shape == second.shape and bool(np.all(first == second))


class MatrixDocument(BaseModel):
    """JSON form of a computed matrix."""

    # Dimension.
    n: int
    # Step parameter, "p/q" in exact mode.
    h: str | float
    # "exact" or "float".
    mode: str
    # Engine name.
    engine: str
    # Rows, entries are "p/q" strings in exact mode.
    rows: list[list[str | float]]


class DSMatrix(BaseModel):
    """The doubly stochastic inverse (I + hL_G)^{-1} with its provenance."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    # Dimension.
    n: int
    # Step parameter.
    h: Fraction
    # Exact entries are Fractions in an object array, float entries are float64.
    mode: Mode
    # Algorithm used.
    engine: Engine
    # Dense symmetric n x n grid.
    entries: Any

    @property
    def is_exact(self) -> bool:
        return self.mode == Mode.EXACT

    def entry(self, i: int, j: int) -> Fraction | float:
        return self.entries[i, j]

    def row(self, i: int) -> list[Any]:
        return list(self.entries[i, :])

    def column(self, j: int) -> list[Any]:
        return list(self.entries[:, j])

    def diagonal(self) -> list[Any]:
        return [self.entries[k, k] for k in range(self.n)]

    def min_entry(self) -> Fraction | float:
        return min(self.entries.flat)

    def as_float(self) -> SymMatrix:
        if self.is_exact:
            return np.array(
                [[float(v) for v in row] for row in self.entries], dtype=np.float64
            ).reshape(self.n, self.n)
        return np.asarray(self.entries, dtype=np.float64)

    def to_document(self) -> MatrixDocument:
        return MatrixDocument(
            n=self.n,
            h=format_fraction(self.h) if self.is_exact else float(self.h),
            mode=self.mode.value,
            engine=self.engine.value,
            rows=[[format_value(v) for v in row] for row in self.entries],
        )

    def to_json(self) -> str:
        return self.to_document().model_dump_json()

    def to_csv(self) -> str:
        """One matrix row per line, exact entries as p/q, floats as %.17g."""
        out = io.StringIO()
        for row in self.entries:
            if self.is_exact:
                out.write(",".join(format_fraction(v) for v in row))
            else:
                out.write(",".join(f"{float(v):.17g}" for v in row))
            out.write("\n")
        return out.getvalue()


class ColumnDocument(BaseModel):
    """JSON form of a single column of B."""

    n: int
    h: str | float
    mode: str
    engine: str
    # Index of the column, 0-based.
    column: int
    values: list[str | float]


def column_document(
    values: list[Any], *, column: int, h: Fraction, mode: Mode, engine: Engine
) -> ColumnDocument:
    if mode == Mode.EXACT:
        formatted: list[str | float] = [format_fraction(v) for v in values]
        step: str | float = format_fraction(h)
    else:
        formatted = [format_float(float(v)) for v in values]
        step = float(h)
    return ColumnDocument(
        n=len(values),
        h=step,
        mode=mode.value,
        engine=engine.value,
        column=column,
        values=formatted,
    )
