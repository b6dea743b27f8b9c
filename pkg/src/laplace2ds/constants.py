import logging
import pathlib
import sys

from zimscraperlib.logging import (  # pyright: ignore[reportMissingTypeStubs]
    getLogger,  # pyright: ignore[reportUnknownVariableType]
)

from laplace2ds.__about__ import __version__

NAME = "laplace2ds"
VERSION = __version__
ROOT_DIR = pathlib.Path(__file__).parent

# Absolute tolerance for matrix identities (row sums, residuals) at n <= 500.
MATRIX_TOLERANCE = 1e-10

# Tolerance when matching eigenvalues of B against 1 / (1 + h * lambda).
SPECTRAL_TOLERANCE = 1e-8

# In float mode a "strict" inequality needs at least this margin, smaller
# positive margins are reported as near ties instead of violations.
STRICT_MARGIN = 1e-12

# Relative tolerance for flagging that a float bound is attained.
EQUALITY_RTOL = 1e-9

# Off-diagonal Frobenius norm target relative to the norm of the input.
JACOBI_TOLERANCE = 1e-12
JACOBI_MAX_SWEEPS = 100

# The forest oracle enumerates all 2^m edge subsets.
FOREST_MAX_EDGES = 20

# Number of violations kept in a report, the total is always counted.
MAX_REPORTED_VIOLATIONS = 50

# Logs go to stderr, stdout carries JSON and CSV output.
logger = getLogger(NAME, level=logging.DEBUG, console=sys.stderr)
