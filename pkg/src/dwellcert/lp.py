"""LP backend selection.

The compiled simplex is used when it was built; setting the environment
variable ``DWELLCERT_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _simplex_py

OPTIMAL = _simplex_py.OPTIMAL
INFEASIBLE = _simplex_py.INFEASIBLE
UNBOUNDED = _simplex_py.UNBOUNDED
ITERATION_LIMIT = _simplex_py.ITERATION_LIMIT

if os.environ.get("DWELLCERT_PURE_PYTHON", "") not in ("", "0"):
    solve = _simplex_py.solve
    BACKEND = "python"
else:
    try:
        from ._simplex_ext import solve
        BACKEND = "cython"
    except ImportError:  # extension not built
        solve = _simplex_py.solve
        BACKEND = "python"

__all__ = ["solve", "BACKEND", "OPTIMAL", "INFEASIBLE", "UNBOUNDED", "ITERATION_LIMIT"]
