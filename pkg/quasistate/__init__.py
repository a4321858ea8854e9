from quasistate.median import (
    MedianSolver,
    QuasiStateResult,
    compute,
    count_pass,
    find_median,
    mark_vertices,
    select_parameters,
)
from quasistate.wasserstein import DiscreteMeasure, w_infinity, w_one

__all__ = [
    "MedianSolver",
    "QuasiStateResult",
    "compute",
    "count_pass",
    "find_median",
    "mark_vertices",
    "select_parameters",
    "DiscreteMeasure",
    "w_infinity",
    "w_one",
]
