from field.pl import ScalarField, pl_lip_bound, pl_sup_error_bound, sample
from field.reeb import ReebTree, build_reeb, collapse, critical_vertices

__all__ = [
    "ScalarField",
    "sample",
    "pl_sup_error_bound",
    "pl_lip_bound",
    "ReebTree",
    "build_reeb",
    "collapse",
    "critical_vertices",
]
