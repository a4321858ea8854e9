from sphere.base import UnitPoint, euclidean_dist, radial_project, spherical_dist
from sphere.functions import Polynomial, VertexTable, evaluate, polynomial_lip_bound
from sphere.icosa import IcosaTriangulation, build_triangulation
from sphere.partition import EqualAreaPartition, RegionId, build_partition

__all__ = [
    "UnitPoint",
    "euclidean_dist",
    "spherical_dist",
    "radial_project",
    "Polynomial",
    "VertexTable",
    "evaluate",
    "polynomial_lip_bound",
    "IcosaTriangulation",
    "build_triangulation",
    "EqualAreaPartition",
    "RegionId",
    "build_partition",
]
