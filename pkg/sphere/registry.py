from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List

import numpy as np

from sphere.base import UnitPoint
from sphere.errors import ParseError
from sphere.functions import Monomial, Polynomial, VertexTable, load_function

if TYPE_CHECKING:
    from sphere.icosa import IcosaTriangulation


@dataclass(frozen=True)
class BuiltinFunction:
    key: str
    polynomial: Polynomial
    description: str
    kind: str = field(default="builtin", init=False)

    @property
    def lip_bound(self) -> float:
        return self.polynomial.lip_bound

    def evaluate(self, p: UnitPoint) -> float:
        return self.polynomial.evaluate(p)

    def evaluate_vertices(self, tri: "IcosaTriangulation") -> np.ndarray:
        return self.polynomial.evaluate_vertices(tri)


_BUILTINS: Dict[str, BuiltinFunction] = {
    "z": BuiltinFunction(
        key="z",
        polynomial=Polynomial.from_terms([Monomial(1.0, 0, 0, 1)]),
        description="height function z; median value 0",
    ),
    "shifted-square": BuiltinFunction(
        key="shifted-square",
        polynomial=Polynomial.from_terms(
            [Monomial(1.0, 0, 0, 2), Monomial(-0.6, 0, 0, 1), Monomial(0.09, 0, 0, 0)]
        ),
        description="(z - 0.3)^2; median on the equator, value 0.09",
    ),
    "one": BuiltinFunction(
        key="one",
        polynomial=Polynomial.constant(1.0),
        description="constant 1",
    ),
    "xyz": BuiltinFunction(
        key="xyz",
        polynomial=Polynomial.from_terms([Monomial(1.0, 1, 1, 1)]),
        description="product x*y*z",
    ),
    "saddle": BuiltinFunction(
        key="saddle",
        polynomial=Polynomial.from_terms([Monomial(1.0, 2, 0, 0), Monomial(-1.0, 0, 2, 0)]),
        description="x^2 - y^2",
    ),
}


def list_functions() -> List[BuiltinFunction]:
    return list(_BUILTINS.values())


def get_function(key: str) -> BuiltinFunction:
    if key not in _BUILTINS:
        valid = ", ".join(sorted(_BUILTINS.keys()))
        raise ParseError(f"Unknown function '{key}'. Valid: {valid}")
    return _BUILTINS[key]


def resolve_function(
    source: str, lip_bound: float | None = None
) -> BuiltinFunction | Polynomial | VertexTable:
    """A builtin key, or a path to a polynomial / vertex-table JSON file."""
    if source in _BUILTINS:
        return _BUILTINS[source]
    if Path(source).suffix == ".json" or Path(source).exists():
        return load_function(source, lip_bound)
    return get_function(source)
