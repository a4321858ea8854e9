"""Input functions on the sphere: polynomials restricted to S^2 and vertex tables."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, Iterable, List, Protocol, Tuple

import numpy as np

from sphere.base import UnitPoint
from sphere.errors import DomainError, ParameterError, ParseError

if TYPE_CHECKING:
    from sphere.icosa import IcosaTriangulation

Rotation3 = Tuple[Tuple[float, float, float], Tuple[float, float, float], Tuple[float, float, float]]


class InputFunction(Protocol):
    """Minimal interface every input function exposes to the pipeline."""

    kind: str  # "polynomial", "vertex-table" or "builtin"

    @property
    def lip_bound(self) -> float | None: ...

    def evaluate(self, p: UnitPoint) -> float: ...
    def evaluate_vertices(self, tri: "IcosaTriangulation") -> np.ndarray: ...


@dataclass(frozen=True)
class Monomial:
    c: float
    i: int
    j: int
    k: int

    @property
    def degree(self) -> int:
        return self.i + self.j + self.k


def _merge_terms(terms: Iterable[Monomial]) -> Tuple[Monomial, ...]:
    acc: Dict[Tuple[int, int, int], float] = {}
    for t in terms:
        if min(t.i, t.j, t.k) < 0:
            raise ParseError(f"negative exponent in monomial {t}")
        key = (t.i, t.j, t.k)
        acc[key] = acc.get(key, 0.0) + float(t.c)
    return tuple(Monomial(c, *key) for key, c in sorted(acc.items()) if c != 0.0)


@dataclass(frozen=True)
class Polynomial:
    """sum c * x^i y^j z^k restricted to the unit sphere.

    An optional rotation R turns the function into p -> f(R p); rotations are
    isometries, so the Lipschitz bound is unchanged.
    """

    terms: Tuple[Monomial, ...]
    rotation: Rotation3 | None = None
    kind: str = field(default="polynomial", init=False)

    @classmethod
    def from_terms(cls, terms: Iterable[Monomial | Tuple[float, int, int, int]]) -> "Polynomial":
        monomials = [t if isinstance(t, Monomial) else Monomial(*t) for t in terms]
        return cls(_merge_terms(monomials))

    @classmethod
    def constant(cls, c: float) -> "Polynomial":
        return cls.from_terms([Monomial(float(c), 0, 0, 0)])

    @property
    def degree(self) -> int:
        return max((t.degree for t in self.terms), default=0)

    @property
    def lip_bound(self) -> float:
        return polynomial_lip_bound(self)

    def evaluate(self, p: UnitPoint) -> float:
        return float(self.evaluate_many(np.array([[p.x, p.y, p.z]]))[0])

    def evaluate_many(self, xyz: np.ndarray) -> np.ndarray:
        xyz = np.asarray(xyz, dtype=float)
        if self.rotation is not None:
            xyz = xyz @ np.asarray(self.rotation).T
        x, y, z = xyz[:, 0], xyz[:, 1], xyz[:, 2]
        out = np.zeros(len(xyz))
        for t in self.terms:
            out += t.c * x**t.i * y**t.j * z**t.k
        return out

    def evaluate_vertices(self, tri: "IcosaTriangulation") -> np.ndarray:
        return self.evaluate_many(tri.vertices)

    def with_rotation(self, rotation: np.ndarray) -> "Polynomial":
        r = np.asarray(rotation, dtype=float)
        if r.shape != (3, 3) or not np.allclose(r @ r.T, np.eye(3), atol=1e-12):
            raise ParameterError("rotation must be an orthogonal 3x3 matrix")
        if self.rotation is not None:
            r = r @ np.asarray(self.rotation)
        return Polynomial(self.terms, tuple(tuple(float(v) for v in row) for row in r))  # type: ignore[arg-type]

    def _check_plain(self, other: "Polynomial") -> None:
        if self.rotation is not None or other.rotation is not None:
            raise ParameterError("arithmetic is only defined for unrotated polynomials")

    def __add__(self, other: "Polynomial | float") -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(float(other))
        self._check_plain(other)
        return Polynomial.from_terms(self.terms + other.terms)

    __radd__ = __add__

    def __mul__(self, other: "Polynomial | float") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return Polynomial(
                _merge_terms(Monomial(t.c * float(other), t.i, t.j, t.k) for t in self.terms),
                self.rotation,
            )
        self._check_plain(other)
        return Polynomial.from_terms(
            Monomial(a.c * b.c, a.i + b.i, a.j + b.j, a.k + b.k)
            for a in self.terms
            for b in other.terms
        )

    __rmul__ = __mul__

    def __neg__(self) -> "Polynomial":
        return self * -1.0

    def __sub__(self, other: "Polynomial | float") -> "Polynomial":
        return self + (-other)

    def affine(self, a: float, b: float) -> "Polynomial":
        """a * f + b."""
        scaled = self * a
        if b == 0.0:
            return scaled
        if self.rotation is None:
            return scaled + b
        # constant terms are rotation invariant
        return Polynomial(_merge_terms(scaled.terms + (Monomial(b, 0, 0, 0),)), self.rotation)

    def to_json(self) -> List[Dict[str, Any]]:
        return [{"c": t.c, "i": t.i, "j": t.j, "k": t.k} for t in self.terms]


@dataclass(frozen=True)
class VertexTable:
    """Values given at the vertices of the canonical triangulation T_N.

    The Lipschitz bound cannot be derived from a table, so it must be supplied
    by the caller whenever a certified bound is needed.
    """

    N: int
    values: Tuple[float, ...]
    lip: float | None = None
    kind: str = field(default="vertex-table", init=False)

    def __post_init__(self) -> None:
        expected = 10 * self.N * self.N + 2
        if len(self.values) != expected:
            raise ParseError(f"vertex table for N={self.N} needs {expected} values, got {len(self.values)}")
        if self.lip is not None and self.lip < 0:
            raise ParameterError("lip_bound must be nonnegative")

    @property
    def lip_bound(self) -> float | None:
        return self.lip

    def evaluate(self, p: UnitPoint) -> float:
        from sphere.icosa import build_triangulation

        dist, idx = build_triangulation(self.N).kdtree.query([p.x, p.y, p.z])
        if dist > 1e-9:
            raise DomainError(f"vertex table for N={self.N} is undefined away from vertices")
        return float(self.values[int(idx)])

    def evaluate_vertices(self, tri: "IcosaTriangulation") -> np.ndarray:
        if tri.N != self.N:
            raise ParameterError(f"vertex table was given for N={self.N}, triangulation has N={tri.N}")
        return np.asarray(self.values, dtype=float)


def evaluate(f: InputFunction, p: UnitPoint) -> float:
    return f.evaluate(p)


def polynomial_lip_bound(f: Polynomial) -> float:
    """D * sqrt(3) * (sum c^2)^(1/2), an upper bound for the chordal Lipschitz constant."""
    if f.degree == 0:
        return 0.0
    return f.degree * math.sqrt(3.0) * math.sqrt(sum(t.c * t.c for t in f.terms))


def parse_polynomial(data: Any) -> Polynomial:
    if not isinstance(data, list):
        raise ParseError("polynomial file must hold a JSON array of monomials")
    terms = []
    for n, item in enumerate(data):
        try:
            c = float(item["c"])
            exps = [item[key] for key in ("i", "j", "k")]
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"monomial #{n} is malformed: {item!r}") from e
        if not all(isinstance(e, int) and not isinstance(e, bool) for e in exps):
            raise ParseError(f"monomial #{n} has non-integer exponents: {item!r}")
        if not math.isfinite(c):
            raise ParseError(f"monomial #{n} has a non-finite coefficient")
        terms.append(Monomial(c, *exps))
    return Polynomial.from_terms(terms)


def parse_vertex_table(data: Any, lip_bound: float | None = None) -> VertexTable:
    try:
        n = int(data["N"])
        values = tuple(float(v) for v in data["values"])
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError("vertex table must be an object {N, values}") from e
    if n < 1:
        raise ParseError(f"vertex table N must be >= 1, got {n}")
    lip = lip_bound if lip_bound is not None else data.get("lip_bound")
    return VertexTable(n, values, None if lip is None else float(lip))


def load_function(path: str | Path, lip_bound: float | None = None) -> Polynomial | VertexTable:
    """Read a polynomial (JSON array) or vertex table (JSON object) from disk."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"Missing function file at {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ParseError(f"{path} is not valid JSON: {e}") from e
    if isinstance(data, dict):
        return parse_vertex_table(data, lip_bound)
    return parse_polynomial(data)
