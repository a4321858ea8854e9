"""Run configuration shared by the command-line subcommands."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import List, Mapping, Optional

import numpy as np
from scipy.spatial.transform import Rotation

from sphere.errors import ParameterError, ParseError
from sphere.functions import InputFunction, Polynomial
from sphere.registry import BuiltinFunction, resolve_function

THREADS_ENV = "MEDIANQS_THREADS"
SUBCOMMANDS = ("compute", "convergence", "audit-partition", "audit-triangulation", "reeb", "verify")
SEED_LIMIT = 2**64
# generic rotations turn by at most this many radians
MAX_ROTATION_ANGLE = 0.2


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    function_source: Optional[str] = None
    epsilon: Optional[float] = None
    N: Optional[int] = None
    k: Optional[int] = None  # None: k(N)
    seed: int = 0
    output: Optional[str] = None
    lip_bound: Optional[float] = None
    rotate: bool = False
    N_list: List[int] = field(default_factory=list)
    k_list: List[int] = field(default_factory=list)
    workers: int = 1
    reference: Optional[float] = None
    dump: bool = False
    theorem2: bool = False
    trials: int = 200
    samples: int = 10_000

    def __post_init__(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ParameterError(f"Unknown subcommand '{self.subcommand}'. Valid: {', '.join(SUBCOMMANDS)}")
        if not 0 <= self.seed < SEED_LIMIT:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.subcommand == "compute" and (self.epsilon is None) == (self.N is None):
            raise ParameterError("compute needs exactly one of --epsilon and --N")
        if self.k is not None and self.N is None:
            raise ParameterError("--k requires --N")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")


def worker_limit(environ: Mapping[str, str] = os.environ) -> Optional[int]:
    """Cap from MEDIANQS_THREADS, or None when unset."""
    raw = environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        limit = int(raw)
    except ValueError as e:
        raise ParameterError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from e
    if limit < 1:
        raise ParameterError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return limit


def resolve_workers(requested: Optional[int], environ: Mapping[str, str] = os.environ) -> int:
    limit = worker_limit(environ)
    wanted = requested if requested is not None else (os.cpu_count() or 1)
    return max(1, min(wanted, limit) if limit is not None else wanted)


def generic_rotation(seed: int) -> np.ndarray:
    """Small rotation about a random axis, fixed by the seed."""
    rng = np.random.default_rng(seed)
    axis = rng.standard_normal(3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0.5, 1.0) * MAX_ROTATION_ANGLE
    return Rotation.from_rotvec(angle * axis).as_matrix()


def parse_int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ParseError(f"expected a comma-separated list of integers, got {text!r}") from e
    if not values:
        raise ParseError("empty integer list")
    return values


def load_input(source: str, lip_bound: Optional[float] = None, rotation: Optional[np.ndarray] = None) -> InputFunction:
    """Builtin key or JSON path, optionally composed with a rotation."""
    f = resolve_function(source, lip_bound)
    if rotation is None:
        return f
    if isinstance(f, BuiltinFunction):
        return f.polynomial.with_rotation(rotation)
    if isinstance(f, Polynomial):
        return f.with_rotation(rotation)
    raise ParameterError("only polynomial inputs can be rotated")
