"""Convergence sweeps: one certified computation per N, rows ordered by N."""

from __future__ import annotations

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, TextIO, Tuple

import numpy as np

from harness.config import load_input
from quasistate.median import compute, k_for_N

logger = logging.getLogger(__name__)

COLUMNS = ["N", "k", "value", "error_bound", "elapsed_ms"]


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    k: int
    value: float
    error_bound: float
    elapsed_ms: float


def _solve(task: Tuple[str, Optional[float], Optional[Tuple[Tuple[float, ...], ...]], int]) -> ConvergenceRow:
    source, lip_bound, rotation, N = task
    f = load_input(source, lip_bound, None if rotation is None else np.asarray(rotation))
    k = k_for_N(N)
    started = time.perf_counter()
    result = compute(f, N, k)
    elapsed_ms = 1000.0 * (time.perf_counter() - started)
    logger.info("N=%d k=%d value=%.12g (%.0f ms)", N, k, result.value, elapsed_ms)
    return ConvergenceRow(N, k, result.value, result.error_bound, elapsed_ms)


def run_sweep(
    source: str,
    N_list: Iterable[int],
    lip_bound: Optional[float] = None,
    rotation: Optional[np.ndarray] = None,
    workers: int = 1,
) -> List[ConvergenceRow]:
    """Compute zeta_Z(F) at every N with k = k(N); independent runs may go to worker processes."""
    rot = None if rotation is None else tuple(tuple(float(v) for v in row) for row in rotation)
    tasks = [(source, lip_bound, rot, N) for N in sorted(set(N_list))]
    if workers <= 1 or len(tasks) <= 1:
        rows = [_solve(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            rows = list(pool.map(_solve, tasks))
    return sorted(rows, key=lambda r: r.N)


def write_csv(rows: List[ConvergenceRow], out: TextIO, reference: Optional[float] = None) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(COLUMNS + (["abs_error"] if reference is not None else []))
    for r in rows:
        row = [r.N, r.k, repr(r.value), repr(r.error_bound), f"{r.elapsed_ms:.3f}"]
        if reference is not None:
            row.append(repr(abs(r.value - reference)))
        w.writerow(row)


def rows_to_csv(rows: List[ConvergenceRow], reference: Optional[float] = None) -> str:
    buf = io.StringIO()
    write_csv(rows, buf, reference)
    return buf.getvalue()
