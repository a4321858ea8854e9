"""Timing fits for the O(N^2 log N) pipeline."""

from __future__ import annotations

import argparse
import statistics
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

import numpy as np
import pandas as pd

from harness.config import parse_int_list
from quasistate.median import MedianSolver, k_for_N
from sphere.icosa import build_triangulation
from sphere.registry import get_function


@dataclass(frozen=True)
class ComplexityFit:
    a: float
    N: List[int]
    seconds: List[float]
    deviations: List[float]  # |t - a N^2 log N| / (a N^2 log N)

    @property
    def max_deviation(self) -> float:
        return max(self.deviations)


def n2logn(N: np.ndarray) -> np.ndarray:
    N = np.asarray(N, dtype=float)
    return N * N * np.log(N)


def fit_n2logn(N: Sequence[int], seconds: Sequence[float]) -> ComplexityFit:
    """Least-squares a in t = a N^2 log N, with per-point relative deviations."""
    if len(N) != len(seconds) or len(N) == 0:
        raise ValueError("need matching, nonempty N and timing lists")
    g = n2logn(np.asarray(N))
    t = np.asarray(seconds, dtype=float)
    a = float(np.dot(g, t) / np.dot(g, g))
    deviations = np.abs(t - a * g) / (a * g)
    return ComplexityFit(a, list(map(int, N)), t.tolist(), deviations.tolist())


def fit_from_csv(csv_path: Path) -> ComplexityFit:
    """Fit the median elapsed time per N of a convergence CSV."""
    df = pd.read_csv(csv_path)
    for col in ("N", "elapsed_ms"):
        if col not in df.columns:
            raise ValueError(f"{csv_path} lacks a {col} column")
    per_n = df.groupby("N")["elapsed_ms"].median().sort_index()
    return fit_n2logn(per_n.index.tolist(), (per_n / 1000.0).tolist())


def time_pipeline(N_list: Iterable[int], repeats: int = 5, function: str = "z") -> Dict[int, float]:
    """Median wall time in seconds of the full pipeline at each N."""
    f = get_function(function)
    timings = {}
    for N in N_list:
        runs = []
        for _ in range(repeats):
            build_triangulation.cache_clear()
            started = time.perf_counter()
            # fresh solver and empty cache: triangulation, partition, marks and tree are all rebuilt
            MedianSolver(N, k_for_N(N)).compute(f)
            runs.append(time.perf_counter() - started)
        timings[N] = statistics.median(runs)
    return timings


def parse_args() -> argparse.Namespace:
    p = argparse.ArgumentParser(description="Fit t(N) = a N^2 log N to pipeline timings.")
    p.add_argument("--csv", type=str, default=None, help="Convergence CSV to fit instead of timing afresh.")
    p.add_argument("--N-list", dest="N_list", type=parse_int_list, default=[46, 92, 184])
    p.add_argument("--repeats", type=int, default=5)
    return p.parse_args()


def main() -> None:
    args = parse_args()
    if args.csv is not None:
        fit = fit_from_csv(Path(args.csv))
    else:
        timings = time_pipeline(args.N_list, args.repeats)
        fit = fit_n2logn(list(timings), list(timings.values()))
    print(f"a = {fit.a:.4g} s")
    for N, t, dev in zip(fit.N, fit.seconds, fit.deviations):
        print(f"N={N:5d}  t={t:8.3f} s  deviation={100 * dev:5.1f}%")


if __name__ == "__main__":
    main()
