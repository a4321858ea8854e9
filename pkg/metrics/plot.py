from __future__ import annotations

import argparse
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd


def parse_args() -> argparse.Namespace:
    p = argparse.ArgumentParser(description="Plot a convergence CSV: error bound and measured error vs N.")
    p.add_argument("--csv", type=str, required=True, help="Path to a convergence CSV.")
    p.add_argument("--reference", type=float, default=None, help="Known zeta(f) if the CSV has no abs_error.")
    return p.parse_args()


def main() -> None:
    args = parse_args()
    csv_path = Path(args.csv)
    if not csv_path.exists():
        raise FileNotFoundError(f"Missing convergence CSV at {csv_path}")

    df = pd.read_csv(csv_path)

    for col in ["value", "error_bound", "elapsed_ms"]:
        if col in df.columns:
            df[col] = pd.to_numeric(df[col], errors="coerce")
    df = df.sort_values("N")

    if "abs_error" not in df.columns and args.reference is not None:
        df["abs_error"] = (df["value"] - args.reference).abs()

    # Plot 1: certified bound, and measured error when a reference is known
    plt.figure()
    plt.loglog(df["N"], df["error_bound"], marker="o", label="certified bound")
    if "abs_error" in df.columns:
        plt.loglog(df["N"], df["abs_error"].clip(lower=1e-16), marker="s", label="|value - reference|")
    plt.xlabel("N")
    plt.ylabel("error")
    plt.legend()
    plt.title(f"Convergence ({csv_path.stem})")
    out1 = csv_path.with_name(f"{csv_path.stem}_error.png")
    plt.savefig(out1, dpi=160, bbox_inches="tight")
    print(f"Saved: {out1}")

    # Plot 2: wall time
    if "elapsed_ms" in df.columns:
        plt.figure()
        plt.loglog(df["N"], df["elapsed_ms"], marker="o")
        plt.xlabel("N")
        plt.ylabel("elapsed (ms)")
        plt.title(f"Pipeline time ({csv_path.stem})")
        out2 = csv_path.with_name(f"{csv_path.stem}_time.png")
        plt.savefig(out2, dpi=160, bbox_inches="tight")
        print(f"Saved: {out2}")


if __name__ == "__main__":
    main()
