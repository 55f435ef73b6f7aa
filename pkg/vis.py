#!/usr/bin/env python3
"""
Bridge benchmark plots
----------------------
Reads a record CSV (experiment,method,n,T,metric,value,stderr,seconds,seed)
and draws one figure per experiment found in it:
  - stationary time per n
  - accuracy (N and R 1-norm errors) per n and method
  - per-bridge time per T and method
"""

import sys
from pathlib import Path
import numpy as np
import pandas as pd
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.lines import Line2D

DPI = 300


# =====================================================
# COLOR SYSTEM
# =====================================================
COLOR_MAP = {
    "rej": "#1f77b4",
    "mor": "#ff7f0e",
    "dir": "#2ca02c",
    "uni": "#d62728",
    "bis": "#9467bd",
    "tir": "#8c564b",
    "default": "#4c4c4c"
}


def get_color(name: str) -> str:
    return COLOR_MAP.get(str(name).lower(), COLOR_MAP["default"])


def build_legend(methods):
    return [
        Line2D(
            [0], [0],
            marker='o',
            color='w',
            label=m.upper(),
            markerfacecolor=get_color(m),
            markersize=8
        )
        for m in methods
    ]


# =====================================================
# IO
# =====================================================
def load_records(path: str) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)

    return pd.read_csv(path)


def select(df, experiment, metric):
    return df[(df["experiment"] == experiment) & (df["metric"] == metric)]


# =====================================================
# STATIONARY TIMES
# =====================================================
def plot_stationary(df, out_path):
    sub = select(df, "stationary", "stationary_time").sort_values("n")

    fig, ax = plt.subplots(figsize=(7, 4), facecolor="#f5f1ea")

    ax.plot(sub["n"], sub["value"], marker="o", color=COLOR_MAP["default"])
    ax.set_title("Stationary time per number of states")
    ax.set_xlabel("n")
    ax.set_ylabel("stationary time")
    ax.grid(alpha=0.25)

    plt.tight_layout()
    plt.savefig(out_path, dpi=DPI)
    plt.close()


# =====================================================
# ACCURACY
# =====================================================
def plot_accuracy(df, out_path):
    fig, axes = plt.subplots(1, 2, figsize=(11, 4), facecolor="#f5f1ea")
    methods = sorted(df.loc[df["experiment"] == "accuracy", "method"].unique())

    for ax, metric, title in zip(axes, ("N_norm1", "R_norm1"),
                                 ("Transition counts", "Holding times")):
        sub = select(df, "accuracy", metric)

        for m in methods:
            rows = sub[sub["method"] == m].sort_values("n")
            ax.errorbar(rows["n"], rows["value"], yerr=rows["stderr"],
                        marker="o", capsize=3, linewidth=1.5, color=get_color(m))

        ax.set_title(title)
        ax.set_xlabel("n")
        ax.set_ylabel("1-norm error")
        ax.grid(alpha=0.25)

    fig.legend(
        handles=build_legend(methods),
        loc="lower center",
        bbox_to_anchor=(0.5, -0.08),
        ncol=6,
        frameon=False
    )

    plt.subplots_adjust(bottom=0.15)
    plt.savefig(out_path, dpi=DPI, bbox_inches="tight")
    plt.close()


# =====================================================
# SPEED
# =====================================================
def plot_speed(df, out_path):
    sub = select(df, "speed", "seconds_per_bridge")
    methods = sorted(sub["method"].unique())

    fig, ax = plt.subplots(figsize=(7, 5), facecolor="#f5f1ea")

    for m in methods:
        rows = sub[sub["method"] == m].sort_values("T")
        ax.plot(rows["T"], rows["value"] * 1e3, marker="o", linewidth=2, color=get_color(m))

    ax.set_title("Time per bridge")
    ax.set_xlabel("T")
    ax.set_ylabel("milliseconds")
    ax.set_yscale("log")
    ax.grid(alpha=0.25, which="both")

    fig.legend(
        handles=build_legend(methods),
        loc="lower center",
        bbox_to_anchor=(0.5, -0.08),
        ncol=6,
        frameon=False
    )

    plt.subplots_adjust(bottom=0.12)
    plt.savefig(out_path, dpi=DPI, bbox_inches="tight")
    plt.close()


# =====================================================
# PIPELINE
# =====================================================
PLOTS = {
    "stationary": plot_stationary,
    "accuracy": plot_accuracy,
    "speed": plot_speed,
}


def run(path):
    df = load_records(path)

    out_dir = Path(path).parent / f"{Path(path).stem}_plots"
    out_dir.mkdir(exist_ok=True)

    experiments = [e for e in PLOTS if np.any(df["experiment"] == e)]

    print(f"[INFO] Experiments: {experiments}")
    print(f"[INFO] Output: {out_dir}")

    for e in experiments:
        PLOTS[e](df, out_dir / f"{e}.png")

    print("[INFO] Done.")
    return [out_dir / f"{e}.png" for e in experiments]


# =====================================================
# ENTRY
# =====================================================
if __name__ == "__main__":
    p = sys.argv[1] if len(sys.argv) > 1 else input("Enter records CSV path: ").strip()

    if not Path(p).exists():
        raise FileNotFoundError(p)

    run(p)
