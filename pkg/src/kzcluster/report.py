"""Matplotlib figure rendering for run reports and benchmarks."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def save_cost_trajectory(trajectory: list[float], path: str,
                         exact_final: float | None = None) -> None:
    """Objective estimator per iteration, log scale, one PNG."""
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    ax.plot(range(len(trajectory)), trajectory, marker="o", ms=3, lw=1.2,
            label="estimated cost")
    if exact_final is not None and exact_final > 0:
        ax.axhline(exact_final, color="tab:green", lw=0.8, ls="--",
                   label="final exact cost")
    ax.set_yscale("log")
    ax.set_xlabel("positive iteration")
    ax.set_ylabel("cost estimator")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_bench_figure(rows: list[dict], path: str) -> None:
    """Timing-vs-size scaling figure from benchmark rows."""
    fig, ax = plt.subplots(figsize=(6. , 3.8))
    ns = [r["n"] for r in rows]
    for key, label in (("init_ms", "initialize (ms)"),
                       ("insert_us", "insert (us)"),
                       ("delete_us", "delete (us)"),
                       ("sample_us", "sample (us)")):
        ax.plot(ns, [r[key] for r in rows], marker="o", ms=3, lw=1.2, label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("vertices")
    ax.set_ylabel("time")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
