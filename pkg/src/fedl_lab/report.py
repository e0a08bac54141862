"""Figure rendering for run outputs.

All helpers draw with the Agg backend and write PNG files next to the
delimited outputs, returning the path written.  They are safe to call
from headless environments and never pop up a window.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .training import TrainingTrace
from .wireless.combined import AllocationSolution, ParetoPoint
from .wireless.profiles import SystemParams, UEProfile
from .wireless.uplink import tau_bounds

DPI = 150


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def plot_trace(trace: TrainingTrace, path: str | Path) -> Path:
    """Loss and aggregated-gradient-norm curves over global rounds."""
    rounds = [r.round for r in trace.records]
    loss = [r.global_loss for r in trace.records]
    gnorm = [r.grad_bar_norm for r in trace.records]
    acc = [r.test_accuracy for r in trace.records]
    have_acc = any(math.isfinite(a) for a in acc)

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.plot(rounds, loss, lw=1.5, label="training loss")
    ax1.set_xlabel("global round")
    ax1.set_ylabel("training loss")
    if have_acc:
        twin = ax1.twinx()
        twin.plot(rounds, acc, lw=1.2, ls="--", color="tab:green", label="test accuracy")
        twin.set_ylabel("test accuracy")
        twin.set_ylim(0.0, 1.0)
    ax1.set_title(f"{trace.algo} training")

    positive = [g for g in gnorm if g > 0]
    if positive:
        ax2.semilogy(rounds, [max(g, 1e-300) for g in gnorm], lw=1.5, color="tab:red")
    else:
        ax2.plot(rounds, gnorm, lw=1.5, color="tab:red")
    ax2.set_xlabel("global round")
    ax2.set_ylabel("aggregated gradient norm")
    ax2.set_title("gradient decay")
    return _finish(fig, path)


def plot_dataset_sizes(
    train_sizes: list[int], test_sizes: list[int], path: str | Path
) -> Path:
    """Per-node sample counts, train stacked under test."""
    idx = np.arange(len(train_sizes))
    fig, ax = plt.subplots(figsize=(max(4.0, 0.25 * len(idx) + 2.0), 3.2))
    ax.bar(idx, train_sizes, label="train", color="tab:blue")
    ax.bar(idx, test_sizes, bottom=train_sizes, label="test", color="tab:orange")
    ax.set_xlabel("node")
    ax.set_ylabel("samples")
    ax.set_title("per-node dataset sizes")
    ax.legend()
    return _finish(fig, path)


def plot_allocation(
    ues: list[UEProfile], sys: SystemParams, sol: AllocationSolution, path: str | Path
) -> Path:
    """Per-UE optimal frequencies and transmission durations with their bounds."""
    idx = np.arange(len(ues))
    f_star = np.asarray(sol.sub1.f_star, dtype=float)
    tau_star = np.asarray(sol.sub2.tau_star, dtype=float)
    f_lo = np.array([u.f_min for u in ues])
    f_hi = np.array([u.f_max for u in ues])
    bounds = [tau_bounds(u, sys) for u in ues]
    t_lo = np.array([b[0] for b in bounds])
    t_hi = np.array([b[1] for b in bounds])

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.bar(idx, f_star / 1e9, color="tab:blue")
    ax1.plot(idx, f_lo / 1e9, "k_", markersize=10, label="bounds")
    ax1.plot(idx, f_hi / 1e9, "k_", markersize=10)
    ax1.set_xlabel("UE")
    ax1.set_ylabel("CPU frequency (GHz)")
    ax1.set_title(f"computation (deadline {sol.sub1.T_cp_star:.3g} s)")
    ax1.legend()

    ax2.bar(idx, tau_star, color="tab:orange")
    ax2.plot(idx, t_lo, "k_", markersize=10, label="bounds")
    ax2.plot(idx, t_hi, "k_", markersize=10)
    ax2.set_xlabel("UE")
    ax2.set_ylabel("transmission duration (s)")
    ax2.set_title(f"communication (total {sol.sub2.T_co_star:.3g} s)")
    ax2.legend()
    return _finish(fig, path)


def plot_pareto(points: list[ParetoPoint], path: str | Path) -> Path:
    """Energy/time frontier traced by the weight sweep."""
    t = [p.total_time for p in points]
    e = [p.total_energy for p in points]
    fig, ax = plt.subplots(figsize=(4.8, 3.6))
    ax.loglog(t, e, "o-", ms=4, lw=1.2)
    if points:
        ax.annotate(f"weight={points[0].kappa:.3g}", (t[0], e[0]), fontsize=8,
                    textcoords="offset points", xytext=(4, 4))
        ax.annotate(f"weight={points[-1].kappa:.3g}", (t[-1], e[-1]), fontsize=8,
                    textcoords="offset points", xytext=(4, -10))
    ax.set_xlabel("total training time (s)")
    ax.set_ylabel("total UE energy (J)")
    ax.set_title("energy/time trade-off")
    return _finish(fig, path)
