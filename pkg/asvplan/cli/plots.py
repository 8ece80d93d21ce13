#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

"""SVG figures written by the command-line tools. Output is deterministic:
the SVG hash salt is fixed and no creation date is embedded."""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


matplotlib.rcParams["svg.hashsalt"] = "asvplan"

VARIANT_COLORS = {
    "MOA_LSTM": "tab:red",
    "MOA_PLUS": "tab:orange",
    "MOA": "tab:purple",
    "VO_PLUS": "tab:green",
    "VO": "tab:blue",
    "HISTORICAL": "black",
}
COOPERATIVE_COLOR = "cyan"
NON_COOPERATIVE_COLOR = "gray"


def _save(fig, path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_trajectories(log, path, arena=None):
    """Ego track colored by variant; cooperative obstacles cyan, others gray"""
    fig, ax = plt.subplots(figsize=(6, 6))
    cooperative = set(log.cooperative_ids)
    for vessel_id, xy in log.trajectories().items():
        if vessel_id == "ego":
            continue
        color = COOPERATIVE_COLOR if vessel_id in cooperative else NON_COOPERATIVE_COLOR
        ax.plot(xy[:, 0], xy[:, 1], color=color, linewidth=0.8)
        ax.plot(xy[-1, 0], xy[-1, 1], "o", color=color, markersize=2)
    ego = log.trajectories().get("ego")
    if ego is not None:
        color = VARIANT_COLORS.get(log.variant, "tab:red")
        ax.plot(ego[:, 0], ego[:, 1], color=color, linewidth=1.8, label=log.variant)
        ax.plot(ego[0, 0], ego[0, 1], "s", color=color, markersize=4)
    if log.route:
        route = np.asarray(log.route)
        ax.plot(route[:, 0], route[:, 1], "k*", markersize=8, label="goal")
    if arena is not None:
        half = arena / 2.0
        ax.set_xlim(-half, half)
        ax.set_ylim(-half, half)
    ax.set_aspect("equal")
    ax.set_xlabel("East [m]")
    ax.set_ylabel("North [m]")
    ax.set_title(f"{log.name or 'episode'}: {log.outcome.value}")
    ax.legend(loc="upper right")
    return _save(fig, path)


def plot_gain_field(headings, speed_ratios, values, path, in_no_go=None, label="I_tilde"):
    """Heading x speed-ratio heatmap of a per-action field; no-go actions hatched black"""
    ratios = np.unique(speed_ratios)
    grid_headings = np.unique(headings)
    grid = np.full((len(ratios), len(grid_headings)), np.nan)
    rows = np.searchsorted(ratios, speed_ratios)
    cols = np.searchsorted(grid_headings, headings)
    grid[rows, cols] = values

    fig, ax = plt.subplots(figsize=(8, 3))
    mesh = ax.pcolormesh(grid_headings, ratios, grid, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=label)
    if in_no_go is not None and np.any(in_no_go):
        mask = np.asarray(in_no_go, dtype=bool)
        ax.plot(headings[mask], speed_ratios[mask], "k.", markersize=1.5, label="no-go")
        ax.legend(loc="upper right")
    ax.set_xlabel("Heading [deg]")
    ax.set_ylabel("Speed ratio")
    fig.tight_layout()
    return _save(fig, path)


def plot_separation(runs, path, collision_radius=None):
    """Ego-to-obstacle separation over time, one line per (run, obstacle)"""
    fig, ax = plt.subplots(figsize=(7, 4))
    for name, log in runs.items():
        frame = log.separation_frame()
        for vessel_id, group in frame.groupby("vessel_id", sort=True):
            ax.plot(group.t, group.separation, label=f"{name} / {vessel_id}")
    if collision_radius is not None:
        ax.axhline(collision_radius, color="k", linestyle="--", label="collision radius")
    ax.set_xlabel("Time [s]")
    ax.set_ylabel("Separation [m]")
    ax.legend(loc="upper right")
    fig.tight_layout()
    return _save(fig, path)


def plot_beliefs(log, path):
    frame = log.beliefs_frame()
    fig, ax = plt.subplots(figsize=(7, 3))
    for vessel_id, group in frame.groupby("vessel_id", sort=True):
        ax.plot(group.t, group.p_l, label=f"p_l {vessel_id}")
    ax.axhline(0.5, color="gray", linewidth=0.5)
    ax.set_ylim(-0.05, 1.05)
    ax.set_xlabel("Time [s]")
    ax.set_ylabel("P(left)")
    if len(frame):
        ax.legend(loc="upper right")
    fig.tight_layout()
    return _save(fig, path)


def plot_summary(summary, path, metric="success_rate"):
    """Grouped bars of `metric` per obstacle count, one bar per variant"""
    variants = list(dict.fromkeys(summary.variant))
    counts = sorted(summary.n_obstacles.unique())
    table = summary.groupby(["n_obstacles", "variant"], sort=False)[metric].mean()
    width = 0.8 / max(len(variants), 1)

    fig, ax = plt.subplots(figsize=(7, 4))
    x = np.arange(len(counts))
    for i, variant in enumerate(variants):
        heights = [table.get((n, variant), np.nan) for n in counts]
        ax.bar(
            x + i * width,
            heights,
            width,
            label=variant,
            color=VARIANT_COLORS.get(variant),
        )
    ax.set_xticks(x + width * (len(variants) - 1) / 2.0)
    ax.set_xticklabels([str(n) for n in counts])
    ax.set_xlabel("Obstacles")
    ax.set_ylabel(metric)
    ax.legend(loc="lower left")
    fig.tight_layout()
    return _save(fig, path)


def plot_training(report, path):
    frame = report.to_frame()
    fig, (loss_ax, f1_ax) = plt.subplots(1, 2, figsize=(8, 3))
    loss_ax.plot(frame.epoch, frame.train_loss, label="train")
    loss_ax.plot(frame.epoch, frame.val_loss, label="validation")
    loss_ax.set_xlabel("Epoch")
    loss_ax.set_ylabel("BCE loss")
    loss_ax.legend()
    f1_ax.plot(frame.epoch, frame.train_f1, label="train")
    f1_ax.plot(frame.epoch, frame.val_f1, label="validation")
    f1_ax.set_xlabel("Epoch")
    f1_ax.set_ylabel("F1")
    f1_ax.legend()
    fig.tight_layout()
    return _save(fig, path)
