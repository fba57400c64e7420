"""Static figures for scenario reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

PRECLUDED_COLOR = "#c0392b"
OPEN_COLOR = "#34495e"


def _as_float(v) -> float:
    if isinstance(v, str):
        num, _, den = v.partition("/")
        return float(num) / float(den or 1)
    return float(v)


def plot_mu(report: dict, path: str | Path) -> Path:
    """Bar chart of mu over every event, precluded events in red."""
    table = report["mu_table"]
    if table is None:
        raise ValueError("report has no mu table (too many histories)")
    values = np.array([_as_float(r["mu"]) for r in table])
    colors = [PRECLUDED_COLOR if r["precluded"] else OPEN_COLOR for r in table]
    n = len(report["histories"])
    fig, ax = plt.subplots(figsize=(max(6.0, min(0.25 * len(table), 18.0)), 3.6))
    ax.bar(np.arange(len(table)), values, color=colors, width=0.8)
    ax.set_xlabel("event (bit pattern)")
    ax.set_ylabel(r"$\mu(E)$")
    ax.set_title(f"{report['scenario']}: quantal measure, {report['null_structure']['precluded_count']} precluded")
    if n <= 4:
        ax.set_xticks(np.arange(len(table)))
        ax.set_xticklabels(["{" + ",".join(r["event"]) + "}" for r in table], rotation=60, fontsize=8)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_primitives(report: dict, path: str | Path) -> Path:
    """Support matrix: one row per primitive coevent, one column per history."""
    labels = report["histories"]
    rows = report["primitives"]
    grid = np.zeros((max(len(rows), 1), len(labels)))
    for i, r in enumerate(rows):
        for lab in r["support"]:
            grid[i, labels.index(lab)] = 1.0
    fig, ax = plt.subplots(figsize=(max(4.0, 0.45 * len(labels) + 1.5), max(2.0, 0.35 * len(rows) + 1.2)))
    ax.imshow(grid, cmap="Greys", vmin=0, vmax=1, aspect="auto")
    ax.set_xticks(np.arange(len(labels)))
    ax.set_xticklabels(labels, rotation=90 if len(labels) > 8 else 0, fontsize=8)
    ax.set_yticks(np.arange(len(rows)))
    ax.set_yticklabels([("H" if r["homomorphic"] else "") + f"#{i}" for i, r in enumerate(rows)], fontsize=8)
    ax.set_title(f"{report['scenario']}: {len(rows)} primitive supports")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_figures(report: dict, directory: str | Path) -> list[Path]:
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = report["scenario"]
    written = []
    if report["mu_table"] is not None:
        written.append(plot_mu(report, out_dir / f"{stem}_mu.png"))
    written.append(plot_primitives(report, out_dir / f"{stem}_primitives.png"))
    return written
