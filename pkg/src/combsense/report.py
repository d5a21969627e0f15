"""Deterministic delimited output and the optional figure report path.

Every CSV has a header row, deterministic row order, and 9-significant-digit
formatting; repeated runs are byte-identical.  Figures are a convenience
rendering of the same rows (PNG next to the CSV); the CSV is the contract.
"""

from __future__ import annotations

import sys
from typing import Iterable, Sequence


def fmt(value) -> str:
    """9-significant-digit formatting for CSV cells."""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    return f"{value:.9g}"


def write_csv(header: Sequence[str], rows: Iterable[Sequence], out=None) -> None:
    """Write rows to a path or stdout."""
    lines = [",".join(header)]
    lines += [",".join(fmt(cell) for cell in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def render_figure(kind: str, header: Sequence[str], rows: Sequence[Sequence],
                  path: str) -> None:
    """Render the CSV rows as a simple matplotlib figure.

    kind: "lines" (first column x, remaining columns y-series),
          "heatmap" (columns x, y, value on a rectangular grid),
          "region"  (heatmap of 0/1 cells).
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    data = np.asarray([[float(c) for c in row] for row in rows])
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    if kind == "lines":
        for j in range(1, data.shape[1]):
            ax.plot(data[:, 0], data[:, j], label=header[j])
        ax.set_xlabel(header[0])
        ax.legend(frameon=False, fontsize=8)
    elif kind in ("heatmap", "region"):
        xs = np.unique(data[:, 0])
        ys = np.unique(data[:, 1])
        grid = np.full((ys.size, xs.size), np.nan)
        xi = np.searchsorted(xs, data[:, 0])
        yi = np.searchsorted(ys, data[:, 1])
        grid[yi, xi] = data[:, 2]
        mesh = ax.pcolormesh(xs, ys, grid, shading="nearest",
                             cmap="viridis" if kind == "heatmap" else "Greys")
        fig.colorbar(mesh, ax=ax, label=header[2])
        ax.set_xlabel(header[0])
        ax.set_ylabel(header[1])
    else:
        raise ValueError(f"unknown figure kind {kind!r}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
