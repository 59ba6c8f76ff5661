"""PNG renderings of the report tables (matplotlib, Agg backend)."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from molanneal.svg import BarTable, LineTable  # noqa: E402

RC = {
    "figure.figsize": (7.0, 4.5),
    "axes.labelsize": 11,
    "legend.fontsize": 9,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "savefig.dpi": 120,
    "svg.hashsalt": "molanneal",
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".png")
    os.close(fd)
    try:
        fig.savefig(tmp, format="png", metadata={"Software": None})
        os.replace(tmp, path)
    finally:
        plt.close(fig)
        if os.path.exists(tmp):
            os.unlink(tmp)
    return path


def plot_lines(table: LineTable, path, logx: bool = False) -> Path:
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        for name, y in table.series.items():
            ax.plot(table.x, y, label=name, lw=1.4)
        for xm in table.markers_x:
            ax.axvline(xm, color="0.5", ls="--", lw=0.8)
        if logx:
            ax.set_xscale("log")
        ax.set_xlabel(table.x_label)
        ax.set_ylabel(table.y_label)
        ax.set_title(table.title)
        if len(table.series) > 1:
            ax.legend(frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def plot_bars(table: BarTable, path) -> Path:
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        x = np.arange(len(table.values))
        ax.bar(x, table.values, width=0.7)
        ax.set_xticks(x, table.labels, rotation=90 if len(x) > 8 else 0)
        ax.set_ylabel(table.y_label)
        ax.set_title(table.title)
        fig.tight_layout()
        return _save(fig, path)
