"""PNG figures written next to the CSV/JSON outputs."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .flowlab import MonitorSeries  # noqa: E402
from .shapes import outline  # noqa: E402
from .spectral import SpectrumResult  # noqa: E402

_META = {"Software": None}


def _finish(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)
    return path


def plot_monitors(series: MonitorSeries, path: Path) -> Path:
    names = list(series.values)
    fig, axes = plt.subplots(len(names) + 1, 1, figsize=(6, 1.8 * (len(names) + 1)), sharex=True)
    t = np.asarray(series.times)
    for ax, name in zip(axes, names):
        v = series.series(name)
        ax.plot(t, v, "k-", lw=1)
        claim = series.claims.get(name)
        ax.set_ylabel(name, fontsize=8)
        if claim:
            ax.set_title(claim, fontsize=8, loc="right")
        ax.tick_params(labelsize=7)
    ax = axes[-1]
    ax.semilogy(t, np.maximum(series.max_speed, 1e-300), "b-", lw=1)
    ax.set_ylabel("max|F|", fontsize=8)
    ax.set_xlabel("t", fontsize=8)
    ax.tick_params(labelsize=7)
    return _finish(fig, path)


def plot_shapes(shapes: Sequence, labels: Sequence[str], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(4, 4))
    for s, lab in zip(shapes, labels):
        xy = outline(s)
        ax.plot(xy[:, 0], xy[:, 1], lw=1, label=lab)
    ax.plot([0], [0], "k+")
    ax.set_aspect("equal")
    ax.legend(frameon=False, fontsize=7)
    ax.tick_params(labelsize=7)
    return _finish(fig, path)


def plot_spectrum(result: SpectrumResult, path: Path, bound: float | None = None) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3))
    modes = np.asarray(result.modes)
    idx = np.arange(result.eigenvalues.size)
    for m in np.unique(modes):
        sel = modes == m
        ax.plot(idx[sel], result.eigenvalues[sel], "o", ms=4, label=f"m={m}")
    if bound is not None:
        ax.axhline(bound, color="r", lw=0.8, ls="--", label="bound")
    ax.set_xlabel("index", fontsize=8)
    ax.set_ylabel("lambda", fontsize=8)
    ax.legend(frameon=False, fontsize=7)
    ax.tick_params(labelsize=7)
    return _finish(fig, path)


def plot_margins(margins: Sequence[float], scales: Sequence[float], path: Path) -> Path:
    rel = np.asarray(margins) / np.maximum(np.asarray(scales), 1e-300)
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.bar(np.arange(rel.size), rel, color=np.where(rel < 0, "r", "0.4"))
    ax.axhline(0.0, color="k", lw=0.6)
    ax.set_xlabel("shape", fontsize=8)
    ax.set_ylabel("margin / scale", fontsize=8)
    ax.tick_params(labelsize=7)
    return _finish(fig, path)
