"""Figure rendering for the CLI. Every figure is written next to its data file."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# strip version strings and timestamps so reruns are byte-identical
_META = {"Software": None}


def figure_path(data_path) -> Path:
    return Path(data_path).with_suffix(".png")


def _finish(fig, ax, path, title, xlabel, ylabel, logx=False, logy=False, legend=True):
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    if legend and ax.get_legend_handles_labels()[0]:
        ax.legend(frameon=False)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)
    return path


def line_plot(path, header, rows, title="", xlabel=None, ylabel="", logx=False, logy=False,
              series=None):
    """First column is x; every other numeric column (or those in ``series``) is a line."""
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [r[0] for r in rows]
    cols = series or list(range(1, len(header)))
    for c in cols:
        ys = [r[c] for r in rows]
        ax.plot(xs, ys, label=header[c], lw=1.6)
    return _finish(fig, ax, path, title, xlabel or header[0], ylabel, logx, logy,
                   legend=len(cols) > 1)


def grouped_line_plot(path, groups: dict, title="", xlabel="", ylabel="", logx=False):
    """``groups`` maps a label to (xs, ys)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (xs, ys) in groups.items():
        ax.plot(xs, ys, label=str(label), lw=1.6)
    return _finish(fig, ax, path, title, xlabel, ylabel, logx)


def cdf_plot(path, samples: dict, title="", xlabel="empirical ratio"):
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, vals in samples.items():
        vals = sorted(vals)
        n = len(vals)
        ax.step(vals, [(k + 1) / n for k in range(n)], where="post", label=str(label), lw=1.4)
    return _finish(fig, ax, path, title, xlabel, "CDF")


def bar_plot(path, groups: dict, title="", xlabel="", ylabel=""):
    """``groups`` maps a group name to {bar label: height}."""
    fig, ax = plt.subplots(figsize=(6, 4))
    names = list(groups)
    bars = sorted({b for g in groups.values() for b in g}, key=str)
    width = 0.8 / max(1, len(bars))
    for j, b in enumerate(bars):
        xs = [i + j * width for i in range(len(names))]
        ax.bar(xs, [groups[g].get(b, 0.0) for g in names], width, label=str(b))
    ax.set_xticks([i + width * (len(bars) - 1) / 2 for i in range(len(names))], names)
    return _finish(fig, ax, path, title, xlabel, ylabel)
