"""Figures for benchmark reports, written next to the tabular output."""

from __future__ import annotations

from collections import Counter, defaultdict
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .bench import SWEEP_KEYS, BenchRow  # noqa: E402

plt.rcParams["axes.grid"] = True
plt.rcParams["figure.autolayout"] = True
plt.rcParams["font.size"] = 10.0
plt.rcParams["legend.fontsize"] = "small"

MARKERS = {"baseline": "o", "pruning+": "s", "pruning-": "^"}


def _swept_key(rows: Sequence[BenchRow]) -> str:
    for key in ("count", "length", "clusters", "sigma"):
        if len({getattr(r, key) for r in rows}) > 1:
            return key
    return "count"


def _series(rows, key, metric):
    out = defaultdict(list)
    for r in rows:
        out[r.engine].append((getattr(r, key), getattr(r, metric)))
    return {e: sorted(v) for e, v in out.items()}


def plot_metric(rows: Sequence[BenchRow], metric: str, path: Path, log_y: bool = True) -> Path:
    key = _swept_key(rows)
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    for engine, pts in sorted(_series(rows, key, metric).items()):
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker=MARKERS.get(engine, "x"), label=engine)
    ax.set_xlabel({"count": "number of strings", "length": "string length",
                   "clusters": "clusters", "sigma": "variation ratio"}[key])
    ax.set_ylabel(metric.replace("_", " "))
    if log_y and all(y > 0 for r in rows for y in [getattr(r, metric)]):
        ax.set_yscale("log")
    ax.legend()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_refine_histogram(rows: Sequence[BenchRow], path: Path, engine: str = "pruning+") -> Path | None:
    total = Counter()
    for r in rows:
        if r.engine == engine:
            total.update(r.histogram)
    if not total:
        return None
    ks = sorted(total)
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.bar([str(k) for k in ks], [total[k] for k in ks], color="0.4")
    ax.set_xlabel("refinements before a merge")
    ax.set_ylabel("merges")
    ax.set_title(engine)
    fig.savefig(path)
    plt.close(fig)
    return path


def render_figures(rows: Sequence[BenchRow], out_dir: Path, fmt: str = "png") -> list[Path]:
    """Merge counts, wall time and the refinement histogram."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [
        plot_metric(rows, "dp_merges", out_dir / f"dp_merges.{fmt}"),
        plot_metric(rows, "wall_time", out_dir / f"wall_time.{fmt}"),
    ]
    if any(r.refine_calls for r in rows):
        paths.append(plot_metric(rows, "refine_calls", out_dir / f"refine_calls.{fmt}"))
    hist = plot_refine_histogram(rows, out_dir / f"refine_histogram.{fmt}")
    if hist is not None:
        paths.append(hist)
    return paths


__all__ = ["render_figures", "plot_metric", "plot_refine_histogram", "SWEEP_KEYS"]
