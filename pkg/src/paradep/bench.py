"""Engine comparison on synthetic corpora."""

from __future__ import annotations

import csv
import dataclasses
import io
import itertools
import json
import logging
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .charspace import DistanceTable, default_distance_table
from .engine import run_engine
from .synth import GenConfig, generate

log = logging.getLogger(__name__)

SWEEP_KEYS = ("length", "count", "clusters", "sigma")


@dataclass
class BenchRow:
    length: int
    count: int
    clusters: int
    sigma: float
    seed: int
    engine: str
    dp_merges: int
    refine_calls: int
    commits: int
    wall_time: float
    root_size: float
    histogram: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def sweep(base: GenConfig, **values: Sequence) -> list[GenConfig]:
    """Cartesian product of the given parameter lists over ``base``."""
    keys = [k for k in SWEEP_KEYS if values.get(k)]
    if not keys:
        return [base]
    return [dataclasses.replace(base, **dict(zip(keys, combo)))
            for combo in itertools.product(*(values[k] for k in keys))]


def run_bench(configs: Iterable[GenConfig], engines: Sequence[str],
              table: DistanceTable | None = None) -> list[BenchRow]:
    if table is None:
        table = default_distance_table()
    rows = []
    for cfg in configs:
        strings = generate(cfg).strings
        for name in engines:
            run = run_engine(name, strings, table)
            m = run.metrics
            rows.append(BenchRow(
                cfg.length, cfg.count, cfg.clusters, cfg.sigma, cfg.seed, m.engine,
                m.dp_merges, m.refine_calls, m.commits, m.wall_time,
                run.tree.nodes[run.tree.root].size,
                {int(k): v for k, v in sorted(m.refine_iterations_histogram.items())},
            ))
            log.info("%s N=%d l=%d CN=%d sigma=%g: %d merges in %.2fs",
                     m.engine, cfg.count, cfg.length, cfg.clusters, cfg.sigma, m.dp_merges, m.wall_time)
    return rows


def check_ordering(rows: Iterable[BenchRow]) -> list[str]:
    """Warn when pruning+ <= pruning- <= baseline fails on one config."""
    problems = []
    by_cfg: dict = {}
    for r in rows:
        by_cfg.setdefault((r.length, r.count, r.clusters, r.sigma, r.seed), {})[r.engine] = r.dp_merges
    for cfg, merges in by_cfg.items():
        chain = [e for e in ("pruning+", "pruning-", "baseline") if e in merges]
        for lo, hi in zip(chain, chain[1:]):
            if merges[lo] > merges[hi]:
                msg = f"config {cfg}: {lo} used {merges[lo]} merges, more than {hi} ({merges[hi]})"
                problems.append(msg)
                warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return problems


COLUMNS = ("length", "count", "clusters", "sigma", "seed", "engine",
           "dp_merges", "refine_calls", "commits", "wall_time", "root_size")


def format_table(rows: Sequence[BenchRow]) -> str:
    """Fixed-width text table."""
    header = COLUMNS + ("histogram",)
    cells = [header]
    for r in rows:
        d = r.as_dict()
        cells.append(tuple(
            f"{d[c]:.3f}" if c == "wall_time" else str(d[c]) for c in COLUMNS
        ) + (",".join(f"{k}:{v}" for k, v in r.histogram.items()),))
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells) + "\n"


def to_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS + ("histogram",))
    for r in rows:
        d = r.as_dict()
        w.writerow([d[c] for c in COLUMNS] + [json.dumps(r.histogram, sort_keys=True)])
    return buf.getvalue()


def to_jsonl(rows: Sequence[BenchRow]) -> str:
    return "".join(json.dumps(r.as_dict(), sort_keys=True) + "\n" for r in rows)
