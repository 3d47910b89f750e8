"""Merge schedulers and the merge tree they build.

Three schedulers are provided:

* :func:`single_merge` grows one paradigm a string at a time.
* :func:`pairwise_merge_baseline` merges the globally cheapest pair at every
  step, evaluating each live pair exactly once.
* :func:`pruning_merge` keeps size intervals for all live pairs and only
  evaluates pairs that may still be the cheapest.
"""

from __future__ import annotations

import heapq
import json
import time
from collections import Counter, OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

import numpy as np

from . import bounds
from .charspace import DistanceTable
from .paradigm import Paradigm, align_size, combine, compact, dumps_row, from_string, loads_row, from_rows

Observer = Callable[[str, "bounds.IntervalTable", dict], None]


@dataclass
class RunMetrics:
    engine: str = ""
    strings: int = 0
    dp_merges: int = 0
    commits: int = 0
    refine_calls: int = 0
    refine_iterations_histogram: Counter = field(default_factory=Counter)
    intervals_pruned: int = 0
    safety_valve: int = 0
    bound_violations: int = 0
    wall_time: float = 0.0

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in (
            "engine", "strings", "dp_merges", "commits", "refine_calls",
            "intervals_pruned", "safety_valve", "bound_violations")}
        d["wall_time"] = round(self.wall_time, 6)
        d["refine_iterations_histogram"] = {int(k): v for k, v in sorted(self.refine_iterations_histogram.items())}
        return d

    def to_text(self) -> str:
        lines = []
        for k, v in self.as_dict().items():
            if isinstance(v, dict):
                v = ",".join(f"{a}:{b}" for a, b in v.items())
            lines.append(f"{k}={v}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


class CommitRecord(NamedTuple):
    new: int
    left: int
    right: int
    size: float
    refine_iterations: int = 0


@dataclass
class TreeNode:
    id: int
    size: float
    card: int
    length: int
    left: Optional[int] = None
    right: Optional[int] = None
    ops: Optional[np.ndarray] = None
    string: Optional[str] = None
    row_id: Optional[str] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


class MergeTree:
    """Binary tree of every paradigm produced by a pairwise run.

    Leaves keep their string; internal nodes keep only the alignment steps
    joining their children.  :meth:`paradigm` rebuilds any node's rows on
    demand and keeps the most recent ``cache_size`` of them.
    """

    def __init__(self, table: DistanceTable, cache_size: int = 256):
        self.table = table
        self.nodes: dict[int, TreeNode] = {}
        self.leaves: list[int] = []
        self.root: Optional[int] = None
        self.cache_size = cache_size
        self._cache: OrderedDict = OrderedDict()

    def add_leaf(self, p: Paradigm, nid: int) -> None:
        self.nodes[nid] = TreeNode(nid, p.size, p.cardinality, p.length,
                                   string=p.strings()[0], row_id=p.ids[0])
        self.leaves.append(nid)
        self._remember(nid, p)
        self.root = nid

    def add_internal(self, nid: int, left: int, right: int, ops: np.ndarray, p: Paradigm) -> None:
        self.nodes[nid] = TreeNode(nid, p.size, p.cardinality, p.length, left, right, np.asarray(ops, dtype=np.int8))
        self._remember(nid, p)
        self.root = nid

    def _remember(self, nid, p):
        self._cache[nid] = p
        self._cache.move_to_end(nid)
        while len(self._cache) > self.cache_size:
            self._cache.popitem(last=False)

    def __len__(self):
        return len(self.nodes)

    def internal_nodes(self) -> list[int]:
        return [n for n, node in self.nodes.items() if not node.is_leaf]

    def children(self, nid: int) -> tuple[Optional[int], Optional[int]]:
        n = self.nodes[nid]
        return n.left, n.right

    def postorder(self, start: Optional[int] = None) -> list[int]:
        out = []
        stack = [(self.root if start is None else start, False)]
        while stack:
            nid, done = stack.pop()
            node = self.nodes[nid]
            if done or node.is_leaf:
                out.append(nid)
                continue
            stack.append((nid, True))
            stack.append((node.right, False))
            stack.append((node.left, False))
        return out

    def paradigm(self, nid: int) -> Paradigm:
        if nid in self._cache:
            self._cache.move_to_end(nid)
            return self._cache[nid]
        built: dict[int, Paradigm] = {}
        for k in self.postorder(nid):
            if k in self._cache:
                built[k] = self._cache[k]
                continue
            node = self.nodes[k]
            if node.is_leaf:
                built[k] = from_string(node.string, self.table, node.row_id)
            else:
                built[k] = combine(built.pop(node.left), built.pop(node.right), node.ops)
        p = built[nid]
        self._remember(nid, p)
        return p

    # -- line-oriented dump ---------------------------------------------------
    def dumps(self, rows: bool = True) -> str:
        """Every node as a header line followed by its rows (gaps as ``_``)."""
        out = []
        for nid in self.postorder():
            node = self.nodes[nid]
            p = self.paradigm(nid)
            kids = "-" if node.is_leaf else f"{node.left},{node.right}"
            out.append(f"@node {nid} children={kids} card={node.card} length={node.length} "
                       f"size={node.size!r} pattern={compact(p).rendering}")
            if rows:
                # a leading backslash keeps row text from reading as a header
                out.extend("\\" + t if t.startswith("@") else t for t in (dumps_row(r) for _, r in p.rows))
        out.append(f"@root {self.root}")
        return "\n".join(out) + "\n"

    @classmethod
    def loads(cls, text: str, table: DistanceTable) -> "MergeTree":
        """Inverse of :meth:`dumps` (requires the row dump)."""
        tree = cls(table)
        blocks: list[tuple[dict, list]] = []
        for line in text.splitlines():
            if line.startswith("@node "):
                head, _, _ = line.partition(" pattern=")
                fields = head.split()
                meta = dict(f.split("=", 1) for f in fields[2:])
                meta["id"] = int(fields[1])
                blocks.append((meta, []))
            elif line.startswith("@root "):
                tree.root = int(line.split()[1])
            elif line and blocks:
                blocks[-1][1].append(loads_row(line))
        for meta, rows in blocks:
            nid = meta["id"]
            ids = ["".join(g for g in r if g is not None) for r in rows]
            p = from_rows(list(zip(ids, rows)), table)
            if meta["children"] == "-":
                tree.nodes[nid] = TreeNode(nid, p.size, p.cardinality, p.length, string=ids[0], row_id=ids[0])
                tree.leaves.append(nid)
            else:
                left, right = (int(x) for x in meta["children"].split(","))
                tree.nodes[nid] = TreeNode(nid, p.size, p.cardinality, p.length, left, right,
                                           _ops_from_rows(tree, left, right, rows, table))
            tree._remember(nid, p)
        return tree


def _ops_from_rows(tree, left, right, rows, table) -> np.ndarray:
    n_left = tree.nodes[left].card
    lrows = np.array([[table.index(g) for g in r] for r in rows[:n_left]])
    rrows = np.array([[table.index(g) for g in r] for r in rows[n_left:]])
    lgap = (lrows == 0).all(axis=0)
    rgap = (rrows == 0).all(axis=0)
    return np.where(lgap, 1, np.where(rgap, 2, 0)).astype(np.int8)


class Run(NamedTuple):
    tree: MergeTree
    metrics: RunMetrics
    trace: list


class _Workspace:
    """Live paradigms plus the pair-size cache shared by the schedulers."""

    def __init__(self, strings: Sequence[str], table: DistanceTable, engine: str,
                 ids: Optional[Sequence[str]] = None, cache_size: int = 256):
        if len(strings) < 2:
            raise ValueError(f"need ≥2 strings, got {len(strings)}")
        ids = list(strings) if ids is None else list(ids)
        self.table = table
        self.metrics = RunMetrics(engine=engine, strings=len(strings))
        self.tree = MergeTree(table, cache_size=max(cache_size, 2))
        self.live: dict[int, Paradigm] = {}
        self.cache: dict[tuple[int, int], tuple] = {}
        self._by_id: dict[int, set] = {}
        self.trace: list[CommitRecord] = []
        for k, (s, rid) in enumerate(zip(strings, ids)):
            p = from_string(s, table, rid)
            self.live[k] = p
            self.tree.add_leaf(p, k)
        self.next_id = len(strings)

    def evaluate(self, a: int, b: int) -> float:
        key = bounds.pair_key(a, b)
        hit = self.cache.get(key)
        if hit is None:
            hit = align_size(self.live[key[0]], self.live[key[1]])
            self.metrics.dp_merges += 1
            self.cache[key] = hit
            self._by_id.setdefault(key[0], set()).add(key)
            self._by_id.setdefault(key[1], set()).add(key)
        return hit[0]

    def commit(self, a: int, b: int, refine_iterations: int = 0) -> tuple[int, float]:
        a, b = bounds.pair_key(a, b)
        self.evaluate(a, b)
        size, ops, steps = self.cache[(a, b)]
        p = combine(self.live[a], self.live[b], ops, steps)
        nid = self.next_id
        self.next_id += 1
        for old in (a, b):
            del self.live[old]
            for key in self._by_id.pop(old, ()):
                self.cache.pop(key, None)
        self.live[nid] = p
        self.tree.add_internal(nid, a, b, ops, p)
        self.metrics.commits += 1
        self.trace.append(CommitRecord(nid, a, b, size, refine_iterations))
        return nid, size

    def finish(self, started: float) -> Run:
        self.metrics.wall_time = time.perf_counter() - started
        return Run(self.tree, self.metrics, self.trace)


def single_merge(strings: Sequence[str], table: DistanceTable) -> tuple[Paradigm, RunMetrics]:
    """Seed with the cheapest pair, then absorb the cheapest string each step."""
    run = single_merge_run(strings, table)
    return run.tree.paradigm(run.tree.root), run.metrics


def single_merge_run(strings: Sequence[str], table: DistanceTable,
                     ids: Optional[Sequence[str]] = None, cache_size: int = 256) -> Run:
    """:func:`single_merge` keeping its (caterpillar-shaped) merge tree."""
    started = time.perf_counter()
    ws = _Workspace(strings, table, "single", ids, cache_size)
    n = len(strings)
    seed = min(((ws.evaluate(a, b), a, b) for a in range(n) for b in range(a + 1, n)))
    cur, _ = ws.commit(seed[1], seed[2])
    rest = [k for k in range(n) if k not in (seed[1], seed[2])]
    while rest:
        best = min((ws.evaluate(cur, s), s) for s in rest)
        rest.remove(best[1])
        cur, _ = ws.commit(cur, best[1])
    return ws.finish(started)


def pairwise_merge_baseline(strings: Sequence[str], table: DistanceTable,
                            ids: Optional[Sequence[str]] = None, cache_size: int = 256) -> Run:
    """Greedy agglomeration on exact sizes; (N-1)^2 DP evaluations in total."""
    started = time.perf_counter()
    ws = _Workspace(strings, table, "baseline", ids, cache_size)
    heap = []
    live = list(ws.live)
    for i, a in enumerate(live):
        for b in live[i + 1:]:
            heap.append((ws.evaluate(a, b), a, b))
    heapq.heapify(heap)
    while len(ws.live) > 1:
        size, a, b = heapq.heappop(heap)
        if a not in ws.live or b not in ws.live:
            continue
        nid, _ = ws.commit(a, b)
        for other in ws.live:
            if other != nid:
                key = bounds.pair_key(nid, other)
                heapq.heappush(heap, (ws.evaluate(*key), *key))
    return ws.finish(started)


def pruning_merge(
    strings: Sequence[str],
    table: DistanceTable,
    use_commit_bounds: bool = True,
    independency: bool = True,
    ids: Optional[Sequence[str]] = None,
    observer: Optional[Observer] = None,
    strict: bool = False,
    cache_size: int = 256,
) -> Run:
    """Interval-pruned pairwise merging.

    ``use_commit_bounds=True`` is Pruning+, which seeds the intervals of a
    freshly merged paradigm from its parents; ``False`` is Pruning-, which
    restarts them at ``[0, inf]``.  ``observer(event, table, live)`` is
    called after every refinement and every commit.
    """
    started = time.perf_counter()
    ws = _Workspace(strings, table, "pruning+" if use_commit_bounds else "pruning-", ids, cache_size)
    m = ws.metrics
    intervals = bounds.init_intervals(ws.live, strict=strict)
    notify = observer or (lambda *a: None)

    while len(ws.live) > 1:
        iterations = 0
        cr = bounds.identify_critical(intervals, independency)
        while len(cr) > 1:
            pivot = bounds.select_pivot(cr, intervals)
            done = bounds.refine(cr, pivot, intervals, ws.evaluate)
            m.refine_calls += 1
            iterations += 1
            if done == 0:
                m.safety_valve += 1
                for a, b in sorted(cr.intervals):
                    if not intervals[a, b].exact:
                        intervals.collapse(a, b, ws.evaluate(a, b))
                        done += 1
                if done == 0:
                    raise RuntimeError("refinement made no progress on a fully exact critical set")
            notify("refine", intervals, ws.live)
            cr = bounds.identify_critical(intervals, independency)
        m.intervals_pruned += len(intervals) - len(cr)
        a, b = cr.ub_min_pair
        nid, size = ws.commit(a, b, iterations)
        bounds.on_merge_commit(intervals, nid, a, b, size, use_commit_bounds)
        m.refine_iterations_histogram[iterations] += 1
        notify("commit", intervals, ws.live)

    m.bound_violations = intervals.violations
    return ws.finish(started)


ENGINES = {
    "single": lambda s, t, **kw: single_merge_run(s, t, **kw),
    "baseline": lambda s, t, **kw: pairwise_merge_baseline(s, t, **kw),
    "pruning+": lambda s, t, **kw: pruning_merge(s, t, use_commit_bounds=True, **kw),
    "pruning-": lambda s, t, **kw: pruning_merge(s, t, use_commit_bounds=False, **kw),
}


def run_engine(name: str, strings: Sequence[str], table: DistanceTable, **kw) -> Run:
    name = name.replace("−", "-")
    if name not in ENGINES:
        raise ValueError(f"unknown engine {name!r}; choose from {sorted(ENGINES)}")
    return ENGINES[name](strings, table, **kw)


def shadow_sizes(tree_or_live) -> Callable[[int, int], float]:
    """Exact pair sizes by id, cached; accepts a tree or a live-paradigm dict."""
    cache: dict = {}

    def get(nid):
        if isinstance(tree_or_live, MergeTree):
            return tree_or_live.paradigm(nid)
        return tree_or_live[nid]

    def size(a: int, b: int) -> float:
        key = bounds.pair_key(a, b)
        if key not in cache:
            cache[key] = align_size(get(key[0]), get(key[1]))[0]
        return cache[key]

    return size


def verify_local_minimality(trace: Iterable, leaves: Iterable[int],
                            sizes: Callable[[int, int], float], tol: float = 1e-9) -> bool:
    """Replay commits; each must be no worse than any pair sharing a member.

    ``trace`` items need ``new``, ``left`` and ``right`` attributes (or be
    ``(new, left, right)`` tuples); ``sizes(a, b)`` returns exact sizes.
    """
    live = set(leaves)
    for rec in trace:
        new, a, b = (rec.new, rec.left, rec.right) if hasattr(rec, "new") else tuple(rec)[:3]
        if a not in live or b not in live:
            return False
        s = sizes(a, b)
        for p in live - {a, b}:
            if s > sizes(a, p) + tol or s > sizes(b, p) + tol:
                return False
        live -= {a, b}
        live.add(new)
    return True
