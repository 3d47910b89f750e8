"""Interval bookkeeping for pruned pairwise merging.

Every live pair of paradigms carries a bracket ``[lb, ub]`` on the size of
their merge.  Brackets are tightened by exact evaluations, by triangle
inequalities through a pivot paradigm, and when a merge is committed.  The
table stores brackets in dense symmetric matrices indexed by slot, so that
bulk updates stay vectorized; the public API is keyed by paradigm id.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional

import numpy as np

log = logging.getLogger(__name__)

INF = math.inf
TOL = 1e-9


class BoundViolation(AssertionError):
    """An interval failed to bracket a size or moved the wrong way."""


def pair_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class BoundInterval:
    lb: float = 0.0
    ub: float = INF
    exact: bool = False

    @property
    def width(self) -> float:
        return self.ub - self.lb


class IntervalTable:
    """Unordered pair -> :class:`BoundInterval` over live paradigm ids.

    With ``strict=True`` any update that would loosen an interval, or an
    exact size falling outside its bracket, raises :class:`BoundViolation`;
    otherwise it is logged and counted in ``violations``.
    """

    def __init__(self, ids: Iterable[int] = (), capacity: int = 0, strict: bool = False):
        ids = list(ids)
        cap = max(capacity, len(ids), 2)
        self.lb = np.zeros((cap, cap))
        self.ub = np.full((cap, cap), INF)
        self.present = np.zeros((cap, cap), dtype=bool)
        self.slot_ids = np.full(cap, -1, dtype=np.int64)
        self._slot: dict[int, int] = {}
        self._free = list(range(cap - 1, -1, -1))
        self.strict = strict
        self.violations = 0
        for pid in ids:
            self.add_paradigm(pid)

    # -- membership ---------------------------------------------------------
    def add_paradigm(self, pid: int) -> int:
        if pid in self._slot:
            raise ValueError(f"paradigm {pid} already in table")
        if not self._free:
            self._grow()
        s = self._free.pop()
        self._slot[pid] = s
        self.slot_ids[s] = pid
        return s

    def remove_paradigm(self, pid: int) -> None:
        s = self._slot.pop(pid)
        self.slot_ids[s] = -1
        self.present[s, :] = self.present[:, s] = False
        self.lb[s, :] = self.lb[:, s] = 0.0
        self.ub[s, :] = self.ub[:, s] = INF
        self._free.append(s)

    def _grow(self):
        old = self.lb.shape[0]
        new = old * 2
        for name, fill in (("lb", 0.0), ("ub", INF), ("present", False)):
            arr = getattr(self, name)
            grown = np.full((new, new), fill, dtype=arr.dtype)
            grown[:old, :old] = arr
            setattr(self, name, grown)
        ids = np.full(new, -1, dtype=np.int64)
        ids[:old] = self.slot_ids
        self.slot_ids = ids
        self._free.extend(range(new - 1, old - 1, -1))

    def slot(self, pid: int) -> int:
        return self._slot[pid]

    @property
    def paradigms(self) -> list[int]:
        return sorted(self._slot)

    def live_slots(self) -> np.ndarray:
        return np.flatnonzero(self.slot_ids >= 0)

    # -- mapping protocol ---------------------------------------------------
    def __len__(self) -> int:
        return int(np.count_nonzero(self.present)) // 2

    def __contains__(self, key) -> bool:
        a, b = key
        try:
            return bool(self.present[self._slot[a], self._slot[b]])
        except KeyError:
            return False

    def __getitem__(self, key) -> BoundInterval:
        a, b = key
        i, j = self._slot[a], self._slot[b]
        if not self.present[i, j]:
            raise KeyError(key)
        lb, ub = float(self.lb[i, j]), float(self.ub[i, j])
        return BoundInterval(lb, ub, lb == ub)

    def keys(self) -> Iterator[tuple[int, int]]:
        for i, j in np.argwhere(np.triu(self.present, 1)):
            yield pair_key(int(self.slot_ids[i]), int(self.slot_ids[j]))

    def items(self):
        for k in self.keys():
            yield k, self[k]

    def as_dict(self) -> dict:
        return dict(self.items())

    # -- updates ------------------------------------------------------------
    def _problem(self, msg: str):
        self.violations += 1
        if self.strict:
            raise BoundViolation(msg)
        log.warning(msg)

    def set(self, a: int, b: int, lb: float = 0.0, ub: float = INF) -> None:
        """Start a fresh interval, discarding any previous one."""
        if lb > ub:
            raise ValueError(f"lb {lb} > ub {ub}")
        i, j = self._slot[a], self._slot[b]
        self.lb[i, j] = self.lb[j, i] = lb
        self.ub[i, j] = self.ub[j, i] = ub
        self.present[i, j] = self.present[j, i] = True

    def tighten(self, a: int, b: int, lb: float = 0.0, ub: float = INF) -> BoundInterval:
        i, j = self._slot[a], self._slot[b]
        self._tighten_block(np.array([i]), np.array([j]), np.array([[lb]]), np.array([[ub]]))
        return self[a, b]

    def collapse(self, a: int, b: int, size: float) -> None:
        """Record the exact size of a pair."""
        i, j = self._slot[a], self._slot[b]
        if not self.present[i, j]:
            raise KeyError((a, b))
        lo, hi = self.lb[i, j], self.ub[i, j]
        if size < lo - TOL or size > hi + TOL:
            self._problem(f"exact size {size} of {pair_key(a, b)} outside [{lo}, {hi}]")
        self.lb[i, j] = self.lb[j, i] = size
        self.ub[i, j] = self.ub[j, i] = size

    def _tighten_block(self, rows, cols, lb_new, ub_new) -> None:
        """Intersect intervals on ``rows x cols`` (present pairs only)."""
        ix = np.ix_(rows, cols)
        mask = self.present[ix]
        lb_old, ub_old = self.lb[ix], self.ub[ix]
        lb = np.where(mask, np.maximum(lb_old, lb_new), lb_old)
        ub = np.where(mask, np.minimum(ub_old, ub_new), ub_old)
        crossed = lb > ub
        if crossed.any():
            gap = float((lb - ub)[crossed].max())
            if gap > TOL:
                self._problem(f"bounds crossed by {gap} while tightening")
            lb = np.where(crossed, ub, lb)
        self.lb[ix] = lb
        self.ub[ix] = ub
        self.lb[np.ix_(cols, rows)] = lb.T
        self.ub[np.ix_(cols, rows)] = ub.T


def init_intervals(paradigms: Iterable[int], strict: bool = False) -> IntervalTable:
    """Every pair of ``paradigms`` mapped to ``[0, inf]``."""
    ids = list(paradigms)
    table = IntervalTable(ids, strict=strict)
    s = table.live_slots()
    if s.size >= 2:
        table.present[np.ix_(s, s)] = True
        table.present[s, s] = False
    return table


@dataclass(frozen=True)
class CriticalSet:
    intervals: frozenset
    involved_paradigms: frozenset
    ub_min: float
    ub_min_pair: tuple[int, int]

    def __len__(self):
        return len(self.intervals)


def identify_critical(table: IntervalTable, independency: bool = True) -> CriticalSet:
    """Intervals that may still hold the smallest merge size.

    ``ub_min`` is taken over every live interval.  An interval is critical
    when its lower bound is below ``ub_min``, or equals it while the
    interval is still open; an interval already pinned at ``ub_min`` can at
    best tie the minimal one and is left out.  With ``independency`` only
    intervals sharing a paradigm with the minimal one are kept.
    """
    present = np.triu(table.present, 1)
    if not present.any():
        raise ValueError("interval table is empty")
    ub = table.ub
    lb = table.lb
    ub_min = float(ub[present].min())
    ties = np.argwhere(present & (ub == ub_min))
    ids = table.slot_ids
    um = min(pair_key(int(ids[i]), int(ids[j])) for i, j in ties)
    crit = table.present & ((lb < ub_min) | ((lb == ub_min) & (lb < ub)))
    if independency:
        sa, sb = table.slot(um[0]), table.slot(um[1])
        rows = np.array([sa, sb])
        hits = [(rows[r], c) for r, c in np.argwhere(crit[rows])]
    else:
        hits = np.argwhere(np.triu(crit, 1))
    keys = {pair_key(int(ids[i]), int(ids[j])) for i, j in hits}
    keys.add(um)
    involved = frozenset(p for k in keys for p in k)
    return CriticalSet(frozenset(keys), involved, ub_min, um)


def pivot_scores(cr: CriticalSet, table: IntervalTable) -> dict[int, float]:
    """Summed open width of the critical intervals touching each paradigm."""
    scores = dict.fromkeys(cr.involved_paradigms, 0.0)
    for a, b in cr.intervals:
        iv = table[a, b]
        w = iv.width
        scores[a] += w
        scores[b] += w
    return scores


def pivot_score(p: int, cr: CriticalSet, table: IntervalTable) -> float:
    if p not in cr.involved_paradigms:
        raise ValueError(f"paradigm {p} is not involved in the critical set")
    return pivot_scores(cr, table)[p]


def select_pivot(cr: CriticalSet, table: IntervalTable) -> int:
    """Highest score wins; ties go to the smallest id."""
    if not cr.intervals:
        raise ValueError("empty critical set")
    scores = pivot_scores(cr, table)
    return min(scores, key=lambda p: (-scores[p], p))


def refine(
    cr: CriticalSet,
    pivot: int,
    table: IntervalTable,
    merge_fn: Callable[[int, int], float],
) -> int:
    """Single-pivot-star refinement; returns the number of ``merge_fn`` calls.

    Sizes from ``pivot`` to every other involved paradigm are made exact
    (pairs already pinned are reused), then every other involved pair is
    intersected with ``[|s1 - s2|, s1 + s2]``.
    """
    if pivot not in cr.involved_paradigms:
        raise ValueError(f"pivot {pivot} is not involved in the critical set")
    others = sorted(cr.involved_paradigms - {pivot})
    sizes = np.empty(len(others))
    merges = 0
    for k, p in enumerate(others):
        iv = table[pivot, p]
        if iv.exact:
            sizes[k] = iv.lb
        else:
            s = merge_fn(pivot, p)
            merges += 1
            table.collapse(pivot, p, s)
            sizes[k] = s
    if len(others) >= 2:
        slots = np.array([table.slot(p) for p in others])
        lo = np.abs(sizes[:, None] - sizes[None, :])
        hi = sizes[:, None] + sizes[None, :]
        table._tighten_block(slots, slots, lo, hi)
    return merges


def on_merge_commit(
    table: IntervalTable,
    new: int,
    p1: int,
    p2: int,
    s12: float,
    use_bounds: bool = True,
) -> None:
    """Retire ``p1`` and ``p2`` and open intervals for their merge ``new``.

    With ``use_bounds`` the new intervals start from
    ``[max(s12, lb13, lb23), min(ub13, ub23) + s12]``; otherwise they start
    at ``[0, inf]``.
    """
    s1, s2 = table.slot(p1), table.slot(p2)
    live = table.live_slots()
    others = live[(live != s1) & (live != s2)]
    if use_bounds:
        l1 = np.where(table.present[s1, others], table.lb[s1, others], 0.0)
        l2 = np.where(table.present[s2, others], table.lb[s2, others], 0.0)
        u1 = np.where(table.present[s1, others], table.ub[s1, others], INF)
        u2 = np.where(table.present[s2, others], table.ub[s2, others], INF)
        lb = np.maximum(np.maximum(l1, l2), s12)
        ub = np.minimum(u1, u2) + s12
        crossed = lb > ub
        if crossed.any():
            gap = float((lb - ub)[crossed].max())
            if gap > TOL:
                table._problem(f"commit bounds crossed by {gap}")
            lb = np.where(crossed, ub, lb)
    else:
        lb = np.zeros(others.size)
        ub = np.full(others.size, INF)
    table.remove_paradigm(p1)
    table.remove_paradigm(p2)
    s = table.add_paradigm(new)
    table.lb[s, others] = table.lb[others, s] = lb
    table.ub[s, others] = table.ub[others, s] = ub
    table.present[s, others] = table.present[others, s] = True
