"""Paradigm dependency discovery over a merge tree.

A dependency ``(P, i) -> A`` says the glyph a string aligns to column ``i``
of paradigm ``P`` determines attribute ``A``.  Each tuple whose string sits
in ``P`` and whose ``A`` is not null claims the pair ``(glyph, value)``; all
four quality measures are computed from that multiset of claims.
"""

from __future__ import annotations

import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .charspace import NULL
from .engine import MergeTree
from .paradigm import CompactPattern, Paradigm, column_maps, compact

log = logging.getLogger(__name__)

Claim = tuple  # (glyph or None, value)


@dataclass(frozen=True)
class Record:
    id: str
    attributes: Mapping[str, Optional[Hashable]]


@dataclass(frozen=True)
class Thresholds:
    support_min: int = 10
    confidence_min: float = 0.9
    diversity_min: int = 5
    inner_support_min: int = 5

    def __post_init__(self):
        if min(self.support_min, self.diversity_min, self.inner_support_min) < 0:
            raise ValueError("thresholds must be non-negative")
        if not 0.0 <= self.confidence_min <= 1.0:
            raise ValueError("confidence_min must lie in [0, 1]")


@dataclass
class Dependency:
    node: int
    column: int  # 1-based
    attribute: str
    support: int
    confidence: float
    diversity: int
    inner_support: int
    pattern: Optional[CompactPattern] = None
    mapping: dict = field(default_factory=dict)

    def render(self) -> str:
        lhs = self.pattern.render(marked=self.column - 1) if self.pattern else f"node{self.node}[{self.column}]"
        return (f"{lhs} → {self.attribute}  support={self.support} confidence={self.confidence:.4f} "
                f"diversity={self.diversity} inner_support={self.inner_support}")

    def as_dict(self) -> dict:
        return {
            "node": self.node,
            "column": self.column,
            "attribute": self.attribute,
            "pattern": self.pattern.rendering if self.pattern else None,
            "marked": self.pattern.render(marked=self.column - 1) if self.pattern else None,
            "support": self.support,
            "confidence": self.confidence,
            "diversity": self.diversity,
            "inner_support": self.inner_support,
            "mapping": {("null" if k is NULL else k): v for k, v in self.mapping.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, ensure_ascii=False)


class UnmappedRow(KeyError):
    pass


# -- measures on an explicit claim multiset --------------------------------

def _per_key(claims: Iterable[Claim]) -> dict:
    groups: dict = defaultdict(Counter)
    for k, v in claims:
        groups[k][v] += 1
    return groups


def support(claims: Iterable[Claim]) -> int:
    """Largest number of claims consistent with one value per key."""
    return sum(max(c.values()) for c in _per_key(claims).values())


def confidence(claims: Sequence[Claim]) -> float:
    claims = list(claims)
    return support(claims) / len(claims) if claims else 0.0


def diversity(claims: Iterable[Claim]) -> int:
    return len({v for _, v in claims})


def inner_support(claims: Iterable[Claim]) -> int:
    """Largest per-key majority count."""
    return max((max(c.values()) for c in _per_key(claims).values()), default=0)


def majority_mapping(claims: Iterable[Claim]) -> dict:
    """Key -> most frequent value; ties pick the smallest value."""
    out = {}
    for k, c in _per_key(claims).items():
        top = max(c.values())
        out[k] = min(v for v, n in c.items() if n == top)
    return out


def _index_records(records: Iterable[Record]) -> dict:
    by_id: dict = defaultdict(list)
    for r in records:
        by_id[r.id].append(r)
    return by_id


def build_claims(p: Paradigm, column: int, attribute: str, records) -> list[Claim]:
    """Claims of ``records`` for ``(p, column) -> attribute``; ``column`` is 1-based."""
    if not 1 <= column <= p.length:
        raise ValueError(f"column {column} outside 1..{p.length}")
    by_id = records if isinstance(records, Mapping) else _index_records(records)
    out = []
    for rid, row in p.rows:
        if rid not in by_id:
            raise UnmappedRow(rid)
        for rec in by_id[rid]:
            v = rec.attributes.get(attribute)
            if v is not None:
                out.append((row[column - 1], v))
    return out


# -- discovery over a tree ---------------------------------------------------

@dataclass
class DiscoveryReport:
    dependencies: list
    nodes_evaluated: int = 0
    nodes_pruned: int = 0
    cells_evaluated: int = 0
    cells_skipped: int = 0
    findings: list = field(default_factory=list)  # skipped cells that would pass confidence


def discover(
    tree: MergeTree,
    records: Iterable[Record],
    thresholds: Thresholds = Thresholds(),
    attributes: Optional[Sequence[str]] = None,
    prune_children: bool = True,
    validate_prune: bool = False,
    include_null_keys: bool = True,
    confidence_scope: str = "paradigm",
) -> DiscoveryReport:
    """Evaluate every ``(node, column, attribute)`` cell of ``tree``.

    Nodes holding no more tuples than ``support_min`` are skipped.  With
    ``prune_children`` a cell is skipped when the columns it was merged
    from were both rejected for low confidence in the two child nodes;
    ``validate_prune`` evaluates those cells anyway and records any that
    would have passed as ``findings``.  ``confidence_scope`` is
    ``"paradigm"`` (claims of the node) or ``"dataset"`` (all tuples with a
    non-null value for the attribute).
    """
    if confidence_scope not in ("paradigm", "dataset"):
        raise ValueError("confidence_scope must be 'paradigm' or 'dataset'")
    by_id = _index_records(records)
    if attributes is None:
        attributes = sorted({a for rs in by_id.values() for r in rs for a in r.attributes})
    attributes = list(attributes)

    # value codes per attribute; -1 marks null
    vocab = []
    for a in attributes:
        vals = sorted({r.attributes.get(a) for rs in by_id.values() for r in rs} - {None}, key=repr)
        vocab.append(vals)
    lookup = [{v: k for k, v in enumerate(vals)} for vals in vocab]
    n_vals = max((len(v) for v in vocab), default=1) or 1
    n_glyphs = tree.table.size

    leaf_tuples = {}
    for nid in tree.leaves:
        rid = tree.nodes[nid].row_id
        if rid not in by_id:
            raise UnmappedRow(rid)
        recs = by_id[rid]
        leaf_tuples[nid] = np.array(
            [[lookup[j].get(r.attributes.get(a), -1) for j, a in enumerate(attributes)] for r in recs],
            dtype=np.int64,
        ).reshape(len(recs), len(attributes))
    dataset_claims = np.array([
        sum(int((t[:, j] >= 0).sum()) for t in leaf_tuples.values()) for j in range(len(attributes))
    ])

    report = DiscoveryReport([])
    codes: dict = {}      # node -> tuple-level key matrix (T x length)
    values: dict = {}     # node -> tuple-level value matrix (T x attributes)
    rejected: dict = {}   # node -> bool[attributes, length], True = low confidence

    for nid in tree.postorder():
        node = tree.nodes[nid]
        if node.is_leaf:
            p = tree.paradigm(nid)
            vals = leaf_tuples[nid]
            keys = np.repeat(p.codes, vals.shape[0], axis=0)
            lmap = rmap = None
        else:
            lmap, rmap = column_maps(node.ops)
            keys = np.vstack([_expand(codes.pop(node.left), lmap), _expand(codes.pop(node.right), rmap)])
            vals = np.vstack([values.pop(node.left), values.pop(node.right)])
        codes[nid], values[nid] = keys, vals
        left_rej = rejected.pop(node.left, None) if not node.is_leaf else None
        right_rej = rejected.pop(node.right, None) if not node.is_leaf else None

        if keys.shape[0] <= thresholds.support_min:
            report.nodes_pruned += 1
            continue
        report.nodes_evaluated += 1
        pattern = None
        status = np.zeros((len(attributes), node.length), dtype=bool)

        for j, attr in enumerate(attributes):
            skip = np.zeros(node.length, dtype=bool)
            if prune_children and left_rej is not None and right_rej is not None:
                ok = (lmap >= 0) & (rmap >= 0)
                skip[ok] = left_rej[j, lmap[ok]] & right_rej[j, rmap[ok]]
            cols = np.arange(node.length) if validate_prune else np.flatnonzero(~skip)
            report.cells_skipped += int(skip.sum())
            status[j, skip] = True
            if cols.size == 0:
                continue
            v = vals[:, j]
            live = v >= 0
            m = _measures(keys[live][:, cols], v[live], n_glyphs, n_vals, include_null_keys)
            sup, n_claims, div, inner = m
            denom = n_claims if confidence_scope == "paradigm" else np.full_like(n_claims, dataset_claims[j])
            conf = np.divide(sup, denom, out=np.zeros(len(cols)), where=denom > 0)
            low = conf < thresholds.confidence_min
            for k, col in enumerate(cols):
                if skip[col]:
                    if not low[k]:
                        finding = (nid, int(col) + 1, attr, float(conf[k]))
                        report.findings.append(finding)
                        log.warning("skipped cell node=%d column=%d attribute=%s has confidence %.4f",
                                    *finding)
                    continue
                report.cells_evaluated += 1
                status[j, col] = low[k]
                if (sup[k] >= thresholds.support_min and not low[k]
                        and div[k] >= thresholds.diversity_min and inner[k] >= thresholds.inner_support_min):
                    if pattern is None:
                        pattern = compact(tree.paradigm(nid))
                    claims = [(g, vocab[j][x]) for g, x in zip(keys[live][:, col].tolist(), v[live].tolist())]
                    if not include_null_keys:
                        claims = [c for c in claims if c[0] != 0]
                    mapping = {tree.table.glyph(g): val for g, val in sorted(majority_mapping(claims).items())}
                    report.dependencies.append(Dependency(
                        nid, int(col) + 1, attr, int(sup[k]), float(conf[k]), int(div[k]), int(inner[k]),
                        pattern, mapping,
                    ))
        rejected[nid] = status

    report.dependencies.sort(key=lambda d: (d.node, d.column, d.attribute))
    return report


def _expand(codes: np.ndarray, colmap: np.ndarray) -> np.ndarray:
    padded = np.concatenate([codes, np.zeros((codes.shape[0], 1), dtype=codes.dtype)], axis=1)
    return padded[:, colmap]


def _measures(keys: np.ndarray, vals: np.ndarray, n_glyphs: int, n_vals: int, include_null_keys: bool):
    """Per-column support, claim count, diversity and inner support."""
    n_cols = keys.shape[1]
    sup = np.zeros(n_cols, dtype=np.int64)
    count = np.zeros(n_cols, dtype=np.int64)
    div = np.zeros(n_cols, dtype=np.int64)
    inner = np.zeros(n_cols, dtype=np.int64)
    if keys.shape[0] == 0:
        return sup, count, div, inner
    col = np.broadcast_to(np.arange(n_cols), keys.shape).ravel()
    k = keys.astype(np.int64).ravel()
    v = np.broadcast_to(vals[:, None], keys.shape).ravel()
    if not include_null_keys:
        keep = k != 0
        col, k, v = col[keep], k[keep], v[keep]
    if col.size == 0:
        return sup, count, div, inner
    np.add.at(count, col, 1)
    cell, n = np.unique((col * n_glyphs + k) * n_vals + v, return_counts=True)
    group = cell // n_vals                      # (col, key)
    starts = np.flatnonzero(np.r_[True, group[1:] != group[:-1]])
    best = np.maximum.reduceat(n, starts)       # per-key majority count
    gcol = group[starts] // n_glyphs
    np.add.at(sup, gcol, best)
    np.maximum.at(inner, gcol, best)
    cv = np.unique(col * n_vals + v)
    np.add.at(div, cv // n_vals, 1)
    return sup, count, div, inner


def rank_for_output(deps: Iterable[Dependency]) -> list[Dependency]:
    """Support descending, then confidence descending, then position."""
    return sorted(deps, key=lambda d: (-d.support, -d.confidence, d.node, d.column, d.attribute))
