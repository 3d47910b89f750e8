"""Paradigms: equal-length gapped string sets, their merge and compaction."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from . import _kernels
from .charspace import NULL, DistanceTable, Glyph, GlyphSet

DIAG, GAP_LEFT, GAP_RIGHT = _kernels.DIAG, _kernels.GAP_LEFT, _kernels.GAP_RIGHT


def _pad_columns(sets: Sequence[Iterable[int]]) -> np.ndarray:
    sets = [sorted(s) for s in sets]
    width = max((len(s) for s in sets), default=1)
    out = np.full((len(sets), width), -1, dtype=np.int16)
    for i, s in enumerate(sets):
        out[i, :len(s)] = s
    return out


class Paradigm:
    """A set of equal-length rows over a :class:`DistanceTable`.

    ``codes`` is the ``card x length`` matrix of glyph indices (0 = gap),
    ``col_glyphs`` the padded per-column index sets and ``col_diam`` their
    diameters.  Treat instances as immutable.
    """

    __slots__ = ("table", "ids", "codes", "col_glyphs", "col_diam", "size")

    def __init__(self, table, ids, codes, col_glyphs=None, col_diam=None):
        codes = np.asarray(codes, dtype=np.int16)
        if codes.ndim != 2 or codes.shape[0] != len(ids) or codes.shape[1] == 0:
            raise ValueError("paradigm needs at least one non-empty row per id")
        if (codes == 0).all(axis=1).any():
            raise ValueError("a paradigm row cannot consist only of gaps")
        if col_glyphs is None:
            col_glyphs = _pad_columns([np.unique(col) for col in codes.T])
        if col_diam is None:
            m = table.matrix
            col_diam = np.array([
                m[np.ix_(g[g >= 0], g[g >= 0])].max() for g in col_glyphs
            ])
        self.table = table
        self.ids = tuple(ids)
        self.codes = codes
        self.col_glyphs = col_glyphs
        self.col_diam = np.asarray(col_diam, dtype=np.float64)
        # sequential sum, matching the DP's accumulation order
        self.size = float(sum(self.col_diam.tolist()))

    @property
    def length(self) -> int:
        return self.codes.shape[1]

    @property
    def cardinality(self) -> int:
        return self.codes.shape[0]

    def __len__(self):
        return self.cardinality

    @property
    def columns(self) -> tuple[GlyphSet, ...]:
        g = self.table.glyph
        return tuple(
            GlyphSet(frozenset(g(int(i)) for i in col if i >= 0), float(d))
            for col, d in zip(self.col_glyphs, self.col_diam)
        )

    @property
    def rows(self) -> list[tuple[str, tuple[Glyph, ...]]]:
        return [(rid, self.table.decode(r)) for rid, r in zip(self.ids, self.codes)]

    def strings(self) -> list[str]:
        """Rows with gaps removed, i.e. the original strings."""
        cs = self.table.charset
        return ["".join(cs[i - 1] for i in r if i) for r in self.codes]

    def size_of(self) -> float:
        return self.size

    def __repr__(self):
        return f"Paradigm(card={self.cardinality}, length={self.length}, size={self.size:g}, {compact(self).rendering!r})"


def from_string(s: str, table: DistanceTable, id: Optional[str] = None) -> Paradigm:
    """One-row paradigm of size 0."""
    if not s:
        raise ValueError("cannot build a paradigm from an empty string")
    codes = table.encode(s)[None, :]
    return Paradigm(table, [s if id is None else id], codes,
                    col_glyphs=codes.T.copy(), col_diam=np.zeros(len(s)))


def from_rows(rows: Sequence[tuple[str, Sequence[Glyph]]], table: DistanceTable) -> Paradigm:
    """Paradigm from ``(id, glyphs)`` pairs of equal length; ``None`` is a gap."""
    if not rows:
        raise ValueError("no rows")
    lengths = {len(r) for _, r in rows}
    if len(lengths) != 1:
        raise ValueError(f"rows have different lengths {sorted(lengths)}")
    codes = np.array([[table.index(g) for g in r] for _, r in rows], dtype=np.int16)
    return Paradigm(table, [rid for rid, _ in rows], codes)


def size_of(p: Paradigm) -> float:
    return p.size


@dataclass(frozen=True)
class Alignment:
    """Where gaps were inserted when merging a left and a right paradigm.

    Positions are output column indices (0-based).
    """

    gap_positions_left: tuple[int, ...]
    gap_positions_right: tuple[int, ...]
    ops: tuple[int, ...]

    @classmethod
    def from_ops(cls, ops) -> "Alignment":
        ops = tuple(int(o) for o in ops)
        return cls(
            tuple(k for k, o in enumerate(ops) if o == GAP_LEFT),
            tuple(k for k, o in enumerate(ops) if o == GAP_RIGHT),
            ops,
        )

    @property
    def length(self) -> int:
        return len(self.ops)

    def column_maps(self) -> tuple[np.ndarray, np.ndarray]:
        """Source column per output column for each side, -1 for a gap."""
        return column_maps(np.asarray(self.ops, dtype=np.int8))


def column_maps(ops: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    takes_left = ops != GAP_LEFT
    takes_right = ops != GAP_RIGHT
    left = np.where(takes_left, np.cumsum(takes_left) - 1, -1)
    right = np.where(takes_right, np.cumsum(takes_right) - 1, -1)
    return left, right


class MergeResult(NamedTuple):
    paradigm: Paradigm
    alignment: Alignment
    size: float


def align_size(p1: Paradigm, p2: Paradigm) -> tuple[float, np.ndarray, np.ndarray]:
    """Run the DP only: ``(size, ops, per-column diameters)``."""
    return _kernels.align(p1.col_glyphs, p1.col_diam, p2.col_glyphs, p2.col_diam, p1.table.matrix)


def combine(p1: Paradigm, p2: Paradigm, ops: np.ndarray, step_costs: Optional[np.ndarray] = None) -> Paradigm:
    """Build ``p1 ⊎ p2`` from a precomputed step sequence."""
    ops = np.asarray(ops, dtype=np.int8)
    lmap, rmap = column_maps(ops)
    left = _expand(p1.codes, lmap)
    right = _expand(p2.codes, rmap)
    sets = []
    for lc, rc in zip(lmap, rmap):
        s = set()
        for col, glyphs in ((lc, p1.col_glyphs), (rc, p2.col_glyphs)):
            if col < 0:
                s.add(0)
            else:
                g = glyphs[col]
                s.update(g[g >= 0].tolist())
        sets.append(s)
    return Paradigm(p1.table, p1.ids + p2.ids, np.vstack([left, right]),
                    col_glyphs=_pad_columns(sets), col_diam=step_costs)


def _expand(codes: np.ndarray, colmap: np.ndarray) -> np.ndarray:
    padded = np.concatenate([codes, np.zeros((codes.shape[0], 1), dtype=codes.dtype)], axis=1)
    return padded[:, colmap]


def merge(p1: Paradigm, p2: Paradigm, table: Optional[DistanceTable] = None) -> MergeResult:
    """Optimal column-atomic merge of two paradigms.

    Only gaps are inserted; existing columns are never split.  Ties between
    equally cheap alignments prefer aligning columns, then a gap on the
    left paradigm, then a gap on the right one, decided at the earliest
    column first.

    >>> from .charspace import default_distance_table
    >>> t = default_distance_table()
    >>> merge(from_string("ab1c", t), from_string("ab9c", t)).size
    0.5
    """
    if table is not None and table is not p1.table:
        p1 = Paradigm(table, p1.ids, p1.codes)
        p2 = Paradigm(table, p2.ids, p2.codes)
    if p1.table is not p2.table:
        raise ValueError("paradigms use different distance tables")
    size, ops, steps = align_size(p1, p2)
    merged = combine(p1, p2, ops, steps)
    return MergeResult(merged, Alignment.from_ops(ops), merged.size)


# -- compaction -------------------------------------------------------------

@dataclass(frozen=True)
class CompactPattern:
    cells: tuple[tuple[frozenset, bool], ...]

    @property
    def rendering(self) -> str:
        return self.render()

    def render(self, marked: Optional[int] = None) -> str:
        """Text form; ``marked`` (0-based) wraps one cell in ``<...>``."""
        parts = []
        for k, (glyphs, optional) in enumerate(self.cells):
            text = render_cell(glyphs, optional)
            parts.append(f"<{text}>" if k == marked else text)
        return "".join(parts)

    def __str__(self):
        return self.render()


def _runs(chars: list[str]) -> str:
    out = []
    codes = sorted(ord(c) for c in chars)
    start = 0
    for k in range(1, len(codes) + 1):
        if k == len(codes) or codes[k] != codes[k - 1] + 1:
            run = codes[start:k]
            if len(run) >= 3:
                out.append(f"{chr(run[0])}-{chr(run[-1])}")
            else:
                out.extend(chr(c) for c in run)
            start = k
    return "".join(out)


def render_cell(glyphs: Iterable[Glyph], optional: bool) -> str:
    chars = [g for g in glyphs if g is not NULL]
    body = _runs(chars)
    if optional:
        return f"[{body}]"
    if len(chars) == 1:
        return body
    return "{" + body + "}"


def compact(p: Paradigm) -> CompactPattern:
    """Column-wise deduplication into a star-free pattern.

    >>> from .charspace import default_distance_table
    >>> compact(from_string("T560", default_distance_table())).rendering
    'T560'
    """
    return CompactPattern(tuple((c.members, c.has_null) for c in p.columns))


# -- line-oriented serialization -------------------------------------------

def _escape(g: Glyph) -> str:
    if g is NULL:
        return "_"
    if g in "_\\":
        return "\\" + g
    return g


def dumps_row(glyphs: Iterable[Glyph]) -> str:
    return "".join(_escape(g) for g in glyphs)


def loads_row(line: str) -> tuple[Glyph, ...]:
    out: list[Glyph] = []
    it = iter(line)
    for ch in it:
        if ch == "\\":
            try:
                out.append(next(it))
            except StopIteration:
                raise ValueError(f"dangling escape in {line!r}") from None
        elif ch == "_":
            out.append(NULL)
        else:
            out.append(ch)
    return tuple(out)


def dumps_paradigm(p: Paradigm) -> str:
    """One row per line, gaps as ``_``, literal ``_`` and ``\\`` escaped."""
    return "\n".join(dumps_row(r) for _, r in p.rows) + "\n"


def loads_paradigm(text: str, table: DistanceTable, ids: Optional[Sequence[str]] = None) -> Paradigm:
    rows = [loads_row(line) for line in text.splitlines() if line]
    if ids is None:
        ids = ["".join(g for g in r if g is not NULL) for r in rows]
    return from_rows(list(zip(ids, rows)), table)


# -- exact solver used as a test oracle ------------------------------------

class OracleRefused(ValueError):
    pass


def exact_sap_oracle(strings: Sequence[str], table: DistanceTable, max_total_length: int = 24) -> tuple[Paradigm, float]:
    """Globally optimal gap insertion for a handful of short strings.

    Dynamic programming over the lattice of prefix positions: every column
    advances a non-empty subset of the strings and gaps the rest, so all
    target lengths and gap placements are covered.  Exponential in the
    number of strings, hence the guard on total length.
    """
    total = sum(len(s) for s in strings)
    if total > max_total_length:
        raise OracleRefused(
            f"total length {total} exceeds max_total_length={max_total_length}; "
            "the exact problem is exponential, use a smaller instance"
        )
    if not strings or any(not s for s in strings):
        raise ValueError("need non-empty strings")
    seqs = [table.encode(s).tolist() for s in strings]
    k = len(seqs)
    lens = tuple(len(s) for s in seqs)
    m = table.matrix
    masks = range(1, 1 << k)
    full = (1 << k) - 1
    diam_cache: dict = {}

    def col_cost(glyphs):
        key = frozenset(glyphs)
        v = diam_cache.get(key)
        if v is None:
            idx = list(key)
            v = max((m[a, b] for a, b in itertools.combinations(idx, 2)), default=0.0)
            diam_cache[key] = v
        return v

    # best[state] = minimal cost to align all suffixes from this state
    best: dict = {lens: (0.0, None)}
    states = sorted(itertools.product(*(range(n + 1) for n in lens)), key=sum, reverse=True)
    for st in states:
        if st == lens:
            continue
        opt = None
        for mask in masks:
            if any((mask >> t) & 1 and st[t] >= lens[t] for t in range(k)):
                continue
            glyphs = [seqs[t][st[t]] for t in range(k) if (mask >> t) & 1]
            if mask != full:
                glyphs.append(0)
            nxt = tuple(st[t] + ((mask >> t) & 1) for t in range(k))
            c = col_cost(glyphs) + best[nxt][0]
            if opt is None or c < opt[0]:
                opt = (c, mask)
        best[st] = opt

    rows = [[] for _ in range(k)]
    st = tuple(0 for _ in range(k))
    while st != lens:
        mask = best[st][1]
        for t in range(k):
            rows[t].append(seqs[t][st[t]] if (mask >> t) & 1 else 0)
        st = tuple(st[t] + ((mask >> t) & 1) for t in range(k))
    p = Paradigm(table, list(strings), np.array(rows, dtype=np.int16))
    return p, p.size
