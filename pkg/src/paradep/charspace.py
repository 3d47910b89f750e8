"""Glyph alphabet, metric distance tables and glyph-set diameters.

Glyphs are single printable characters plus the gap value :data:`NULL`
(``None``).  Internally a :class:`DistanceTable` numbers its glyphs so the
gap sits at index 0 and charset characters occupy ``1..len(charset)``.
"""

from __future__ import annotations

import configparser
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Union

import numpy as np

NULL = None
Glyph = Optional[str]

PRINTABLE = "".join(chr(c) for c in range(32, 127))
SYNTHETIC = string.digits + string.ascii_lowercase + string.ascii_uppercase + "-_/"

_PRESETS = {"printable": PRINTABLE, "synthetic": SYNTHETIC}


class MetricError(ValueError):
    """Raised when a distance table is not a metric."""


def glyph_type(c: Glyph) -> str:
    if c is NULL:
        return "null"
    if c in string.digits:
        return "digit"
    if c.isalpha():
        return "letter"
    return "other"


class Violation(NamedTuple):
    """A failed metric axiom.

    For ``kind == "triangle"`` the inequality ``d(a, b) <= d(a, c) + d(c, b)``
    fails by ``slack``.  Symmetry and identity failures reuse the fields with
    ``c`` repeating one of the endpoints.
    """

    a: Glyph
    b: Glyph
    c: Glyph
    slack: float
    kind: str = "triangle"


@dataclass(frozen=True, eq=False)
class DistanceTable:
    """A distance matrix over ``charset`` plus the gap glyph.

    Build one with :func:`default_distance_table`, :meth:`from_matrix` or
    :func:`load_distance_config`.  Instances are treated as immutable.
    """

    charset: tuple[str, ...]
    matrix: np.ndarray
    gap_distance: float = 1.0
    same_type_distance: float = 0.5
    diff_type_distance: float = 1.5
    identical_distance: float = 0.0
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        if len(set(self.charset)) != len(self.charset):
            raise ValueError("charset contains duplicate characters")
        n = len(self.charset) + 1
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (n, n):
            raise ValueError(f"distance matrix must be {n}x{n}, got {m.shape}")
        if (m < 0).any() or not np.isfinite(m).all():
            raise ValueError("distances must be finite and non-negative")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_index", {c: i + 1 for i, c in enumerate(self.charset)})

    @classmethod
    def from_matrix(cls, charset: Iterable[str], matrix) -> "DistanceTable":
        """Wrap an explicit matrix; row/column 0 is the gap glyph."""
        return cls(tuple(charset), np.asarray(matrix, dtype=np.float64))

    @property
    def size(self) -> int:
        """Number of glyphs including the gap."""
        return len(self.charset) + 1

    def index(self, g: Glyph) -> int:
        if g is NULL:
            return 0
        try:
            return self._index[g]
        except KeyError:
            raise ValueError(f"glyph {g!r} is not in the charset") from None

    def glyph(self, i: int) -> Glyph:
        return NULL if i == 0 else self.charset[i - 1]

    def d(self, a: Glyph, b: Glyph) -> float:
        return float(self.matrix[self.index(a), self.index(b)])

    def __contains__(self, g) -> bool:
        return g is NULL or g in self._index

    def encode(self, s: str) -> np.ndarray:
        """Glyph indices of ``s``; raises ``ValueError`` naming the first bad char."""
        try:
            return np.fromiter((self._index[c] for c in s), dtype=np.int16, count=len(s))
        except KeyError as exc:
            raise ValueError(f"character {exc.args[0]!r} in {s!r} is not in the charset") from None

    def decode(self, codes) -> tuple[Glyph, ...]:
        return tuple(self.glyph(int(i)) for i in codes)


def default_distance_table(
    charset: Iterable[str] = PRINTABLE,
    same_type: float = 0.5,
    diff_type: float = 1.5,
    gap: float = 1.0,
    identical: float = 0.0,
    overrides: Optional[dict] = None,
) -> DistanceTable:
    """Type-class table: digits, letters (either case) and everything else.

    >>> t = default_distance_table("ab9")
    >>> t.d("a", "b"), t.d("a", "9"), t.d("a", None)
    (0.5, 1.5, 1.0)
    """
    chars = tuple(dict.fromkeys(charset))
    if not chars:
        raise ValueError("charset must not be empty")
    bad = [c for c in chars if len(c) != 1 or not c.isprintable()]
    if bad:
        raise ValueError(f"charset must hold single printable characters, got {bad!r}")

    codes = np.array([{"digit": 0, "letter": 1, "other": 2}[glyph_type(c)] for c in chars])
    n = len(chars) + 1
    m = np.empty((n, n))
    m[1:, 1:] = np.where(codes[:, None] == codes[None, :], same_type, diff_type)
    m[0, :] = m[:, 0] = gap
    np.fill_diagonal(m, identical)
    m[0, 0] = 0.0

    table = DistanceTable(chars, m, gap, same_type, diff_type, identical)
    if overrides:
        table = with_overrides(table, overrides)
    return table


def with_overrides(table: DistanceTable, overrides: dict) -> DistanceTable:
    """Copy of ``table`` with symmetric per-pair distances replaced."""
    m = table.matrix.copy()
    for (a, b), v in overrides.items():
        i, j = table.index(a), table.index(b)
        m[i, j] = m[j, i] = float(v)
    return DistanceTable(
        table.charset, m, table.gap_distance, table.same_type_distance,
        table.diff_type_distance, table.identical_distance,
    )


def validate_metric(table: DistanceTable, tol: float = 1e-12) -> tuple[bool, list[Violation]]:
    """Exhaustively check identity, symmetry and every triangle inequality.

    Triangle failures are reported once per unordered endpoint pair ``(a, b)``
    and intermediate ``c``.
    """
    m = table.matrix
    g = table.glyph
    out: list[Violation] = []

    for i in np.flatnonzero(np.abs(np.diag(m)) > tol):
        out.append(Violation(g(i), g(i), g(i), float(m[i, i]), "identity"))
    asym = np.argwhere(np.triu(np.abs(m - m.T) > tol, 1))
    for i, j in asym:
        out.append(Violation(g(i), g(j), g(i), float(m[i, j] - m[j, i]), "symmetry"))

    # slack[a, b, c] = d(a, b) - d(a, c) - d(c, b)
    n = m.shape[0]
    for a in range(n):
        slack = m[a, :, None] - m[a, None, :] - m.T
        slack[:a + 1, :] = -np.inf
        for b, c in np.argwhere(slack > tol):
            out.append(Violation(g(a), g(b), g(c), float(slack[b, c])))
    return not out, out


def require_metric(table: DistanceTable) -> DistanceTable:
    ok, violations = validate_metric(table)
    if not ok:
        shown = ", ".join(f"{v.kind}({v.a!r},{v.b!r},{v.c!r})" for v in violations[:5])
        raise MetricError(f"distance table is not a metric: {len(violations)} violations, e.g. {shown}")
    return table


@dataclass(frozen=True)
class GlyphSet:
    """Glyphs aligned in one column together with their diameter."""

    members: frozenset
    diameter: float = 0.0

    @classmethod
    def of(cls, glyphs: Iterable[Glyph], table: DistanceTable) -> "GlyphSet":
        members = frozenset(glyphs)
        return cls(members, diameter(members, table))

    def add(self, g: Glyph, table: DistanceTable) -> "GlyphSet":
        if g in self.members:
            return self
        far = max((table.d(g, x) for x in self.members), default=0.0)
        return GlyphSet(self.members | {g}, max(self.diameter, far))

    def union(self, other: "GlyphSet", table: DistanceTable) -> "GlyphSet":
        result = self
        for g in other.members:
            result = result.add(g, table)
        return result

    @property
    def has_null(self) -> bool:
        return NULL in self.members

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, g):
        return g in self.members


def diameter(glyphs: Union[GlyphSet, Iterable[Glyph]], table: DistanceTable) -> float:
    """Largest pairwise distance in ``glyphs``; 0 for fewer than two."""
    if isinstance(glyphs, GlyphSet):
        glyphs = glyphs.members
    idx = np.fromiter((table.index(g) for g in set(glyphs)), dtype=np.intp)
    if idx.size < 2:
        return 0.0
    return float(table.matrix[np.ix_(idx, idx)].max())


def load_distance_config(path: Union[str, Path, None] = None, parser: Optional[configparser.ConfigParser] = None) -> DistanceTable:
    """Build a table from the ``[distance]`` and ``[overrides]`` sections.

    ``[distance]`` accepts ``charset`` (``printable``, ``synthetic`` or a
    literal character list), ``same_type``, ``diff_type``, ``gap`` and
    ``identical``.  ``[overrides]`` holds a multi-line ``pairs`` option with
    lines ``<glyph> <glyph> <distance>``; ``null`` names the gap and
    ``space`` the blank character.
    """
    if parser is None:
        parser = read_config(path)
    sec = parser["distance"] if parser.has_section("distance") else {}
    charset = sec.get("charset", "printable")
    charset = _PRESETS.get(charset, charset)
    overrides = {}
    if parser.has_section("overrides"):
        lines = [l for l in parser["overrides"].get("pairs", "").splitlines() if l.strip()]
        for lineno, line in enumerate(lines, 1):
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"[overrides] pairs line {lineno}: expected '<glyph> <glyph> <distance>', got {line!r}")
            a, b = (_parse_glyph_token(t) for t in parts[:2])
            overrides[(a, b)] = float(parts[2])
    table = default_distance_table(
        charset,
        same_type=float(sec.get("same_type", 0.5)),
        diff_type=float(sec.get("diff_type", 1.5)),
        gap=float(sec.get("gap", 1.0)),
        identical=float(sec.get("identical", 0.0)),
        overrides=overrides,
    )
    return require_metric(table)


def read_config(path: Union[str, Path, None]) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    return parser


def _parse_glyph_token(tok: str) -> Glyph:
    if tok == "null":
        return NULL
    if tok == "space":
        return " "
    if len(tok) != 1:
        raise ValueError(f"bad glyph token {tok!r}")
    return tok
