import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paradep.charspace import (
    NULL,
    PRINTABLE,
    SYNTHETIC,
    DistanceTable,
    GlyphSet,
    MetricError,
    default_distance_table,
    diameter,
    glyph_type,
    load_distance_config,
    require_metric,
    validate_metric,
    with_overrides,
)

glyphs = st.sampled_from(list(SYNTHETIC) + [NULL])
glyph_sets = st.frozensets(glyphs, max_size=8)


def brute_diameter(members, table):
    return max((table.d(a, b) for a, b in itertools.combinations(members, 2)), default=0.0)


def test_default_distances(table):
    assert table.d("a", "a") == 0.0
    assert table.d("a", "b") == 0.5
    assert table.d("a", "9") == 1.5
    assert table.d("a", NULL) == 1.0
    assert table.d(NULL, NULL) == 0.0
    assert table.d("A", "a") == 0.5  # case-sensitive, same type
    assert table.d("-", "/") == 0.5


def test_glyph_types():
    assert glyph_type("7") == "digit"
    assert glyph_type("Q") == "letter"
    assert glyph_type("-") == "other"
    assert glyph_type(" ") == "other"


def test_charset_presets():
    assert len(PRINTABLE) == 95
    assert set("09azAZ-_/") <= set(SYNTHETIC)
    assert len(SYNTHETIC) == 65


def test_default_table_is_metric(table):
    ok, bad = validate_metric(table)
    assert ok and bad == []


def test_diameter_examples(table):
    assert diameter({"a"}, table) == 0.0
    assert diameter(set(), table) == 0.0
    assert diameter({"a", "b", "9"}, table) == 1.5
    assert diameter({"4", "5"}, table) == 0.5


def test_constructed_violation_reported():
    m = np.array([
        [0, 1, 1, 1],
        [1, 0, 5, 1],
        [1, 5, 0, 1],
        [1, 1, 1, 0],
    ], dtype=float)
    t = DistanceTable.from_matrix("abc", m)
    ok, bad = validate_metric(t)
    assert not ok
    triples = {(v.a, v.b, v.c) for v in bad}
    assert ("a", "b", "c") in triples
    assert all(v.slack > 0 for v in bad)
    with pytest.raises(MetricError):
        require_metric(t)


def test_single_glyph_charset_is_metric():
    ok, bad = validate_metric(default_distance_table("x"))
    assert ok and bad == []


def test_asymmetry_and_identity_flagged():
    m = np.zeros((3, 3))
    m[0, 1], m[1, 0] = 1.0, 2.0
    m[2, 2] = 0.3
    _, bad = validate_metric(DistanceTable.from_matrix("ab", m))
    kinds = {v.kind for v in bad}
    assert {"symmetry", "identity"} <= kinds


def test_bad_matrix_shape_rejected():
    with pytest.raises(ValueError):
        DistanceTable.from_matrix("ab", np.zeros((2, 2)))
    with pytest.raises(ValueError):
        DistanceTable.from_matrix("ab", -np.ones((3, 3)))


def test_encode_rejects_unknown(table):
    assert table.encode("T5").tolist() == [table.index("T"), table.index("5")]
    with pytest.raises(ValueError, match="é"):
        table.encode("é")


def test_overrides_symmetric(table):
    t = with_overrides(table, {("0", "O"): 0.5})
    assert t.d("O", "0") == 0.5 and t.d("0", "O") == 0.5
    assert table.d("0", "O") == 1.5


def test_config_file(tmp_path):
    cfg = tmp_path / "d.ini"
    cfg.write_text(
        "[distance]\ncharset = synthetic\ngap = 1.2\n"
        "[overrides]\npairs =\n    0 O 1.0\n    a null 1.0\n"
    )
    t = load_distance_config(cfg)
    assert t.charset == tuple(SYNTHETIC)
    assert t.d("b", NULL) == 1.2
    assert t.d("a", NULL) == 1.0
    assert t.d("O", "0") == 1.0


def test_config_rejects_non_metric(tmp_path):
    cfg = tmp_path / "d.ini"
    cfg.write_text("[distance]\ncharset = abc\n[overrides]\npairs =\n    a b 9\n")
    with pytest.raises(MetricError):
        load_distance_config(cfg)


def test_config_malformed_pair(tmp_path):
    cfg = tmp_path / "d.ini"
    cfg.write_text("[overrides]\npairs =\n    a b\n")
    with pytest.raises(ValueError, match="line 1"):
        load_distance_config(cfg)


@given(glyph_sets, glyphs)
def test_incremental_diameter_matches_scratch(members, g):
    table = default_distance_table(SYNTHETIC)
    gs = GlyphSet.of(members, table).add(g, table)
    assert gs.diameter == pytest.approx(brute_diameter(set(members) | {g}, table))
    assert gs.has_null == (NULL in members or g is NULL)


@given(glyph_sets, glyph_sets)
def test_union_diameter(a, b):
    table = default_distance_table(SYNTHETIC)
    u = GlyphSet.of(a, table).union(GlyphSet.of(b, table), table)
    assert u.diameter == pytest.approx(brute_diameter(a | b, table))


@settings(max_examples=200)
@given(glyph_sets, glyph_sets)
def test_diameter_monotone_under_inclusion(c, extra):
    table = default_distance_table(SYNTHETIC)
    assert diameter(c, table) <= diameter(c | extra, table)


@settings(max_examples=200)
@given(glyph_sets, st.frozensets(glyphs, min_size=1, max_size=8), glyph_sets)
def test_set_triangle(c1, c2, c3):
    table = default_distance_table(SYNTHETIC)
    lhs = diameter(c1 | c2 | c3, table)
    assert lhs <= diameter(c1 | c2, table) + diameter(c2 | c3, table) + 1e-12
