import math

import pytest

from paradep.bounds import (
    INF,
    BoundInterval,
    BoundViolation,
    CriticalSet,
    IntervalTable,
    identify_critical,
    init_intervals,
    on_merge_commit,
    pair_key,
    pivot_score,
    pivot_scores,
    refine,
    select_pivot,
)


def four_pair_state():
    t = init_intervals([1, 2, 3, 4])
    t.set(1, 2, 1, 2)
    t.set(3, 4, 0.5, 3)
    t.set(2, 3, 1.5, 4)
    t.set(1, 3, 2.5, 5)
    # two more pairs, far above the minimum
    t.set(1, 4, 6, 9)
    t.set(2, 4, 6, 9)
    return t


def star_table(n=5):
    return init_intervals(range(n))


def star(sizes):
    calls = []

    def fn(a, b):
        calls.append(pair_key(a, b))
        return sizes[pair_key(a, b)]

    return fn, calls


def test_init_sizes():
    assert len(init_intervals([0, 1, 2])) == 3
    assert len(init_intervals([0, 1])) == 1
    assert len(init_intervals([0])) == 0
    iv = init_intervals([0, 1])[0, 1]
    assert iv == BoundInterval(0.0, INF, False)


def test_keys_unordered():
    t = init_intervals([3, 7])
    t.set(7, 3, 1, 2)
    assert t[3, 7] == t[7, 3] == BoundInterval(1, 2, False)
    assert list(t.keys()) == [(3, 7)]
    assert (3, 7) in t and (3, 9) not in t


def test_critical_set_over_all_pairs():
    cr = identify_critical(four_pair_state(), independency=False)
    assert cr.ub_min == 2 and cr.ub_min_pair == (1, 2)
    assert cr.intervals == {(1, 2), (3, 4), (2, 3)}
    assert (1, 3) not in cr.intervals


def test_critical_set_restricted_to_dependent_pairs():
    cr = identify_critical(four_pair_state(), independency=True)
    assert cr.intervals == {(1, 2), (2, 3)}
    assert cr.involved_paradigms == {1, 2, 3}


def test_all_exact_leaves_one():
    t = init_intervals([0, 1, 2])
    t.collapse(0, 1, 2.0)
    t.collapse(0, 2, 2.0)
    t.collapse(1, 2, 3.0)
    cr = identify_critical(t)
    assert cr.intervals == {(0, 1)}


def test_ub_min_tie_goes_to_smallest_pair():
    t = init_intervals([0, 1, 2, 3])
    t.set(2, 3, 0, 1)
    t.set(0, 3, 0, 1)
    assert identify_critical(t).ub_min_pair == (0, 3)


def test_pivot_score_sums_widths():
    t = init_intervals([0, 1, 2])
    t.set(0, 1, 1.0, 2.0)
    t.set(0, 2, 0.5, 3.0)
    t.set(1, 2, 0.0, 10.0)
    cr = CriticalSet(frozenset({(0, 1), (0, 2)}), frozenset({0, 1, 2}), 2.0, (0, 1))
    assert pivot_score(0, cr, t) == 3.5
    assert pivot_score(1, cr, t) == 1.0
    assert select_pivot(cr, t) == 0
    with pytest.raises(ValueError):
        pivot_score(5, cr, t)


def test_pivot_score_exact_is_zero():
    t = init_intervals([0, 1])
    t.collapse(0, 1, 1.0)
    cr = identify_critical(t)
    assert pivot_scores(cr, t) == {0: 0.0, 1: 0.0}


def test_pivot_score_saturates_and_ties_to_smallest():
    t = init_intervals([4, 2, 9])
    cr = identify_critical(t, independency=False)
    scores = pivot_scores(cr, t)
    assert all(math.isinf(v) for v in scores.values())
    assert select_pivot(cr, t) == 2


def test_star_refinement_bounds():
    t = star_table()
    sizes = {(0, 1): 1.5, (0, 2): 2.0, (0, 3): 2.0, (0, 4): 1.0}
    fn, calls = star(sizes)
    cr = identify_critical(t, independency=False)
    assert refine(cr, 0, t, fn) == 4
    assert sorted(calls) == sorted(sizes)
    expect = {
        (1, 2): (0.5, 3.5), (1, 3): (0.5, 3.5), (1, 4): (0.5, 2.5),
        (2, 3): (0.0, 4.0), (2, 4): (1.0, 3.0), (3, 4): (1.0, 3.0),
    }
    for k, (lo, hi) in expect.items():
        assert (t[k].lb, t[k].ub) == (lo, hi), k
    for k, s in sizes.items():
        assert t[k] == BoundInterval(s, s, True)


def test_refine_single_neighbour():
    t = init_intervals([0, 1])
    fn, calls = star({(0, 1): 2.5})
    cr = identify_critical(t)
    assert refine(cr, 0, t, fn) == 1
    assert t[0, 1].exact and t[0, 1].lb == 2.5


def test_refine_skips_exact():
    t = init_intervals([0, 1, 2])
    t.collapse(0, 1, 1.0)
    t.collapse(0, 2, 2.0)
    fn, calls = star({})
    cr = identify_critical(t, independency=False)
    assert refine(cr, 0, t, fn) == 0
    assert calls == []
    assert (t[1, 2].lb, t[1, 2].ub) == (1.0, 3.0)


def test_refine_never_widens():
    t = init_intervals([0, 1, 2])
    t.set(1, 2, 0.8, 1.2)
    fn, _ = star({(0, 1): 1.0, (0, 2): 2.0})
    refine(identify_critical(t, independency=False), 0, t, fn)
    assert (t[1, 2].lb, t[1, 2].ub) == (1.0, 1.2)


def test_score_equals_width_removed():
    t = init_intervals([0, 1, 2, 3])
    t.set(0, 1, 0.5, 2.0)
    t.set(0, 2, 1.0, 4.0)
    t.set(0, 3, 0.0, 3.0)
    t.set(1, 2, 0.0, 9.0)
    t.set(1, 3, 0.0, 9.0)
    t.set(2, 3, 0.0, 9.0)
    cr = identify_critical(t, independency=False)
    score = pivot_score(0, cr, t)
    before = sum(t[0, p].width for p in (1, 2, 3))
    fn, _ = star({(0, 1): 1.0, (0, 2): 2.0, (0, 3): 1.0})
    refine(cr, 0, t, fn)
    after = sum(t[0, p].width for p in (1, 2, 3))
    assert before - after == score == 7.5


def test_commit_bounds_example():
    t = init_intervals([1, 2, 3])
    t.set(1, 3, 3, 5)
    t.set(2, 3, 1, 4)
    t.collapse(1, 2, 2)
    on_merge_commit(t, 9, 1, 2, 2.0)
    assert (t[9, 3].lb, t[9, 3].ub) == (3, 6)
    assert t.paradigms == [3, 9]
    assert (1, 3) not in t and len(t) == 1


def test_commit_bounds_zero_merge_collapses():
    t = init_intervals([1, 2, 3])
    t.collapse(1, 3, 4)
    t.collapse(1, 2, 0)
    on_merge_commit(t, 4, 1, 2, 0.0)
    assert t[4, 3] == BoundInterval(4, 4, True)


def test_commit_without_bounds_resets():
    t = init_intervals([1, 2, 3])
    t.collapse(1, 3, 4)
    t.collapse(1, 2, 0)
    on_merge_commit(t, 4, 1, 2, 0.0, use_bounds=False)
    assert t[4, 3] == BoundInterval(0.0, INF, False)


def test_commit_last_pair_empties_table():
    t = init_intervals([1, 2])
    t.collapse(1, 2, 1.0)
    on_merge_commit(t, 3, 1, 2, 1.0)
    assert len(t) == 0 and t.paradigms == [3]


def test_slots_reused_and_grown():
    t = IntervalTable([0, 1], capacity=2)
    t.set(0, 1, 0, 1)
    t.add_paradigm(2)
    t.set(0, 2, 1, 2)
    assert t.lb.shape[0] >= 3
    assert t[0, 1] == BoundInterval(0, 1, False)
    t.remove_paradigm(1)
    s = t.add_paradigm(5)
    assert s == 1 and (0, 5) not in t


def test_strict_mode_flags_outside_size():
    t = IntervalTable([0, 1], strict=True)
    t.set(0, 1, 2.0, 3.0)
    with pytest.raises(BoundViolation):
        t.collapse(0, 1, 1.0)


def test_lenient_mode_counts():
    t = IntervalTable([0, 1])
    t.set(0, 1, 2.0, 3.0)
    t.tighten(0, 1, 5.0, 6.0)
    assert t.violations == 1
    assert t[0, 1].lb <= t[0, 1].ub


def test_tighten_is_monotone():
    t = IntervalTable([0, 1])
    t.set(0, 1, 1.0, 5.0)
    assert t.tighten(0, 1, 0.0, 9.0) == BoundInterval(1.0, 5.0, False)
    assert t.tighten(0, 1, 2.0, 4.0) == BoundInterval(2.0, 4.0, False)


def test_set_rejects_inverted():
    t = IntervalTable([0, 1])
    with pytest.raises(ValueError):
        t.set(0, 1, 3.0, 1.0)


def test_identify_on_empty_table():
    with pytest.raises(ValueError):
        identify_critical(init_intervals([0]))
