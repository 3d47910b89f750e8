"""Compiled inner loops for the two-paradigm alignment DP.

Columns are passed as ``int16[length, K]`` arrays of glyph indices padded
with ``-1``; glyph 0 is the gap.  Step codes: 0 aligns both columns, 1 puts
a gap on the left paradigm (consumes a right column), 2 puts a gap on the
right paradigm (consumes a left column).
"""

import numpy as np
from numba import njit

DIAG, GAP_LEFT, GAP_RIGHT = 0, 1, 2
TIE_EPS = 1e-9


@njit(cache=True)
def _gap_costs(cols, diam, dist):
    n = cols.shape[0]
    out = np.empty(n)
    for i in range(n):
        best = diam[i]
        for k in range(cols.shape[1]):
            a = cols[i, k]
            if a < 0:
                break
            if dist[a, 0] > best:
                best = dist[a, 0]
        out[i] = best
    return out


@njit(cache=True)
def _pair_cost(cols1, diam1, i, cols2, diam2, j, dist):
    best = diam1[i] if diam1[i] > diam2[j] else diam2[j]
    for k in range(cols1.shape[1]):
        a = cols1[i, k]
        if a < 0:
            break
        for m in range(cols2.shape[1]):
            b = cols2[j, m]
            if b < 0:
                break
            if dist[a, b] > best:
                best = dist[a, b]
    return best


@njit(cache=True)
def align(cols1, diam1, cols2, diam2, dist):
    """Optimal column-atomic alignment; returns ``(size, ops, step_costs)``.

    The DP runs over suffixes so that ties are resolved at the earliest
    column, preferring DIAG, then GAP_LEFT, then GAP_RIGHT.
    """
    n1 = cols1.shape[0]
    n2 = cols2.shape[0]
    g1 = _gap_costs(cols1, diam1, dist)
    g2 = _gap_costs(cols2, diam2, dist)
    cost = np.empty((n1 + 1, n2 + 1))
    move = np.empty((n1 + 1, n2 + 1), dtype=np.int8)
    cost[n1, n2] = 0.0
    for i in range(n1 - 1, -1, -1):
        cost[i, n2] = g1[i] + cost[i + 1, n2]
        move[i, n2] = GAP_RIGHT
    for j in range(n2 - 1, -1, -1):
        cost[n1, j] = g2[j] + cost[n1, j + 1]
        move[n1, j] = GAP_LEFT
    for i in range(n1 - 1, -1, -1):
        for j in range(n2 - 1, -1, -1):
            c_diag = _pair_cost(cols1, diam1, i, cols2, diam2, j, dist) + cost[i + 1, j + 1]
            c_left = g2[j] + cost[i, j + 1]
            c_right = g1[i] + cost[i + 1, j]
            best = min(c_diag, c_left, c_right)
            if c_diag <= best + TIE_EPS:
                cost[i, j] = c_diag
                move[i, j] = DIAG
            elif c_left <= best + TIE_EPS:
                cost[i, j] = c_left
                move[i, j] = GAP_LEFT
            else:
                cost[i, j] = c_right
                move[i, j] = GAP_RIGHT

    ops = np.empty(n1 + n2, dtype=np.int8)
    steps = np.empty(n1 + n2)
    i = 0
    j = 0
    k = 0
    total = 0.0
    while i < n1 or j < n2:
        op = move[i, j]
        ops[k] = op
        if op == DIAG:
            c = _pair_cost(cols1, diam1, i, cols2, diam2, j, dist)
            i += 1
            j += 1
        elif op == GAP_LEFT:
            c = g2[j]
            j += 1
        else:
            c = g1[i]
            i += 1
        steps[k] = c
        total += c
        k += 1
    return total, ops[:k], steps[:k]
