import random

import numpy as np
import pytest

from paradep.charspace import DistanceTable, default_distance_table


@pytest.fixture(scope="session")
def table():
    return default_distance_table()


@pytest.fixture
def laptop_strings():
    return ["SL410", "T520i", "T560"]


def random_metric_table(rng: random.Random, charset: str = "abcd", max_weight: int = 4) -> DistanceTable:
    """Shortest-path closure of random positive integer weights on glyphs plus the gap."""
    n = len(charset) + 1
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            w[i, j] = w[j, i] = rng.randint(1, max_weight)
    for k in range(n):
        w = np.minimum(w, w[:, k:k + 1] + w[k:k + 1, :])
    return DistanceTable.from_matrix(charset, w)


def random_word(rng: random.Random, alphabet: str, lo: int = 1, hi: int = 5) -> str:
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(lo, hi)))
