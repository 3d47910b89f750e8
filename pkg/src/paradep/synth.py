"""Synthetic identifier corpora: clustered seeds copied with variation."""

from __future__ import annotations

import csv
import io
import random
import string
from dataclasses import dataclass, field
from typing import Optional

from .charspace import SYNTHETIC, glyph_type


@dataclass(frozen=True)
class Plant:
    """Column ``column`` (1-based, in seed coordinates) decides ``attribute``.

    Every generated string draws that column's character uniformly from
    ``mapping``'s keys; the character is never mutated or deleted.
    """

    column: int
    attribute: str
    mapping: dict


@dataclass(frozen=True)
class GenConfig:
    length: int = 20
    count: int = 5000
    clusters: int = 50
    sigma: float = 0.05
    delete_prob: Optional[float] = None  # None -> sigma / 5
    seed: int = 0
    charset: str = SYNTHETIC
    same_type_bias: float = 0.8
    plant: Optional[Plant] = None

    def __post_init__(self):
        if self.length < 1 or self.count < 1 or self.clusters < 1:
            raise ValueError("length, count and clusters must be positive")
        if self.clusters > self.count:
            raise ValueError(f"clusters ({self.clusters}) cannot exceed count ({self.count})")
        for name in ("sigma", "effective_delete_prob", "same_type_bias"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.plant is not None:
            if not 1 <= self.plant.column <= self.length:
                raise ValueError("plant column outside the string length")
            missing = [k for k in self.plant.mapping if k not in self.charset]
            if missing:
                raise ValueError(f"plant keys {missing} not in charset")

    @property
    def effective_delete_prob(self) -> float:
        return self.sigma / 5 if self.delete_prob is None else self.delete_prob


@dataclass
class Corpus:
    strings: list
    attributes: list  # one dict per string
    mutations: list = field(default_factory=list)  # substitutions per copy
    sites: list = field(default_factory=list)  # mutable parent characters per copy

    def __len__(self):
        return len(self.strings)

    def to_csv(self, id_column: str = "id") -> str:
        names = sorted({k for a in self.attributes for k in a})
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([id_column, *names])
        for s, a in zip(self.strings, self.attributes):
            w.writerow([s, *(a.get(n, "") for n in names)])
        return buf.getvalue()


def generate(cfg: GenConfig) -> Corpus:
    """Generate ``cfg.count`` strings around ``cfg.clusters`` random seeds.

    Each string picks a cluster uniformly, then a parent uniformly from that
    cluster's pool (the seed plus everything generated for it so far).  Each
    parent character is deleted with probability ``delete_prob``, otherwise
    replaced with probability ``sigma``; replacements keep the character's
    type with probability ``same_type_bias``.
    """
    rng = random.Random(cfg.seed)
    pools = {}
    for t in ("digit", "letter", "other"):
        pools[t] = [c for c in cfg.charset if glyph_type(c) == t]
    plant = cfg.plant
    keys = sorted(plant.mapping) if plant else []
    p_del = cfg.effective_delete_prob

    # a parent is a list of (char, planted?) pairs
    clusters = []
    for _ in range(cfg.clusters):
        seed = [(rng.choice(cfg.charset), False) for _ in range(cfg.length)]
        if plant:
            seed[plant.column - 1] = (keys[0], True)
        clusters.append([seed])

    strings, attrs, muts, sites = [], [], [], []
    for _ in range(cfg.count):
        pool = clusters[rng.randrange(cfg.clusters)]
        parent = pool[rng.randrange(len(pool))]
        child, changed, key = [], 0, None
        n_sites = 0
        for c, planted in parent:
            if planted:
                key = rng.choice(keys)
                child.append((key, True))
                continue
            n_sites += 1
            r = rng.random()
            if r < p_del:
                continue
            if r < p_del + cfg.sigma:
                c = _replace(c, rng, pools, cfg)
                changed += 1
            child.append((c, False))
        if not child:
            child = [parent[0]]
        pool.append(child)
        strings.append("".join(c for c, _ in child))
        attrs.append({plant.attribute: plant.mapping[key]} if plant else {})
        muts.append(changed)
        sites.append(n_sites)
    return Corpus(strings, attrs, muts, sites)


def _replace(c: str, rng: random.Random, pools: dict, cfg: GenConfig) -> str:
    same = pools[glyph_type(c)]
    other = [x for x in cfg.charset if glyph_type(x) != glyph_type(c)]
    if (rng.random() < cfg.same_type_bias and len(same) > 1) or not other:
        choices = same
    else:
        choices = other
    new = c
    while new == c and len(choices) > 1:
        new = rng.choice(choices)
    return new


def digit_plant(column: int = 3, attribute: str = "A", keys: str = string.digits) -> Plant:
    """Plant mapping each digit key ``k`` to the value ``v<k>``."""
    return Plant(column, attribute, {k: f"v{k}" for k in keys})
