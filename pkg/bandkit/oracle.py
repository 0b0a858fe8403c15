# bandkit/oracle.py
"""Explicit band tree over a v-window, numbered top-down.

Test oracle for `core.band_lookup`: instead of walking up from one band, it
enumerates every band of every level in the window, links each to its parent
with the nearest-border rule, and hands ids down from the top level.
"""

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .core import border_position, level_tables, nearest_coarse_border
from .errors import DepthBudgetError
from .schemas import BandConfig


@dataclass(frozen=True)
class OracleBand:
    level: int
    index: int
    left: float
    right: float
    id: int
    closes: bool
    parent: Optional[int]  # index at level - 1


@dataclass
class BandTree:
    cfg: BandConfig
    fine_level: int
    window: Tuple[float, float]
    levels: Dict[int, List[OracleBand]] = field(default_factory=dict)

    @property
    def leaves(self) -> List[OracleBand]:
        return self.levels[self.fine_level]

    def intervals(self, alpha: float = 1.0) -> List[Tuple[float, float, int]]:
        """(left, right, id) of the fine bands with borders pulled by `alpha`."""
        coarse = max(self.fine_level - 1, self.cfg.top_level)

        def pulled(b: float) -> float:
            if self.fine_level == self.cfg.top_level:
                return b
            _, c = nearest_coarse_border(b, coarse, self.cfg)
            return b + alpha * (c - b)

        return [(pulled(b.left), pulled(b.right), b.id) for b in self.leaves]

    def id_at(self, v: float, alpha: float = 1.0) -> Optional[int]:
        table = [iv for iv in self.intervals(alpha) if iv[1] > iv[0]]
        lefts = [iv[0] for iv in table]
        pos = bisect_right(lefts, v) - 1
        if pos < 0 or v >= table[pos][1]:
            return None
        return table[pos][2]


def _indices_covering(level: int, lo: float, hi: float, cfg: BandConfig) -> range:
    h = level_tables(cfg).spacing[level - cfg.top_level]
    first = math.floor(lo / h) - 2
    last = math.ceil(hi / h) + 2
    return range(first, last)


def oracle_bands(cfg: BandConfig, window: Tuple[float, float], fine_level: int) -> BandTree:
    top = cfg.top_level
    if fine_level - top > cfg.depth:
        raise DepthBudgetError(fine_level, top, cfg.depth)
    lo, hi = window
    # coarse bands reach farther than fine ones; pad by one top-level band
    pad = level_tables(cfg).spacing[0]
    tree = BandTree(cfg=cfg, fine_level=fine_level, window=window)

    tops = []
    for k in _indices_covering(top, lo - pad, hi + pad, cfg):
        tops.append(OracleBand(
            level=top,
            index=k,
            left=border_position(top, k, cfg),
            right=border_position(top, k + 1, cfg),
            id=k * (1 << cfg.depth),
            closes=False,
            parent=None,
        ))
    tree.levels[top] = tops

    for lam in range(top + 1, fine_level + 1):
        by_index = {b.index: b for b in tree.levels[lam - 1]}
        bit = 1 << (cfg.depth - (lam - top))
        bands = []
        for k in _indices_covering(lam, lo - pad, hi + pad, cfg):
            left = border_position(lam, k, cfg)
            right = border_position(lam, k + 1, cfg)
            jl, _ = nearest_coarse_border(left, lam - 1, cfg)
            jr, _ = nearest_coarse_border(right, lam - 1, cfg)
            parent = by_index.get(jl)
            if parent is None:
                continue  # outside the padded window
            closing = jl == jr
            bands.append(OracleBand(
                level=lam,
                index=k,
                left=left,
                right=right,
                id=parent.id | bit if closing else parent.id,
                closes=closing,
                parent=jl,
            ))
        tree.levels[lam] = bands
    return tree
