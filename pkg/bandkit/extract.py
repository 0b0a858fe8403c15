# bandkit/extract.py
"""Curves from an IdMap: labeled band borders and centerlines of deployed bands."""

import logging
from collections import defaultdict
from dataclasses import dataclass, replace
from math import hypot
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import level_tables
from .data import DEPLOYED_WIDTH
from .raster import IdMap, rasterize
from .schemas import Scene

logger = logging.getLogger(__name__)

Point = Tuple[float, float]
Vertex = Tuple[int, int]  # (row, col) on the corner lattice


@dataclass(frozen=True)
class LabeledPolyline:
    id_a: int
    id_b: int
    points: Tuple[Point, ...]
    closed: bool
    segments: int = 0  # unit segments chained into this polyline


# --- borders ---

def border_edges(idmap: IdMap) -> List[Tuple[Vertex, Vertex, Tuple[int, int]]]:
    """Unit segments between 4-neighbor cells with differing ids, in scanline order."""
    ids, valid = idmap.ids, idmap.valid
    # vertical lattice segments between (r, c) and (r, c + 1)
    h_diff = (ids[:, :-1] != ids[:, 1:]) & valid[:, :-1] & valid[:, 1:]
    # horizontal lattice segments between (r, c) and (r + 1, c)
    v_diff = (ids[:-1, :] != ids[1:, :]) & valid[:-1, :] & valid[1:, :]

    found = []
    for r, c in zip(*np.nonzero(h_diff)):
        a, b = int(ids[r, c]), int(ids[r, c + 1])
        found.append(((int(r), int(c) + 1, 0), (min(a, b), max(a, b))))
    for r, c in zip(*np.nonzero(v_diff)):
        a, b = int(ids[r, c]), int(ids[r + 1, c])
        found.append(((int(r) + 1, int(c), 1), (min(a, b), max(a, b))))
    found.sort(key=lambda item: item[0])

    edges = []
    for (r, c, horizontal), label in found:
        if horizontal:
            edges.append(((r, c), (r, c + 1), label))
        else:
            edges.append(((r, c), (r + 1, c), label))
    return edges


def _corner_ids(idmap: IdMap, v: Vertex) -> set:
    r, c = v
    out = set()
    for rr in (r - 1, r):
        for cc in (c - 1, c):
            if 0 <= rr < idmap.height and 0 <= cc < idmap.width and idmap.valid[rr, cc]:
                out.add(int(idmap.ids[rr, cc]))
    return out


def _drop_collinear(path: List[Vertex], closed: bool) -> List[Vertex]:
    def turns(prev: Vertex, cur: Vertex, nxt: Vertex) -> bool:
        d1 = (cur[0] - prev[0], cur[1] - prev[1])
        d2 = (nxt[0] - cur[0], nxt[1] - cur[1])
        return d1[0] * d2[1] - d1[1] * d2[0] != 0

    if closed:
        ring = path[:-1]
        n = len(ring)
        kept = [ring[i] for i in range(n) if turns(ring[i - 1], ring[i], ring[(i + 1) % n])]
        start = kept.index(min(kept))
        kept = kept[start:] + kept[:start]
        return kept + [kept[0]]
    inner = [path[i] for i in range(1, len(path) - 1) if turns(path[i - 1], path[i], path[i + 1])]
    return [path[0]] + inner + [path[-1]]


def extract_borders(idmap: IdMap) -> List[LabeledPolyline]:
    edges = border_edges(idmap)
    incident: Dict[Tuple[Tuple[int, int], Vertex], List[int]] = defaultdict(list)
    for k, (a, b, label) in enumerate(edges):
        incident[(label, a)].append(k)
        incident[(label, b)].append(k)

    junction_cache: Dict[Vertex, bool] = {}

    def is_junction(v: Vertex) -> bool:
        if v not in junction_cache:
            junction_cache[v] = len(_corner_ids(idmap, v)) >= 3
        return junction_cache[v]

    def terminal(label, v: Vertex) -> bool:
        return len(incident[(label, v)]) != 2 or is_junction(v)

    used = [False] * len(edges)

    def walk(k: int, start: Vertex) -> Tuple[List[Vertex], int]:
        label = edges[k][2]
        path = [start]
        count = 0
        cur = start
        while True:
            used[k] = True
            count += 1
            a, b, _ = edges[k]
            cur = b if a == cur else a
            path.append(cur)
            if cur == start or terminal(label, cur):
                return path, count
            nxt = [e for e in incident[(label, cur)] if not used[e]]
            if not nxt:
                return path, count
            k = nxt[0]

    chains = []
    # open chains start at terminals, in scanline order of their first segment
    for k, (a, b, label) in enumerate(edges):
        if used[k]:
            continue
        if terminal(label, a):
            start = a
        elif terminal(label, b):
            start = b
        else:
            continue
        path, count = walk(k, start)
        chains.append((label, path, count, False))
    # whatever is left forms rings
    for k, (a, b, label) in enumerate(edges):
        if used[k]:
            continue
        path, count = walk(k, a)
        chains.append((label, path, count, path[-1] == path[0]))

    polylines = []
    for label, path, count, closed in chains:
        path = _drop_collinear(path, closed)
        points = tuple(idmap.corner(r, c) for r, c in path)
        polylines.append(LabeledPolyline(label[0], label[1], points, closed, count))
    logger.debug("extracted %d border polylines from %d segments", len(polylines), len(edges))
    return polylines


# --- centerlines ---

def opening_mask(idmap: IdMap) -> np.ndarray:
    """Just-appeared cells whose band is still narrower than its level spacing.

    At alpha = 0 a just-appeared band already has full width and counts as deployed.
    """
    t = level_tables(idmap.cfg)
    full = t.spacing_arr[np.clip(idmap.level.astype(np.int64) - t.top, 0, t.depth)]
    return idmap.just_appeared & (idmap.width_v < full * DEPLOYED_WIDTH)


def _edge_point(idmap: IdMap, g: np.ndarray, key: Tuple[str, int, int]) -> Point:
    kind, r, c = key
    r2, c2 = (r, c + 1) if kind == "h" else (r + 1, c)
    g0, g1 = g[r, c], g[r2, c2]
    t = g0 / (g0 - g1) if g0 != g1 else 0.5
    t = min(max(t, 0.0), 1.0)
    x0, y0 = idmap.center(r, c)
    x1, y1 = idmap.center(r2, c2)
    return x0 + t * (x1 - x0), y0 + t * (y1 - y0)


def centerlines_from_map(idmap: IdMap) -> List[LabeledPolyline]:
    if idmap.width < 2 or idmap.height < 2:
        return []
    ids = idmap.ids
    g = idmap.local_coord - 0.5
    ok = idmap.valid & ~opening_mask(idmap)
    same = (
        (ids[:-1, :-1] == ids[:-1, 1:])
        & (ids[:-1, :-1] == ids[1:, 1:])
        & (ids[:-1, :-1] == ids[1:, :-1])
        & ok[:-1, :-1] & ok[:-1, 1:] & ok[1:, 1:] & ok[1:, :-1]
    )
    inside = g >= 0
    n_inside = (inside[:-1, :-1].astype(np.int8) + inside[:-1, 1:]
                + inside[1:, 1:] + inside[1:, :-1])
    crossing = same & (n_inside > 0) & (n_inside < 4)
    square_pairs = []
    for r, c in zip(*np.nonzero(crossing)):
        r, c = int(r), int(c)
        s = (inside[r, c], inside[r, c + 1], inside[r + 1, c + 1], inside[r + 1, c])
        e = (("h", r, c), ("v", r, c + 1), ("h", r + 1, c), ("v", r, c))
        crossed = [e[i] for i in range(4) if s[i] != s[(i + 1) % 4]]
        if len(crossed) == 2:
            square_pairs.append((int(ids[r, c]), crossed[0], crossed[1]))
        elif len(crossed) == 4:
            center = (g[r, c] + g[r, c + 1] + g[r + 1, c + 1] + g[r + 1, c]) / 4 >= 0
            if center == s[0]:
                square_pairs.append((int(ids[r, c]), e[0], e[1]))
                square_pairs.append((int(ids[r, c]), e[2], e[3]))
            else:
                square_pairs.append((int(ids[r, c]), e[3], e[0]))
                square_pairs.append((int(ids[r, c]), e[1], e[2]))

    incident: Dict[tuple, List[int]] = defaultdict(list)
    for k, (_, a, b) in enumerate(square_pairs):
        incident[a].append(k)
        incident[b].append(k)
    used = [False] * len(square_pairs)

    def walk(k: int, start) -> List[tuple]:
        path = [start]
        cur = start
        while True:
            used[k] = True
            _, a, b = square_pairs[k]
            cur = b if a == cur else a
            path.append(cur)
            if cur == start:
                return path
            nxt = [e for e in incident[cur] if not used[e]]
            if not nxt:
                return path
            k = nxt[0]

    chains = []
    for k, (band, a, b) in enumerate(square_pairs):
        if used[k]:
            continue
        if len(incident[a]) == 1:
            chains.append((band, walk(k, a)))
        elif len(incident[b]) == 1:
            chains.append((band, walk(k, b)))
    for k, (band, a, b) in enumerate(square_pairs):
        if not used[k]:
            chains.append((band, walk(k, a)))

    polylines = []
    for band, keys in chains:
        closed = len(keys) > 2 and keys[-1] == keys[0]
        points = [_edge_point(idmap, g, key) for key in keys]
        dedup = [points[0]]
        for p in points[1:]:
            if p != dedup[-1]:
                dedup.append(p)
        if closed and len(dedup) > 1 and dedup[-1] != dedup[0]:
            dedup.append(dedup[0])
        if len(dedup) < 2:
            continue
        polylines.append(LabeledPolyline(band, band, tuple(dedup), closed, len(keys) - 1))
    return polylines


def extract_centerlines(scene: Scene, width: Optional[int] = None, height: Optional[int] = None,
                        threads: int = 1, base_dir: Optional[Path] = None) -> List[LabeledPolyline]:
    return centerlines_from_map(rasterize(scene, width, height, threads, base_dir))


# --- post-processing ---

def _segment_distance(p: Point, a: Point, b: Point) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    if dx == 0 and dy == 0:
        return hypot(p[0] - a[0], p[1] - a[1])
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)
    t = max(0.0, min(1.0, t))
    return hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy))


def douglas_peucker(points: Sequence[Point], tolerance: float) -> List[Point]:
    if len(points) < 3:
        return list(points)
    keep = [False] * len(points)
    keep[0] = keep[-1] = True
    stack = [(0, len(points) - 1)]
    while stack:
        first, last = stack.pop()
        worst, worst_d = -1, -1.0
        for i in range(first + 1, last):
            d = _segment_distance(points[i], points[first], points[last])
            if d > worst_d:
                worst, worst_d = i, d
        if worst_d > tolerance:
            keep[worst] = True
            stack.append((first, worst))
            stack.append((worst, last))
    return [p for p, k in zip(points, keep) if k]


def simplify_polyline(poly: LabeledPolyline, tolerance: float) -> LabeledPolyline:
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    if tolerance == 0:
        return poly
    points = douglas_peucker(poly.points, tolerance)
    if poly.closed and len(points) < 4:
        points = _ring_triangle(poly.points)
    return replace(poly, points=tuple(points))


def _ring_triangle(points: Sequence[Point]) -> List[Point]:
    # a ring smaller than the tolerance keeps its start, the vertex farthest
    # from it and the vertex farthest from that chord
    ring = list(points[:-1])
    if len(ring) < 3:
        return list(points)
    a = ring[0]
    far = max(range(1, len(ring)), key=lambda i: hypot(ring[i][0] - a[0], ring[i][1] - a[1]))
    third = max((i for i in range(1, len(ring)) if i != far),
                key=lambda i: _segment_distance(ring[i], a, ring[far]))
    return [ring[i] for i in sorted((0, far, third))] + [a]


def smooth_polyline(poly: LabeledPolyline, passes: int = 1) -> LabeledPolyline:
    """Neighbor averaging; open polylines keep their endpoints."""
    pts = list(poly.points)
    if poly.closed:
        ring = pts[:-1]
        n = len(ring)
        if n < 3:
            return poly
        for _ in range(passes):
            ring = [
                ((ring[i - 1][0] + 2 * ring[i][0] + ring[(i + 1) % n][0]) / 4,
                 (ring[i - 1][1] + 2 * ring[i][1] + ring[(i + 1) % n][1]) / 4)
                for i in range(n)
            ]
        pts = ring + [ring[0]]
    else:
        for _ in range(passes):
            pts = [pts[0]] + [
                ((pts[i - 1][0] + 2 * pts[i][0] + pts[i + 1][0]) / 4,
                 (pts[i - 1][1] + 2 * pts[i][1] + pts[i + 1][1]) / 4)
                for i in range(1, len(pts) - 1)
            ] + [pts[-1]]
    return replace(poly, points=tuple(pts))
