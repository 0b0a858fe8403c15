# bandkit/raster.py
"""Band lookup over a pixel grid, the CPU analog of a pixel shader pass."""

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .core import band_lookup, band_lookup_array
from .data import INVALID_CELL_LIMIT, ROW_BLOCK
from .errors import BandError, RasterError
from .fields import Sampler, field_sampler
from .models import BandSample
from .schemas import BandConfig, BandSet, Scene, ViewRect

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IdMap:
    """Row-major grid of band lookups; row r, column c sits at the cell center."""

    view: ViewRect
    cfg: BandConfig
    ids: np.ndarray
    just_appeared: np.ndarray
    birth_level: np.ndarray
    level: np.ndarray
    local_coord: np.ndarray
    width_v: np.ndarray
    clamped: np.ndarray
    valid: np.ndarray

    @property
    def width(self) -> int:
        return self.ids.shape[1]

    @property
    def height(self) -> int:
        return self.ids.shape[0]

    @property
    def cell_size(self) -> Tuple[float, float]:
        return self.view.width / self.width, self.view.height / self.height

    @property
    def invalid_count(self) -> int:
        return int((~self.valid).sum())

    @property
    def clamped_count(self) -> int:
        return int(self.clamped.sum())

    def corner(self, row: int, col: int) -> Tuple[float, float]:
        """World position of lattice corner (row, col), 0 <= row <= height."""
        cw, ch = self.cell_size
        return self.view.x0 + col * cw, self.view.y0 + row * ch

    def center(self, row: float, col: float) -> Tuple[float, float]:
        cw, ch = self.cell_size
        return self.view.x0 + (col + 0.5) * cw, self.view.y0 + (row + 0.5) * ch

    def to_cell(self, x: float, y: float) -> Tuple[int, int]:
        cw, ch = self.cell_size
        col = int(np.floor((x - self.view.x0) / cw))
        row = int(np.floor((y - self.view.y0) / ch))
        return min(max(row, 0), self.height - 1), min(max(col, 0), self.width - 1)


def cell_centers(view: ViewRect, width: int, height: int) -> Tuple[np.ndarray, np.ndarray]:
    xs = view.x0 + (np.arange(width) + 0.5) * (view.width / width)
    ys = view.y0 + (np.arange(height) + 0.5) * (view.height / height)
    return xs, ys


def set_samplers(band_set: BandSet, view: ViewRect,
                 base_dir: Optional[Path] = None) -> Tuple[Sampler, Sampler]:
    u = field_sampler(band_set.u, view, base_dir=base_dir)
    d = field_sampler(band_set.d, view, u=u, base_dir=base_dir)
    return u, d


def sample_point(band_set: BandSet, view: ViewRect, x: float, y: float, t: float = 0.0,
                 base_dir: Optional[Path] = None) -> BandSample:
    """Direct band lookup at one world point."""
    u, d = set_samplers(band_set, view, base_dir)
    px, py = np.array([x]), np.array([y])
    return band_lookup(float(u(px, py, t)[0]), float(d(px, py, t)[0]), band_set.bands)


def resolve_threads(threads: int) -> int:
    return threads if threads > 0 else (os.cpu_count() or 1)


def rasterize_set(band_set: BandSet, view: ViewRect, t: float, width: int, height: int,
                  threads: int = 1, base_dir: Optional[Path] = None) -> IdMap:
    if width < 1 or height < 1:
        raise ValueError("raster size must be at least 1x1")
    cfg = band_set.bands
    u_field, d_field = set_samplers(band_set, view, base_dir)
    xs, ys = cell_centers(view, width, height)

    shape = (height, width)
    ids = np.zeros(shape, dtype=np.int64)
    just_appeared = np.zeros(shape, dtype=bool)
    birth_level = np.zeros(shape, dtype=np.int16)
    level = np.zeros(shape, dtype=np.int16)
    local_coord = np.zeros(shape, dtype=np.float64)
    width_v = np.zeros(shape, dtype=np.float64)
    clamped = np.zeros(shape, dtype=bool)
    valid = np.zeros(shape, dtype=bool)

    def run_block(r0: int) -> None:
        r1 = min(r0 + ROW_BLOCK, height)
        x, y = np.meshgrid(xs, ys[r0:r1])
        res = band_lookup_array(u_field(x, y, t), d_field(x, y, t), cfg)
        ids[r0:r1] = res.id
        just_appeared[r0:r1] = res.just_appeared
        birth_level[r0:r1] = res.birth_level
        level[r0:r1] = res.level
        local_coord[r0:r1] = res.local_coord
        width_v[r0:r1] = res.right - res.left
        clamped[r0:r1] = res.clamped
        valid[r0:r1] = res.valid

    workers = resolve_threads(threads)
    started = time.perf_counter()
    blocks = range(0, height, ROW_BLOCK)
    if workers == 1:
        for r0 in blocks:
            run_block(r0)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_block, blocks))
    logger.debug("rasterized %dx%d with %d worker(s) in %.3fs",
                 width, height, workers, time.perf_counter() - started)

    idmap = IdMap(
        view=view,
        cfg=cfg,
        ids=ids,
        just_appeared=just_appeared,
        birth_level=birth_level,
        level=level,
        local_coord=local_coord,
        width_v=width_v,
        clamped=clamped,
        valid=valid,
    )
    invalid = idmap.invalid_count
    total = width * height
    if invalid:
        logger.warning("%d of %d cells have NaN/Inf field values", invalid, total)
    if invalid > INVALID_CELL_LIMIT * total:
        raise RasterError(invalid, total)
    if idmap.clamped_count:
        logger.warning("density clamped to the band range in %d cell(s)", idmap.clamped_count)
    return idmap


def rasterize(scene: Scene, width: Optional[int] = None, height: Optional[int] = None,
              threads: int = 1, base_dir: Optional[Path] = None) -> IdMap:
    width = width or scene.output.width
    height = height or scene.output.height
    return rasterize_set(scene.primary, scene.view, scene.t, width, height, threads, base_dir)


def rasterize_second(scene: Scene, width: Optional[int] = None, height: Optional[int] = None,
                     threads: int = 1, base_dir: Optional[Path] = None) -> IdMap:
    if scene.second is None:
        raise BandError("scene has no second band set")
    width = width or scene.output.width
    height = height or scene.output.height
    return rasterize_set(scene.second, scene.view, scene.t, width, height, threads, base_dir)
