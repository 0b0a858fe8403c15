# bandkit/render.py
"""Images from IdMaps, and the id-driven effects: tearing, thinning, weaving."""

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from .core import MASK64
from .data import render_settings
from .errors import BandError
from .models import BandSample
from .noise import splitmix_u64
from .raster import IdMap, rasterize, rasterize_second
from .schemas import BandConfig, ColorStyle, FreshStyle, OutputMode, Scene, TearStyle

logger = logging.getLogger(__name__)

RGB = Tuple[int, int, int]


@dataclass(frozen=True)
class Image:
    pixels: np.ndarray  # (height, width, 3) uint8, row-major

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def to_ppm(self) -> bytes:
        header = f"P6\n{self.width} {self.height}\n255\n".encode("ascii")
        return header + np.ascontiguousarray(self.pixels, dtype=np.uint8).tobytes()


def write_ppm(image: Image, path: Union[str, Path]) -> None:
    Path(path).write_bytes(image.to_ppm())


# --- colors ---

def hash_colors(ids: np.ndarray) -> np.ndarray:
    """Stable color per id, channels in [64, 255]."""
    with np.errstate(over="ignore"):
        h = splitmix_u64(np.asarray(ids, dtype=np.int64).astype(np.uint64))
    channels = [(h >> np.uint64(shift)) & np.uint64(0xFF) for shift in (40, 24, 8)]
    rgb = np.stack(channels, axis=-1).astype(np.uint16)
    return (64 + (rgb * 192 >> 8)).astype(np.uint8)


def hash_color(band_id: int) -> RGB:
    r, g, b = hash_colors(np.array([band_id]))[0]
    return int(r), int(g), int(b)


def shade_factor(local_coord: np.ndarray) -> np.ndarray:
    start = render_settings["shade_start"]
    strength = render_settings["shade_strength"]
    edge = np.maximum(0.0, np.abs(local_coord - 0.5) * 2 - start) / (1 - start)
    return 1 - strength * edge


def _scale(rgb: np.ndarray, factor) -> np.ndarray:
    return np.clip(np.rint(rgb.astype(np.float64) * factor[..., None]), 0, 255).astype(np.uint8)


def _gray(values: np.ndarray) -> np.ndarray:
    g = np.clip(np.rint(values * 255), 0, 255).astype(np.uint8)
    return np.repeat(g[..., None], 3, axis=-1)


def colorize(idmap: IdMap, style: ColorStyle = ColorStyle.hash,
             fresh: FreshStyle = FreshStyle.keep) -> Image:
    if style == ColorStyle.hash:
        rgb = hash_colors(idmap.ids)
    elif style == ColorStyle.shade:
        rgb = _scale(hash_colors(idmap.ids), shade_factor(idmap.local_coord))
    elif style == ColorStyle.gray:
        rgb = _gray(idmap.local_coord)
    else:
        levels = idmap.level.astype(np.float64)
        lo, hi = levels.min(), levels.max()
        rgb = _gray(0.15 + 0.85 * (levels - lo) / max(hi - lo, 1.0))

    if fresh == FreshStyle.hide:
        rgb[idmap.just_appeared] = render_settings["background"]
    elif fresh == FreshStyle.mark:
        dim = np.where(idmap.just_appeared, render_settings["fresh_dim"], 1.0)
        rgb = _scale(rgb, dim)
    rgb[~idmap.valid] = render_settings["invalid"]
    return Image(rgb)


# --- effects ---

def _keep_mask(cutoff_level: int, cfg: BandConfig) -> int:
    if not (cfg.top_level <= cutoff_level <= cfg.bottom_level):
        raise BandError(f"cutoff level must lie in [{cfg.top_level}, {cfg.bottom_level}]")
    return (1 << (cfg.depth - (cutoff_level - cfg.top_level))) - 1


def tear_keep(sample: BandSample, cutoff_level: int, cfg: BandConfig) -> bool:
    """Keep bands born at or above `cutoff_level`: their low path bits are all zero."""
    return sample.id & _keep_mask(cutoff_level, cfg) == 0


def tear_keep_array(ids: np.ndarray, cutoff_level: int, cfg: BandConfig) -> np.ndarray:
    return (ids & np.int64(_keep_mask(cutoff_level, cfg))) == 0


class WeaveSide(str, Enum):
    A = "A"
    B = "B"


def weave_front(a: BandSample, b: BandSample) -> WeaveSide:
    parity = ((a.id ^ b.id) & MASK64).bit_count() % 2
    return WeaveSide.A if parity == 0 else WeaveSide.B


def weave_front_mask(map_a: IdMap, map_b: IdMap) -> np.ndarray:
    """True where set A's band is in front at a crossing.

    Parity of the XOR picks between the smaller and the larger id, so swapping
    the two sets brings the same band to the front.
    """
    even = np.bitwise_count((map_a.ids ^ map_b.ids).astype(np.uint64)) % 2 == 0
    # equal ids: the strand nearer its own center wins
    tie = np.abs(map_a.local_coord - 0.5) <= np.abs(map_b.local_coord - 0.5)
    return np.where(map_a.ids < map_b.ids, even,
                    np.where(map_a.ids > map_b.ids, ~even, tie))


def thin_band(sample: BandSample, half_width: float) -> bool:
    if not (0 < half_width <= 0.5):
        raise BandError("half width fraction must lie in (0, 0.5]")
    return abs(sample.local_coord - 0.5) < half_width


def thin_band_array(local_coord: np.ndarray, half_width: float) -> np.ndarray:
    if not (0 < half_width <= 0.5):
        raise BandError("half width fraction must lie in (0, 0.5]")
    return np.abs(local_coord - 0.5) < half_width


def render_tear(idmap: IdMap, cutoff_level: int, style: ColorStyle = ColorStyle.shade,
                tear_style: TearStyle = TearStyle.discard) -> Image:
    image = colorize(idmap, style)
    torn = ~tear_keep_array(idmap.ids, cutoff_level, idmap.cfg) & idmap.valid
    rgb = image.pixels
    if tear_style == TearStyle.discard:
        rgb[torn] = render_settings["background"]
    else:
        rgb = _scale(rgb, np.where(torn, render_settings["tear_dim"], 1.0))
    return Image(rgb)


def weave_image(map_a: IdMap, map_b: IdMap, half_width: float,
                palette: Optional[Tuple[RGB, RGB]] = None) -> Image:
    if map_a.ids.shape != map_b.ids.shape:
        raise BandError("weave needs two maps of the same size")
    color_a, color_b = palette or (render_settings["weave_a"], render_settings["weave_b"])
    cover_a = thin_band_array(map_a.local_coord, half_width) & map_a.valid
    cover_b = thin_band_array(map_b.local_coord, half_width) & map_b.valid
    front_a = weave_front_mask(map_a, map_b)
    show_a = cover_a & (~cover_b | front_a)
    show_b = cover_b & (~cover_a | ~front_a)

    h, w = map_a.ids.shape
    rgb = np.empty((h, w, 3), dtype=np.uint8)
    rgb[:] = render_settings["background"]
    # shading across each strand's width
    shade_a = _scale(np.broadcast_to(np.array(color_a, dtype=np.uint8), (h, w, 3)),
                     1 - 0.6 * np.abs(map_a.local_coord - 0.5))
    shade_b = _scale(np.broadcast_to(np.array(color_b, dtype=np.uint8), (h, w, 3)),
                     1 - 0.6 * np.abs(map_b.local_coord - 0.5))
    rgb[show_a] = shade_a[show_a]
    rgb[show_b] = shade_b[show_b]
    return Image(rgb)


def render_weave(scene: Scene, width: Optional[int] = None, height: Optional[int] = None,
                 threads: int = 1, base_dir: Optional[Path] = None) -> Image:
    if scene.second is None:
        raise BandError("weaving needs a second band set")
    map_a = rasterize(scene, width, height, threads, base_dir)
    map_b = rasterize_second(scene, width, height, threads, base_dir)
    return weave_image(map_a, map_b, scene.output.thin)


def flag_image(map_a: IdMap, map_b: IdMap) -> Image:
    """Two band sets colored together: constant along each set's bands."""
    a = hash_colors(map_a.ids).astype(np.uint16)
    b = hash_colors(map_b.ids).astype(np.uint16)
    rgb = ((a + b) // 2).astype(np.uint8)
    rgb[~(map_a.valid & map_b.valid)] = render_settings["invalid"]
    return Image(rgb)


def render_scene(scene: Scene, width: Optional[int] = None, height: Optional[int] = None,
                 threads: int = 1, base_dir: Optional[Path] = None) -> Image:
    out = scene.output
    if out.mode == OutputMode.weave:
        return render_weave(scene, width, height, threads, base_dir)
    if out.mode == OutputMode.flag:
        if scene.second is None:
            raise BandError("flag coloring needs a second band set")
        return flag_image(rasterize(scene, width, height, threads, base_dir),
                          rasterize_second(scene, width, height, threads, base_dir))
    idmap = rasterize(scene, width, height, threads, base_dir)
    if out.mode == OutputMode.tear:
        return render_tear(idmap, out.tear_level, out.style, out.tear_style)
    return colorize(idmap, out.style, out.fresh)
