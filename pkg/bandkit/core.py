# bandkit/core.py
"""Band lookup B(v, d): density quantization, border pull, hierarchical numbering.

Every function here is pure. The scalar functions and `band_lookup_array` read the
same per-level constants from `level_tables`, and evaluate the same float
expressions in the same order, so both paths agree bit for bit.
"""

import math
from bisect import bisect_left
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Tuple

import numpy as np

from .data import ID_BITS, PRECISION_LIMIT, QUANTIZE_EPS
from .errors import BandError, DensityRangeError, DepthBudgetError, PrecisionError, ShiftRangeError
from .models import BandSample, GlobalBandId, LocalBand, QuantizedDensity
from .schemas import BandConfig, Profile, ShiftKind

MASK64 = (1 << 64) - 1
ALPHA_MAX = 1.0 - 2.0 ** -53  # largest double below 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def unit_hash(x: int) -> float:
    return (splitmix64(x & MASK64) >> 11) * 2.0 ** -53


def level_spacing(level: int, cfg: BandConfig) -> float:
    # exact (M/N)^L, rounded once
    return float(Fraction(cfg.step_den, cfg.step_num) ** level)


def level_density(level: int, cfg: BandConfig) -> float:
    return float(cfg.step_fraction ** level)


def level_shift(level: int, cfg: BandConfig) -> float:
    if cfg.shift_kind == ShiftKind.halves:
        return 0.5
    if cfg.shift_kind == ShiftKind.hashed:
        return unit_hash(cfg.seed ^ splitmix64(level & MASK64))
    r = cfg.explicit_shift(level)
    if r is None:
        raise ShiftRangeError(level)
    return r


def border_position(level: int, i: int, cfg: BandConfig) -> float:
    return (i + level_shift(level, cfg)) * level_spacing(level, cfg)


class LevelTables(NamedTuple):
    top: int
    depth: int
    spacing: Tuple[float, ...]    # levels top .. top+D
    shift: Tuple[float, ...]      # levels top .. top+D
    density: Tuple[float, ...]    # levels top-1 .. top+D
    threshold: Tuple[float, ...]  # levels top .. top+D
    spacing_arr: np.ndarray
    shift_arr: np.ndarray
    density_arr: np.ndarray
    threshold_arr: np.ndarray


@lru_cache(maxsize=128)
def level_tables(cfg: BandConfig) -> LevelTables:
    top, depth = cfg.top_level, cfg.depth
    levels = range(top, top + depth + 1)
    spacing = tuple(level_spacing(L, cfg) for L in levels)
    shift = tuple(level_shift(L, cfg) for L in levels)
    density = tuple(level_density(L, cfg) for L in range(top - 1, top + depth + 1))
    # smallest L with step^L >= d * step^-eps  <=>  L = ceil(log_step(d) - eps)
    widen = math.exp(QUANTIZE_EPS * math.log(cfg.step))
    threshold = tuple(rho * widen for rho in density[1:])
    return LevelTables(
        top=top,
        depth=depth,
        spacing=spacing,
        shift=shift,
        density=density,
        threshold=threshold,
        spacing_arr=np.array(spacing),
        shift_arr=np.array(shift),
        density_arr=np.array(density),
        threshold_arr=np.array(threshold),
    )


def density_range(cfg: BandConfig) -> Tuple[float, float]:
    t = level_tables(cfg)
    return t.density[1], t.density[-1]


def admit_density(d: float, cfg: BandConfig) -> float:
    lo, hi = density_range(cfg)
    if cfg.strict:
        if not (lo < d <= hi):
            raise DensityRangeError(d, lo, hi)
        return d
    if math.isnan(d):
        raise DensityRangeError(d, lo, hi)
    return min(max(d, lo), hi)


def _profile(alpha: float, profile: Profile) -> float:
    if profile == Profile.smoothstep:
        alpha = alpha * alpha * (3.0 - 2.0 * alpha)
    return alpha


def quantize(d: float, cfg: BandConfig) -> QuantizedDensity:
    t = level_tables(cfg)
    d = admit_density(d, cfg)
    k = bisect_left(t.threshold, d)
    rho_f, rho_c = t.density[k + 1], t.density[k]
    alpha = min(max((rho_f - d) / (rho_f - rho_c), 0.0), ALPHA_MAX)
    alpha = min(_profile(alpha, cfg.profile), ALPHA_MAX)
    return QuantizedDensity(t.top + k, t.top + k - 1, alpha)


def _nearest_index(x: float, h: float, r: float) -> int:
    # round half toward +inf
    return math.floor(x / h - r + 0.5)


def nearest_coarse_border(x: float, coarse_level: int, cfg: BandConfig) -> Tuple[int, float]:
    h = level_spacing(coarse_level, cfg)
    r = level_shift(coarse_level, cfg)
    j = _nearest_index(x, h, r)
    return j, (j + r) * h


def _deformed_border(k, hf, rf, hc, rc, alpha):
    b = (k + rf) * hf
    c = (math.floor(b / hc - rc + 0.5) + rc) * hc
    return b + alpha * (c - b)


def _local_band_at(v: float, q: QuantizedDensity, t: LevelTables) -> LocalBand:
    fi = q.fine_level - t.top
    ci = max(fi - 1, 0)  # at the top level alpha is 0 and the coarse set is unused
    hf, rf = t.spacing[fi], t.shift[fi]
    hc, rc = t.spacing[ci], t.shift[ci]
    alpha = q.alpha

    if abs(v) / hf >= PRECISION_LIMIT or abs(v) / t.spacing[0] >= 2.0 ** (ID_BITS - t.depth):
        raise PrecisionError(v, q.fine_level)
    i = math.floor(v / hf - rf)
    left = _deformed_border(i, hf, rf, hc, rc, alpha)
    right = _deformed_border(i + 1, hf, rf, hc, rc, alpha)
    if v < left:
        i -= 1
        left = _deformed_border(i, hf, rf, hc, rc, alpha)
        right = _deformed_border(i + 1, hf, rf, hc, rc, alpha)
    elif v >= right:
        i += 1
        left = _deformed_border(i, hf, rf, hc, rc, alpha)
        right = _deformed_border(i + 1, hf, rf, hc, rc, alpha)
    if not left <= v < right:
        raise PrecisionError(v, q.fine_level)
    return LocalBand(q.fine_level, i, left, right, (v - left) / (right - left))


def local_band(v: float, d: float, cfg: BandConfig) -> LocalBand:
    if not math.isfinite(v):
        raise BandError(f"parameter value must be finite, got {v!r}")
    return _local_band_at(v, quantize(d, cfg), level_tables(cfg))


def global_id(band: LocalBand, cfg: BandConfig) -> GlobalBandId:
    t = level_tables(cfg)
    top, depth = t.top, t.depth
    if band.level - top > depth:
        raise DepthBudgetError(band.level, top, depth)
    if band.level < top:
        raise BandError(f"level {band.level} is coarser than the top level {top}")

    idx = band.index
    path = 0
    birth = None
    just_appeared = False
    for lam in range(band.level, top, -1):
        h, r = t.spacing[lam - top], t.shift[lam - top]
        hc, rc = t.spacing[lam - top - 1], t.shift[lam - top - 1]
        jl = math.floor((idx + r) * h / hc - rc + 0.5)
        jr = math.floor((idx + 1 + r) * h / hc - rc + 0.5)
        if jl == jr:
            path |= 1 << (depth - (lam - top))
            if birth is None:
                birth = lam
            if lam == band.level:
                just_appeared = True
        idx = jl
    return GlobalBandId((idx << depth) + path, just_appeared, top if birth is None else birth)


def band_lookup(v: float, d: float, cfg: BandConfig) -> BandSample:
    band = local_band(v, d, cfg)
    gid = global_id(band, cfg)
    return BandSample(
        id=gid.id,
        just_appeared=gid.just_appeared,
        birth_level=gid.birth_level,
        level=band.level,
        index=band.index,
        left_border=band.left_border,
        right_border=band.right_border,
        local_coord=band.local_coord,
        v=v,
        d=d,
    )


def closes(level: int, index: int, cfg: BandConfig) -> bool:
    """True when band `index` at `level` collapses onto one border of level-1."""
    jl, _ = nearest_coarse_border(border_position(level, index, cfg), level - 1, cfg)
    jr, _ = nearest_coarse_border(border_position(level, index + 1, cfg), level - 1, cfg)
    return jl == jr


def closure_counts(cfg: BandConfig, level: int, start: int, count: int) -> int:
    return sum(closes(level, k, cfg) for k in range(start, start + count))


# --- array path ---

class BandArrays(NamedTuple):
    id: np.ndarray            # int64
    just_appeared: np.ndarray  # bool
    birth_level: np.ndarray   # int16
    level: np.ndarray         # int16
    index: np.ndarray         # int64
    left: np.ndarray
    right: np.ndarray
    local_coord: np.ndarray
    clamped: np.ndarray       # bool
    valid: np.ndarray         # bool


def _deformed_border_arr(k, hf, rf, hc, rc, alpha):
    b = (k + rf) * hf
    c = (np.floor(b / hc - rc + 0.5) + rc) * hc
    return b + alpha * (c - b)


def band_lookup_array(v: np.ndarray, d: np.ndarray, cfg: BandConfig) -> BandArrays:
    """Vectorized band_lookup over matching arrays of v and d.

    Non-finite inputs, and parameters past float precision (see
    PRECISION_LIMIT), produce invalid cells instead of errors; their other
    fields must be ignored.
    """
    t = level_tables(cfg)
    top, depth = t.top, t.depth
    v = np.asarray(v, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    v, d = np.broadcast_arrays(v, d)

    valid = np.isfinite(v) & np.isfinite(d)
    lo, hi = t.density[1], t.density[-1]
    in_range = (d > lo) & (d <= hi)
    clamped = valid & ~in_range
    if cfg.strict and clamped.any():
        bad = float(d[clamped].flat[0])
        raise DensityRangeError(bad, lo, hi)
    v = np.where(valid, v, 0.0)
    d = np.where(valid, np.minimum(np.maximum(d, lo), hi), lo)

    # quantize
    k = np.searchsorted(t.threshold_arr, d, side="left")
    rho_f = t.density_arr[k + 1]
    rho_c = t.density_arr[k]
    alpha = np.minimum(np.maximum((rho_f - d) / (rho_f - rho_c), 0.0), ALPHA_MAX)
    if cfg.profile == Profile.smoothstep:
        alpha = np.minimum(alpha * alpha * (3.0 - 2.0 * alpha), ALPHA_MAX)

    # local band
    ci = np.maximum(k - 1, 0)
    hf, rf = t.spacing_arr[k], t.shift_arr[k]
    hc, rc = t.spacing_arr[ci], t.shift_arr[ci]
    av = np.abs(v)
    exhausted = (av / hf >= PRECISION_LIMIT) | (av / t.spacing[0] >= 2.0 ** (ID_BITS - depth))
    valid &= ~exhausted
    v = np.where(exhausted, 0.0, v)
    i = np.floor(v / hf - rf).astype(np.int64)
    left = _deformed_border_arr(i, hf, rf, hc, rc, alpha)
    right = _deformed_border_arr(i + 1, hf, rf, hc, rc, alpha)
    i = i - (v < left) + (v >= right)
    left = _deformed_border_arr(i, hf, rf, hc, rc, alpha)
    right = _deformed_border_arr(i + 1, hf, rf, hc, rc, alpha)
    valid &= (left <= v) & (v < right)
    clamped &= valid
    with np.errstate(divide="ignore", invalid="ignore"):
        local_coord = (v - left) / (right - left)

    # global id
    level = (k + top).astype(np.int16)
    idx = i.copy()
    path = np.zeros(v.shape, dtype=np.int64)
    birth = np.full(v.shape, top, dtype=np.int16)
    born = np.zeros(v.shape, dtype=bool)
    just_appeared = np.zeros(v.shape, dtype=bool)
    deepest = int(k.max()) + top if k.size else top
    for lam in range(deepest, top, -1):
        active = level >= lam
        h, r = t.spacing[lam - top], t.shift[lam - top]
        hc_l, rc_l = t.spacing[lam - top - 1], t.shift[lam - top - 1]
        jl = np.floor((idx + r) * h / hc_l - rc_l + 0.5).astype(np.int64)
        jr = np.floor((idx + 1 + r) * h / hc_l - rc_l + 0.5).astype(np.int64)
        closing = active & (jl == jr)
        path |= closing.astype(np.int64) << (depth - (lam - top))
        first = closing & ~born
        birth[first] = lam
        born |= closing
        just_appeared |= closing & (level == lam)
        idx = np.where(active, jl, idx)

    return BandArrays(
        id=idx * (1 << depth) + path,
        just_appeared=just_appeared,
        birth_level=birth,
        level=level,
        index=i,
        left=left,
        right=right,
        local_coord=local_coord,
        clamped=clamped,
        valid=valid,
    )
