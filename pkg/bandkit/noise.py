# bandkit/noise.py
"""Deterministic 2D value noise on numpy arrays."""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_Y_SALT = np.uint64(0xD6E8FEB86659FD93)


def splitmix_u64(x: np.ndarray) -> np.ndarray:
    x = x + _GOLDEN
    x = (x ^ (x >> np.uint64(30))) * _MIX1
    x = (x ^ (x >> np.uint64(27))) * _MIX2
    return x ^ (x >> np.uint64(31))


def _as_u64(a: np.ndarray) -> np.ndarray:
    return a.astype(np.int64).astype(np.uint64)


def lattice_value(ix, iy, seed) -> np.ndarray:
    """Hash of an integer lattice corner, in [0, 1)."""
    with np.errstate(over="ignore", invalid="ignore"):
        ix = _as_u64(np.asarray(ix))
        iy = _as_u64(np.asarray(iy))
        seed = _as_u64(np.asarray(seed))
        h = splitmix_u64(splitmix_u64(ix ^ (seed * _GOLDEN)) ^ (iy * _Y_SALT))
    return (h >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def value_noise(x, y, seed) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    seed = np.asarray(seed, dtype=np.float64)
    fx0 = np.floor(x)
    fy0 = np.floor(y)
    fx = x - fx0
    fy = y - fy0
    with np.errstate(invalid="ignore"):
        ix = np.where(np.isfinite(fx0), fx0, 0.0)
        iy = np.where(np.isfinite(fy0), fy0, 0.0)
        s = np.where(np.isfinite(seed), np.floor(seed), 0.0)
    v00 = lattice_value(ix, iy, s)
    v10 = lattice_value(ix + 1, iy, s)
    v01 = lattice_value(ix, iy + 1, s)
    v11 = lattice_value(ix + 1, iy + 1, s)
    a = v00 + (v10 - v00) * fx
    b = v01 + (v11 - v01) * fx
    return a + (b - a) * fy
