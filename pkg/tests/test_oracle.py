# tests/test_oracle.py

import itertools

import numpy as np
import pytest

from bandkit.core import band_lookup, band_lookup_array, level_density, quantize
from bandkit.errors import DepthBudgetError
from bandkit.oracle import oracle_bands
from bandkit.schemas import BandConfig, ShiftKind

DEPTH = 5
STEPS = [(2, 1), (3, 2), (17, 13)]


def shift_configs(n: int, m: int):
    yield BandConfig(step_num=n, step_den=m, depth=DEPTH,
                     shift_kind=ShiftKind.explicit, shifts=(0.0,) * (DEPTH + 1))
    yield BandConfig(step_num=n, step_den=m, depth=DEPTH, shift_kind=ShiftKind.halves)
    yield BandConfig(step_num=n, step_den=m, depth=DEPTH, shift_kind=ShiftKind.hashed, seed=7)


CONFIGS = [cfg for n, m in STEPS for cfg in shift_configs(n, m)]


def test_three_halves_opens_one_band_per_two_top_bands(zero_shifts):
    cfg = zero_shifts(3, 2, depth=4)
    tree = oracle_bands(cfg, (0.0, 2.0), 1)
    inside = [b for b in tree.leaves if 0 <= b.index < 3]
    assert [b.closes for b in inside] == [False, True, False]
    top = 1 << cfg.depth
    assert [b.id for b in inside] == [0, top | (top >> 1), top]


def test_top_level_tree_is_the_identity_tiling(halves8):
    tree = oracle_bands(halves8, (0.0, 3.0), 0)
    for band in tree.leaves:
        assert band.id == band.index << 8
        assert band.right - band.left == 1.0


def test_oracle_depth_budget(halves8):
    with pytest.raises(DepthBudgetError):
        oracle_bands(halves8, (0.0, 1.0), 9)


def test_oracle_agrees_with_worked_example(halves8):
    tree = oracle_bands(halves8, (0.0, 1.0), 2)
    assert tree.id_at(0.6, alpha=0.5) == 128
    assert tree.id_at(0.26, alpha=0.5) == 192


@pytest.mark.parametrize("cfg", CONFIGS)
def test_lookup_matches_oracle(cfg):
    rng = np.random.default_rng(2024)
    window = (-2.0, 2.0)
    for fine_level, alpha in itertools.product(range(1, DEPTH + 1), (0.0, 0.25, 0.75)):
        rho_f = level_density(fine_level, cfg)
        rho_c = level_density(fine_level - 1, cfg)
        d = rho_f - alpha * (rho_f - rho_c)
        q = quantize(d, cfg)
        assert q.fine_level == fine_level

        tree = oracle_bands(cfg, window, fine_level)
        table = [iv for iv in tree.intervals(q.alpha) if iv[1] > iv[0]]
        lefts = np.array([iv[0] for iv in table])
        rights = np.array([iv[1] for iv in table])
        ids = np.array([iv[2] for iv in table], dtype=np.int64)

        v = rng.uniform(*window, 2000)
        pos = np.searchsorted(lefts, v, side="right") - 1
        boundary = (v - lefts[pos] < 1e-9) | (rights[pos] - v < 1e-9)
        res = band_lookup_array(v, np.full_like(v, d), cfg)
        keep = ~boundary
        assert keep.sum() > 1900
        np.testing.assert_array_equal(res.id[keep], ids[pos][keep])


@pytest.mark.parametrize("cfg", CONFIGS[:3])
def test_scalar_lookup_matches_oracle(cfg):
    tree = oracle_bands(cfg, (0.0, 1.0), 3)
    d = level_density(3, cfg) * 0.9
    q = quantize(d, cfg)
    for v in np.linspace(0.01, 0.99, 97):
        expected = tree.id_at(float(v), q.alpha)
        assert band_lookup(float(v), d, cfg).id == expected
