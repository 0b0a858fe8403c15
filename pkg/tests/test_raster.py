# tests/test_raster.py

import time

import numpy as np
import pytest

from bandkit.core import band_lookup
from bandkit.errors import RasterError
from bandkit.raster import cell_centers, rasterize, rasterize_set, sample_point
from bandkit.scene_config import parse_scene_config
from bandkit.schemas import BandSet, FieldKind, FieldSpec, ViewRect


def expr(source: str) -> FieldSpec:
    return FieldSpec(kind=FieldKind.expr, expr=source)


def test_cell_centers_start_half_a_cell_in():
    xs, ys = cell_centers(ViewRect(x0=1.0, y0=-1.0, x1=3.0, y1=1.0), 4, 2)
    assert xs.tolist() == [1.25, 1.75, 2.25, 2.75]
    assert ys.tolist() == [-0.5, 0.5]


def test_linear_scene_has_four_vertical_bands(linear_scene_text):
    scene = parse_scene_config(linear_scene_text)
    idmap = rasterize(scene)
    assert (idmap.height, idmap.width) == (64, 64)
    assert len(np.unique(idmap.ids)) == 4
    # u depends on x only
    assert (idmap.ids == idmap.ids[0]).all()
    assert idmap.invalid_count == 0
    assert idmap.clamped_count == 0


@pytest.mark.parametrize("threads", [2, 4, 0])
def test_raster_does_not_depend_on_thread_count(threads, zero_shifts):
    band_set = BandSet(u=expr("x + 0.2*sin(5*y)"), d=expr("2 + 9*vnoise(3*x, 3*y, 5)"),
                       bands=zero_shifts(3, 2, depth=10))
    view = ViewRect(x0=-1.0, y0=0.0, x1=2.0, y1=1.5)
    one = rasterize_set(band_set, view, 0.0, 100, 37, threads=1)
    many = rasterize_set(band_set, view, 0.0, 100, 37, threads=threads)
    assert np.array_equal(one.ids, many.ids)
    assert np.array_equal(one.local_coord, many.local_coord)
    assert np.array_equal(one.just_appeared, many.just_appeared)


def test_sample_point_matches_the_cell(zero_shifts):
    band_set = BandSet(u=expr("sqrt((x - 0.5)^2 + (y - 0.5)^2)"), d=expr("5 + 10*x*y"),
                       bands=zero_shifts(depth=8))
    view = ViewRect()
    idmap = rasterize_set(band_set, view, 0.0, 32, 32)
    for row, col in [(0, 0), (5, 17), (31, 31), (16, 3)]:
        x, y = idmap.center(row, col)
        s = sample_point(band_set, view, x, y)
        assert s.id == idmap.ids[row, col]
        assert s.local_coord == idmap.local_coord[row, col]
        assert idmap.to_cell(x, y) == (row, col)


def test_tripled_resolution_keeps_ids_at_shared_centers(zero_shifts):
    band_set = BandSet(u=expr("x + 0.1*sin(7*y)"), d=expr("3 + x"), bands=zero_shifts(depth=8))
    view = ViewRect()
    coarse = rasterize_set(band_set, view, 0.0, 40, 40)
    fine = rasterize_set(band_set, view, 0.0, 120, 120)
    assert np.array_equal(coarse.ids, fine.ids[1::3, 1::3])


def test_invalid_cells_are_flagged(zero_shifts):
    band_set = BandSet(u=expr("sqrt(x - 0.25)"), d=FieldSpec(kind=FieldKind.const, value=3.0),
                       bands=zero_shifts(depth=4))
    idmap = rasterize_set(band_set, ViewRect(), 0.0, 64, 8)
    assert idmap.invalid_count == 16 * 8
    assert not idmap.valid[:, :16].any()
    assert idmap.valid[:, 16:].all()


def test_mostly_invalid_raster_fails(zero_shifts):
    band_set = BandSet(u=expr("sqrt(x - 0.75)"), d=FieldSpec(kind=FieldKind.const, value=3.0),
                       bands=zero_shifts(depth=4))
    with pytest.raises(RasterError) as err:
        rasterize_set(band_set, ViewRect(), 0.0, 64, 8)
    assert err.value.total == 512


def test_clamped_cells_are_counted(zero_shifts, caplog):
    band_set = BandSet(u=expr("x"), d=FieldSpec(kind=FieldKind.const, value=0.5),
                       bands=zero_shifts(depth=4))
    with caplog.at_level("WARNING", logger="bandkit"):
        idmap = rasterize_set(band_set, ViewRect(), 0.0, 16, 16)
    assert idmap.clamped_count == 256
    assert "clamped" in caplog.text


def test_raster_size_must_be_positive(zero_shifts):
    band_set = BandSet(u=expr("x"), d=expr("3"), bands=zero_shifts(depth=4))
    with pytest.raises(ValueError):
        rasterize_set(band_set, ViewRect(), 0.0, 0, 10)


@pytest.mark.perf
def test_megapixel_raster_speed(zero_shifts):
    band_set = BandSet(u=expr("x + 0.2*sin(5*y)"), d=expr("4 + 40*vnoise(3*x, 3*y, 5)"),
                       bands=zero_shifts(depth=12))
    view = ViewRect()

    started = time.perf_counter()
    one = rasterize_set(band_set, view, 0.0, 1024, 1024, threads=1)
    single = time.perf_counter() - started
    assert single < 2.0

    started = time.perf_counter()
    four = rasterize_set(band_set, view, 0.0, 1024, 1024, threads=4)
    parallel = time.perf_counter() - started
    assert np.array_equal(one.ids, four.ids)
    assert single / parallel >= 2.0


def test_columns_pair_up_at_level_one(zero_shifts):
    band_set = BandSet(u=expr("x"), d=FieldSpec(kind=FieldKind.const, value=2.0),
                       bands=zero_shifts(depth=4))
    idmap = rasterize_set(band_set, ViewRect(), 0.0, 4, 4)
    ids = idmap.ids
    assert (ids == ids[0]).all()
    assert ids[0, 0] == ids[0, 1]
    assert ids[0, 2] == ids[0, 3]
    assert ids[0, 1] != ids[0, 2]


def test_rotated_field_transposes_the_map(zero_shifts):
    cfg = zero_shifts(depth=4)
    const = FieldSpec(kind=FieldKind.const, value=2.0)
    along_x = rasterize_set(BandSet(u=expr("x"), d=const, bands=cfg), ViewRect(), 0.0, 4, 4)
    along_y = rasterize_set(BandSet(u=expr("y"), d=const, bands=cfg), ViewRect(), 0.0, 4, 4)
    assert np.array_equal(along_y.ids, along_x.ids.T)
    assert np.array_equal(along_y.local_coord, along_x.local_coord.T)


def test_single_cell_is_the_lookup_at_the_view_center(zero_shifts):
    cfg = zero_shifts(depth=8)
    band_set = BandSet(u=expr("x + 2*y"), d=FieldSpec(kind=FieldKind.const, value=3.0), bands=cfg)
    idmap = rasterize_set(band_set, ViewRect(x0=1.0, y0=2.0, x1=3.0, y1=5.0), 0.0, 1, 1)
    assert idmap.center(0, 0) == (2.0, 3.5)
    s = band_lookup(9.0, 3.0, cfg)
    assert idmap.ids[0, 0] == s.id
    assert idmap.local_coord[0, 0] == s.local_coord
