# tests/conftest.py

from pathlib import Path

import pytest

from bandkit.schemas import BandConfig, ShiftKind

SCENES_DIR = Path(__file__).resolve().parents[1] / "scenes"


@pytest.fixture
def halves8() -> BandConfig:
    return BandConfig(depth=8)


@pytest.fixture
def zeros8() -> BandConfig:
    return BandConfig(depth=8, shift_kind=ShiftKind.explicit, shifts=(0.0,) * 9)


@pytest.fixture
def zero_shifts():
    """BandConfig factory with every level shift at 0."""

    def make(step_num: int = 2, step_den: int = 1, depth: int = 8, **kw) -> BandConfig:
        return BandConfig(step_num=step_num, step_den=step_den, depth=depth,
                          shift_kind=ShiftKind.explicit, shifts=(0.0,) * (depth + 1), **kw)

    return make


@pytest.fixture
def scenes_dir() -> Path:
    return SCENES_DIR


@pytest.fixture
def write_scene(tmp_path: Path):
    def write(text: str, name: str = "test.scene") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write


LINEAR_SCENE = """\
[bands]
step = "2"
depth = 4
shifts = explicit:0,0,0,0

[fields]
u = "x"
d = const:3

[view]
rect = 0,0,1,1

[output]
resolution = 64x64
"""


@pytest.fixture
def linear_scene_text() -> str:
    return LINEAR_SCENE


def pytest_addoption(parser):
    parser.addoption("--update-golden", action="store_true",
                     help="Rewrite tests/golden/digests.json from the current output.")


@pytest.fixture
def update_golden(request) -> bool:
    return request.config.getoption("--update-golden")
