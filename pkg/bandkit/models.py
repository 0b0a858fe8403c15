# bandkit/models.py

from typing import NamedTuple


class QuantizedDensity(NamedTuple):
    fine_level: int
    coarse_level: int
    alpha: float  # pull toward the coarse level, after the profile


class LocalBand(NamedTuple):
    level: int
    index: int
    left_border: float
    right_border: float
    local_coord: float


class GlobalBandId(NamedTuple):
    id: int
    just_appeared: bool
    birth_level: int


class BandSample(NamedTuple):
    id: int
    just_appeared: bool
    birth_level: int
    level: int
    index: int
    left_border: float
    right_border: float
    local_coord: float
    v: float
    d: float

    @property
    def width(self) -> float:
        return self.right_border - self.left_border
