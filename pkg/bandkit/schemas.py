# bandkit/schemas.py

from enum import Enum
from fractions import Fraction
from math import gcd
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .data import DEFAULT_DEPTH, DEFAULT_TOP_LEVEL, MAX_DEPTH


class ShiftKind(str, Enum):
    halves = "halves"
    hashed = "hashed"
    explicit = "explicit"


class Profile(str, Enum):
    linear = "linear"
    smoothstep = "smoothstep"


class BandConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    step_num: int = Field(2, ge=1)
    step_den: int = Field(1, ge=1)
    top_level: int = DEFAULT_TOP_LEVEL
    depth: int = Field(DEFAULT_DEPTH, ge=1, le=MAX_DEPTH)
    shift_kind: ShiftKind = ShiftKind.halves
    seed: int = 0
    shifts: Tuple[float, ...] = ()
    profile: Profile = Profile.linear
    strict: bool = False  # reject out-of-range d instead of clamping

    @model_validator(mode="after")
    def check_invariants(self):
        n, m = self.step_num, self.step_den
        if gcd(n, m) != 1:
            raise ValueError(f"step {n}/{m} must be an irreducible fraction")
        if not (m < n <= 2 * m):
            raise ValueError("step must lie in (1,2]")
        if self.shift_kind == ShiftKind.explicit:
            if len(self.shifts) not in (self.depth, self.depth + 1):
                raise ValueError(
                    f"explicit shifts need {self.depth} or {self.depth + 1} values, got {len(self.shifts)}"
                )
            for r in self.shifts:
                if not (0.0 <= r < 1.0):
                    raise ValueError("explicit shifts must lie in [0,1)")
        elif self.shifts:
            raise ValueError("shift values are only accepted with explicit shifts")
        return self

    @property
    def step(self) -> float:
        return self.step_num / self.step_den

    @property
    def step_fraction(self) -> Fraction:
        return Fraction(self.step_num, self.step_den)

    @property
    def bottom_level(self) -> int:
        return self.top_level + self.depth

    def explicit_shift(self, level: int) -> Optional[float]:
        # D+1 values start at the top level; D values start one below it
        offset = level - self.top_level
        if len(self.shifts) == self.depth:
            if offset == 0:
                return 0.0
            offset -= 1
        if 0 <= offset < len(self.shifts):
            return self.shifts[offset]
        return None


class FieldKind(str, Enum):
    expr = "expr"
    const = "const"
    stretch = "stretch"
    image = "image"


class FieldSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: FieldKind
    expr: Optional[str] = None
    value: Optional[float] = None  # const value, or world spacing for stretch
    path: Optional[str] = None
    lo: float = 0.0
    hi: float = 1.0

    @model_validator(mode="after")
    def check_kind(self):
        if self.kind == FieldKind.expr and not self.expr:
            raise ValueError("expression field needs an expression")
        if self.kind in (FieldKind.const, FieldKind.stretch) and self.value is None:
            raise ValueError(f"{self.kind.value} field needs a value")
        if self.kind == FieldKind.stretch and self.value <= 0:
            raise ValueError("stretch spacing must be positive")
        if self.kind == FieldKind.image and not self.path:
            raise ValueError("image field needs a path")
        return self


class ViewRect(BaseModel):
    model_config = ConfigDict(frozen=True)

    x0: float = 0.0
    y0: float = 0.0
    x1: float = 1.0
    y1: float = 1.0

    @model_validator(mode="after")
    def check_extent(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("view rectangle must have x1 > x0 and y1 > y0")
        return self

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0


class OutputMode(str, Enum):
    bands = "bands"
    curves = "curves"
    centerlines = "centerlines"
    tear = "tear"
    weave = "weave"
    flag = "flag"


class ColorStyle(str, Enum):
    hash = "hash"
    gray = "gray"
    shade = "shade"
    levels = "levels"


class TearStyle(str, Enum):
    discard = "discard"
    darken = "darken"


class FreshStyle(str, Enum):
    keep = "keep"
    hide = "hide"
    mark = "mark"


class OutputSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: OutputMode = OutputMode.bands
    tear_level: Optional[int] = None
    width: int = Field(256, ge=1)
    height: int = Field(256, ge=1)
    style: ColorStyle = ColorStyle.shade
    thin: float = Field(0.25, gt=0.0, le=0.5)
    tear_style: TearStyle = TearStyle.discard
    fresh: FreshStyle = FreshStyle.keep
    simplify: float = Field(0.0, ge=0.0)
    smooth: int = Field(0, ge=0)

    @model_validator(mode="after")
    def check_tear(self):
        if self.mode == OutputMode.tear and self.tear_level is None:
            raise ValueError("tear mode needs a cutoff level (mode=tear:K)")
        return self


class BandSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    u: FieldSpec
    d: FieldSpec
    bands: BandConfig

    @field_validator("u")
    @classmethod
    def u_is_not_derived(cls, v: FieldSpec):
        if v.kind == FieldKind.stretch:
            raise ValueError("u cannot be a stretch field")
        return v


class Scene(BaseModel):
    model_config = ConfigDict(frozen=True)

    u: FieldSpec
    d: FieldSpec
    bands: BandConfig
    view: ViewRect = ViewRect()
    t: float = 0.0
    second: Optional[BandSet] = None
    output: OutputSpec = OutputSpec()

    @field_validator("u")
    @classmethod
    def u_is_not_derived(cls, v: FieldSpec):
        if v.kind == FieldKind.stretch:
            raise ValueError("u cannot be a stretch field")
        return v

    @model_validator(mode="after")
    def check_second_set(self):
        if self.output.mode in (OutputMode.weave, OutputMode.flag) and self.second is None:
            raise ValueError(f"{self.output.mode.value} mode needs [bands2]/[fields2] sections")
        if self.output.tear_level is not None:
            lo, hi = self.bands.top_level, self.bands.bottom_level
            if not (lo <= self.output.tear_level <= hi):
                raise ValueError(f"tear level must lie in [{lo}, {hi}]")
        return self

    @property
    def primary(self) -> BandSet:
        return BandSet(u=self.u, d=self.d, bands=self.bands)


# --- HTTP payloads ---

class BandSamplePublic(BaseModel):
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


class SceneRequest(BaseModel):
    config: str
    width: Optional[int] = Field(None, ge=1, le=4096)
    height: Optional[int] = Field(None, ge=1, le=4096)
    threads: int = Field(1, ge=0, le=64)


class PolylineOut(BaseModel):
    idA: int
    idB: int
    closed: bool
    points: List[Tuple[float, float]]


class CurveDocument(BaseModel):
    polylines: List[PolylineOut]


class InfoReport(BaseModel):
    width: int
    height: int
    distinct_ids: int
    just_appeared_fraction: float
    invalid_cells: int
    clamped_cells: int
    levels: List[int]
    closures: List[Tuple[int, int, int]]  # (fine level, closing bands, bands examined)
