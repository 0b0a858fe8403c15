# bandkit/routers/bands_routes.py

from fastapi import APIRouter, Query

from bandkit.core import band_lookup
from bandkit.deps import band_errors_as_http
from bandkit.scene_config import band_config_from_keys
from bandkit.schemas import BandSamplePublic

router = APIRouter(
    prefix="/bands",
    tags=["bands"],
)


@router.get("/lookup", response_model=BandSamplePublic)
def lookup(
    v: float,
    d: float,
    step: str = "2",
    top_level: int = 0,
    depth: int = Query(24, ge=1),
    shifts: str = "",
    profile: str = "linear",
):
    keys = {"step": step, "top_level": str(top_level), "depth": str(depth), "profile": profile}
    if shifts:
        keys["shifts"] = shifts

    with band_errors_as_http():
        # 1) Validate the band configuration
        cfg = band_config_from_keys(keys)
        # 2) Look up the band
        sample = band_lookup(v, d, cfg)
    return BandSamplePublic(**sample._asdict())
