# bandkit/deps.py

from contextlib import contextmanager

from fastapi import HTTPException

from .errors import BandError, RasterError
from .scene_config import parse_scene_config
from .schemas import Scene, SceneRequest


@contextmanager
def band_errors_as_http():
    try:
        yield
    except RasterError as exc:
        raise HTTPException(status_code=500, detail=str(exc))
    except (BandError, OSError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))


def load_request_scene(req: SceneRequest) -> Scene:
    with band_errors_as_http():
        return parse_scene_config(req.config)
