# bandkit/routers/scenes_routes.py

from fastapi import APIRouter
from fastapi.responses import Response

from bandkit.deps import band_errors_as_http, load_request_scene
from bandkit.extract import centerlines_from_map, extract_borders
from bandkit.raster import rasterize
from bandkit.render import render_scene
from bandkit.report import curve_document, info_from_map, postprocess
from bandkit.schemas import CurveDocument, InfoReport, SceneRequest

router = APIRouter(
    prefix="/scenes",
    tags=["scenes"],
)


@router.post("/info", response_model=InfoReport)
def scene_info(req: SceneRequest):
    scene = load_request_scene(req)
    with band_errors_as_http():
        idmap = rasterize(scene, req.width, req.height, req.threads)
    return info_from_map(idmap)


@router.post("/render")
def scene_render(req: SceneRequest):
    scene = load_request_scene(req)
    with band_errors_as_http():
        image = render_scene(scene, req.width, req.height, req.threads)
    return Response(content=image.to_ppm(), media_type="image/x-portable-pixmap")


@router.post("/curves", response_model=CurveDocument)
def scene_curves(req: SceneRequest):
    scene = load_request_scene(req)
    with band_errors_as_http():
        # 1) Rasterize, 2) chain borders, 3) smooth/simplify as the scene asks
        idmap = rasterize(scene, req.width, req.height, req.threads)
        polylines = postprocess(extract_borders(idmap), scene.output)
    return curve_document(polylines)


@router.post("/centerlines", response_model=CurveDocument)
def scene_centerlines(req: SceneRequest):
    scene = load_request_scene(req)
    with band_errors_as_http():
        idmap = rasterize(scene, req.width, req.height, req.threads)
        polylines = postprocess(centerlines_from_map(idmap), scene.output)
    return curve_document(polylines)
