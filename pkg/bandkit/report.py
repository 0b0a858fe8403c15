# bandkit/report.py
"""What the cli and the HTTP service emit: info reports and curve documents."""

import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .core import closure_counts
from .data import JSON_DIGITS, svg_settings
from .extract import LabeledPolyline, simplify_polyline, smooth_polyline
from .raster import IdMap, rasterize
from .schemas import CurveDocument, InfoReport, OutputSpec, PolylineOut, Scene, ViewRect

logger = logging.getLogger(__name__)

CLOSURE_WINDOWS = 4  # runs of N fine bands examined per transition


def info_from_map(idmap: IdMap) -> InfoReport:
    cfg = idmap.cfg
    valid = idmap.valid
    n_valid = int(valid.sum())
    levels = sorted(int(x) for x in np.unique(idmap.level[valid])) if n_valid else []
    fresh = float(idmap.just_appeared[valid].sum()) / n_valid if n_valid else 0.0

    closures = []
    deepest = max(levels) if levels else cfg.top_level
    for level in range(cfg.top_level + 1, min(deepest, cfg.bottom_level) + 1):
        examined = CLOSURE_WINDOWS * cfg.step_num
        closures.append((level, closure_counts(cfg, level, 0, examined), examined))

    return InfoReport(
        width=idmap.width,
        height=idmap.height,
        distinct_ids=len(np.unique(idmap.ids[valid])),
        just_appeared_fraction=fresh,
        invalid_cells=idmap.invalid_count,
        clamped_cells=idmap.clamped_count,
        levels=levels,
        closures=closures,
    )


def scene_info(scene: Scene, width: Optional[int] = None, height: Optional[int] = None,
               threads: int = 1, base_dir: Optional[Path] = None) -> InfoReport:
    return info_from_map(rasterize(scene, width, height, threads, base_dir))


def format_info(report: InfoReport) -> str:
    lines = [
        f"raster: {report.width}x{report.height}",
        f"distinct ids: {report.distinct_ids}",
        f"just-appeared fraction: {report.just_appeared_fraction:.6f}",
        "fine levels: " + (" ".join(str(x) for x in report.levels) or "-"),
    ]
    for level, closing, examined in report.closures:
        lines.append(f"closures {level}->{level - 1}: {closing} of {examined} bands")
    if report.clamped_cells:
        lines.append(f"warning: density clamped in {report.clamped_cells} cell(s)")
    if report.invalid_cells:
        lines.append(f"warning: {report.invalid_cells} invalid cell(s)")
    return "\n".join(lines) + "\n"


# --- curves ---

def postprocess(polylines: Iterable[LabeledPolyline], output: OutputSpec) -> List[LabeledPolyline]:
    out = []
    for poly in polylines:
        if output.smooth:
            poly = smooth_polyline(poly, output.smooth)
        if output.simplify:
            poly = simplify_polyline(poly, output.simplify)
        out.append(poly)
    return out


def _round(x: float) -> float:
    return float(f"{x:.{JSON_DIGITS}g}")


def curve_document(polylines: Sequence[LabeledPolyline]) -> CurveDocument:
    return CurveDocument(polylines=[
        PolylineOut(
            idA=p.id_a,
            idB=p.id_b,
            closed=p.closed,
            points=[(_round(x), _round(y)) for x, y in p.points],
        )
        for p in polylines
    ])


def curves_json(polylines: Sequence[LabeledPolyline]) -> str:
    return curve_document(polylines).model_dump_json() + "\n"


def curve_schema() -> dict:
    return CurveDocument.model_json_schema()


def _num(x: float) -> str:
    return f"{x:.{JSON_DIGITS}g}"


def _path_data(poly: LabeledPolyline) -> str:
    pts = poly.points[:-1] if poly.closed else poly.points
    head, *rest = pts
    parts = [f"M{_num(head[0])} {_num(head[1])}"]
    parts += [f"L{_num(x)} {_num(y)}" for x, y in rest]
    if poly.closed:
        parts.append("Z")
    return " ".join(parts)


def curves_svg(polylines: Sequence[LabeledPolyline], view: ViewRect) -> str:
    canvas = svg_settings["canvas_px"]
    aspect = view.height / view.width
    width_px, height_px = canvas, max(1, round(canvas * aspect))
    stroke_width = svg_settings["stroke_width_px"] * view.width / canvas
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width_px}" height="{height_px}" '
        f'viewBox="{_num(view.x0)} {_num(view.y0)} {_num(view.width)} {_num(view.height)}">',
        f'<g fill="none" stroke="{svg_settings["stroke"]}" stroke-width="{_num(stroke_width)}">',
    ]
    for poly in polylines:
        if len(poly.points) < 2:
            continue
        lines.append(f'<path d="{_path_data(poly)}"><title>{poly.id_a} {poly.id_b}</title></path>')
    lines += ["</g>", "</svg>"]
    return "\n".join(lines) + "\n"
