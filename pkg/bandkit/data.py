# bandkit/data.py  (config/constants)

DEFAULT_TOP_LEVEL = 0
DEFAULT_DEPTH = 24
MAX_DEPTH = 40  # ids are int64: top index keeps 23 bits

# quantize: L_f = ceil(log_step(d) - QUANTIZE_EPS)
QUANTIZE_EPS = 1e-9

# |v| / h_f at or past this leaves no fraction bits for the local coordinate
PRECISION_LIMIT = 2.0 ** 52
# a just-appeared band narrower than this share of its spacing is still opening
DEPLOYED_WIDTH = 1.0 - 1e-9
# |v| / h_top must stay below 2^(ID_BITS - depth) so ids fit int64
ID_BITS = 62

GRADIENT_FLOOR = 1e-6
GRADIENT_STEP_FRACTION = 1e-4  # of the view width

# rasterize fails when more than this share of cells is invalid
INVALID_CELL_LIMIT = 0.5

# rows per raster task; fixed so results never depend on the thread count
ROW_BLOCK = 16

JSON_DIGITS = 9

render_settings = {
    "invalid": (255, 0, 255),
    "background": (24, 24, 28),
    "weave_a": (214, 96, 54),
    "weave_b": (58, 112, 190),
    "fresh_dim": 0.45,
    "tear_dim": 0.35,
    "shade_start": 0.8,
    "shade_strength": 0.5,
}

svg_settings = {
    "stroke": "#202020",
    "stroke_width_px": 1.0,
    "canvas_px": 800,
}
