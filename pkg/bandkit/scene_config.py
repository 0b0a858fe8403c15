# bandkit/scene_config.py
"""Scene files: a small sectioned key = value format.

    [bands]   step="17/13"  top_level  depth  shifts=halves|hashed:SEED|explicit:r,...
              profile=linear|smoothstep  strict=true|false
    [fields]  u="expr"|image:PATH:LO:HI   d="expr"|const:V|stretch:W|image:PATH:LO:HI
    [view]    rect=x0,y0,x1,y1  t
    [bands2] [fields2]   second band set (weave, flag)
    [output]  mode=bands|curves|centerlines|tear:K|weave|flag  resolution=WxH
              style  thin  tear_style  fresh  simplify  smooth
"""

import re
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from pydantic import ValidationError

from .errors import ConfigError, ExpressionError
from .fields import parse_expression
from .schemas import (
    BandConfig,
    BandSet,
    FieldKind,
    FieldSpec,
    OutputMode,
    OutputSpec,
    Scene,
    ShiftKind,
    ViewRect,
)

SECTION_KEYS = {
    "bands": {"step", "top_level", "depth", "shifts", "profile", "strict"},
    "fields": {"u", "d"},
    "view": {"rect", "t"},
    "bands2": {"step", "top_level", "depth", "shifts", "profile", "strict"},
    "fields2": {"u", "d"},
    "output": {"mode", "resolution", "style", "thin", "tear_style", "fresh", "simplify", "smooth"},
}

REQUIRED = {"bands": ("step",), "fields": ("u", "d")}

# model field -> scene key, for locating validation errors
FIELD_KEYS = {
    "step_num": "step", "step_den": "step", "top_level": "top_level", "depth": "depth",
    "shift_kind": "shifts", "seed": "shifts", "shifts": "shifts", "profile": "profile",
    "strict": "strict", "x0": "rect", "y0": "rect", "x1": "rect", "y1": "rect",
    "mode": "mode", "tear_level": "mode", "width": "resolution", "height": "resolution",
    "style": "style", "thin": "thin", "tear_style": "tear_style", "fresh": "fresh",
    "simplify": "simplify", "smooth": "smooth",
}

Entry = Tuple[str, int]  # raw value, line number
Section = Dict[str, Entry]


def _read_sections(text: str) -> Tuple[Dict[str, Section], Dict[str, int]]:
    sections: Dict[str, Section] = {}
    headers: Dict[str, int] = {}
    current: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(lineno, f"malformed section header {line!r}")
            name = line[1:-1].strip()
            if name not in SECTION_KEYS:
                raise ConfigError(lineno, f"unknown section [{name}]")
            if name in sections:
                raise ConfigError(lineno, f"duplicate section [{name}]")
            sections[name] = {}
            headers[name] = lineno
            current = name
            continue
        if "=" not in line:
            raise ConfigError(lineno, f"expected key = value, got {line!r}")
        if current is None:
            raise ConfigError(lineno, "key outside of any section")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SECTION_KEYS[current]:
            raise ConfigError(lineno, f"unknown key {key!r} in [{current}]")
        if key in sections[current]:
            raise ConfigError(lineno, f"duplicate key {key!r}")
        sections[current][key] = (value, lineno)
    return sections, headers


def _unquote(value: str) -> Tuple[str, bool]:
    if len(value) >= 2 and value[0] == value[-1] == '"':
        return value[1:-1], True
    return value, False


def _number(value: str, line: int, what: str, cast=float):
    try:
        return cast(value)
    except ValueError:
        raise ConfigError(line, f"{what} must be a number, got {value!r}")


def _bool(value: str, line: int, what: str) -> bool:
    low = value.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(line, f"{what} must be true or false, got {value!r}")


def _validation_error(exc: ValidationError, section: Section, fallback: int) -> ConfigError:
    err = exc.errors()[0]
    msg = err["msg"]
    if msg.startswith("Value error, "):
        msg = msg[len("Value error, "):]
    for part in err.get("loc", ()):
        key = FIELD_KEYS.get(part)
        if key and key in section:
            return ConfigError(section[key][1], msg)
    # model-level checks name the key they complain about
    for key in sorted(section, key=len, reverse=True):
        if re.search(rf"\b{re.escape(key)}\b", msg):
            return ConfigError(section[key][1], msg)
    return ConfigError(fallback, msg)


def _parse_bands(section: Section, header: int) -> BandConfig:
    # 1) step
    step, step_line = section["step"]
    step, _ = _unquote(step)
    num, _, den = step.partition("/")
    kwargs = {
        "step_num": _number(num.strip(), step_line, "step numerator", int),
        "step_den": _number(den.strip() or "1", step_line, "step denominator", int),
    }

    # 2) levels
    if "top_level" in section:
        value, line = section["top_level"]
        kwargs["top_level"] = _number(value, line, "top_level", int)
    if "depth" in section:
        value, line = section["depth"]
        kwargs["depth"] = _number(value, line, "depth", int)

    # 3) shifts; the default depends on the step
    if "shifts" in section:
        value, line = section["shifts"]
        value, _ = _unquote(value)
        kind, _, arg = value.partition(":")
        if kind == "halves" and not arg:
            kwargs["shift_kind"] = ShiftKind.halves
        elif kind == "hashed":
            kwargs["shift_kind"] = ShiftKind.hashed
            kwargs["seed"] = _number(arg or "0", line, "hash seed", int)
        elif kind == "explicit":
            kwargs["shift_kind"] = ShiftKind.explicit
            kwargs["shifts"] = tuple(
                _number(r.strip(), line, "shift", float) for r in arg.split(",") if r.strip()
            )
        else:
            raise ConfigError(line, "shifts must be halves, hashed:SEED or explicit:r1,r2,...")
    elif (kwargs["step_num"], kwargs["step_den"]) == (2, 1):
        kwargs["shift_kind"] = ShiftKind.halves
    else:
        kwargs["shift_kind"] = ShiftKind.hashed
        kwargs["seed"] = 0

    # 4) profile and strictness
    if "profile" in section:
        value, line = section["profile"]
        kwargs["profile"] = _unquote(value)[0]
    if "strict" in section:
        value, line = section["strict"]
        kwargs["strict"] = _bool(value, line, "strict")

    try:
        return BandConfig(**kwargs)
    except ValidationError as exc:
        raise _validation_error(exc, section, step_line) from None


def _parse_field(key: str, entry: Entry) -> FieldSpec:
    value, line = entry
    text, quoted = _unquote(value)
    try:
        if quoted:
            parse_expression(text)
            return FieldSpec(kind=FieldKind.expr, expr=text)
        kind, _, arg = text.partition(":")
        if kind == "const":
            return FieldSpec(kind=FieldKind.const, value=_number(arg, line, f"{key} constant"))
        if kind == "stretch":
            return FieldSpec(kind=FieldKind.stretch, value=_number(arg, line, f"{key} spacing"))
        if kind == "image":
            path, lo, hi = arg.rsplit(":", 2)
            return FieldSpec(kind=FieldKind.image, path=path,
                             lo=_number(lo, line, "image low value"),
                             hi=_number(hi, line, "image high value"))
        # bare text is an expression too
        parse_expression(text)
        return FieldSpec(kind=FieldKind.expr, expr=text)
    except ExpressionError as exc:
        raise ConfigError(line, f"{key}: {exc}") from None
    except ValidationError as exc:
        raise _validation_error(exc, {}, line) from None
    except ValueError:
        raise ConfigError(line, f"{key}: image fields are image:PATH:LO:HI") from None


def _parse_view(section: Section, header: int) -> Tuple[ViewRect, float]:
    rect = ViewRect()
    if "rect" in section:
        value, line = section["rect"]
        parts = [p.strip() for p in value.split(",")]
        if len(parts) != 4:
            raise ConfigError(line, "rect needs x0,y0,x1,y1")
        x0, y0, x1, y1 = (_number(p, line, "rect") for p in parts)
        try:
            rect = ViewRect(x0=x0, y0=y0, x1=x1, y1=y1)
        except ValidationError as exc:
            raise _validation_error(exc, section, line) from None
    t = 0.0
    if "t" in section:
        value, line = section["t"]
        t = _number(value, line, "t")
    return rect, t


def _parse_output(section: Section, header: int) -> OutputSpec:
    kwargs = {}
    if "mode" in section:
        value, line = section["mode"]
        mode, _, arg = value.partition(":")
        kwargs["mode"] = mode
        if mode == OutputMode.tear.value:
            kwargs["tear_level"] = _number(arg, line, "tear level", int)
        elif arg:
            raise ConfigError(line, f"mode {mode!r} takes no argument")
    if "resolution" in section:
        value, line = section["resolution"]
        w, sep, h = value.lower().partition("x")
        if not sep:
            raise ConfigError(line, "resolution must be WIDTHxHEIGHT")
        kwargs["width"] = _number(w.strip(), line, "width", int)
        kwargs["height"] = _number(h.strip(), line, "height", int)
    for key, cast in (("style", str), ("thin", float), ("tear_style", str), ("fresh", str),
                      ("simplify", float), ("smooth", int)):
        if key in section:
            value, line = section[key]
            kwargs[key] = value if cast is str else _number(value, line, key, cast)
    try:
        return OutputSpec(**kwargs)
    except ValidationError as exc:
        raise _validation_error(exc, section, header) from None


def parse_scene_config(text: str) -> Scene:
    sections, headers = _read_sections(text)

    # 1) required sections and keys
    for name, keys in REQUIRED.items():
        if name not in sections:
            raise ConfigError(0, f"missing section [{name}]")
        for key in keys:
            if key not in sections[name]:
                raise ConfigError(headers[name], f"missing key {key!r} in [{name}]")

    # 2) primary band set
    bands = _parse_bands(sections["bands"], headers["bands"])
    u = _parse_field("u", sections["fields"]["u"])
    d = _parse_field("d", sections["fields"]["d"])
    if u.kind == FieldKind.stretch:
        raise ConfigError(sections["fields"]["u"][1], "u cannot be a stretch field")

    # 3) optional second set
    second = None
    if "bands2" in sections and "fields2" not in sections:
        raise ConfigError(headers["bands2"], "[bands2] needs a [fields2] section")
    if "fields2" in sections:
        fields2 = sections["fields2"]
        for key in ("u", "d"):
            if key not in fields2:
                raise ConfigError(headers["fields2"], f"missing key {key!r} in [fields2]")
        bands2 = bands
        if "bands2" in sections:
            if "step" not in sections["bands2"]:
                raise ConfigError(headers["bands2"], "missing key 'step' in [bands2]")
            bands2 = _parse_bands(sections["bands2"], headers["bands2"])
        u2 = _parse_field("u", fields2["u"])
        if u2.kind == FieldKind.stretch:
            raise ConfigError(fields2["u"][1], "u cannot be a stretch field")
        second = BandSet(u=u2, d=_parse_field("d", fields2["d"]), bands=bands2)

    # 4) view and output
    view, t = _parse_view(sections.get("view", {}), headers.get("view", 0))
    output = _parse_output(sections.get("output", {}), headers.get("output", 0))

    try:
        return Scene(u=u, d=d, bands=bands, view=view, t=t, second=second, output=output)
    except ValidationError as exc:
        output_keys = sections.get("output", {})
        where = output_keys["mode"][1] if "mode" in output_keys else headers.get("fields", 0)
        raise _validation_error(exc, output_keys, where) from None


def load_scene(path: Union[str, Path]) -> Tuple[Scene, Path]:
    """Parse a scene file; image paths resolve against the returned directory."""
    path = Path(path)
    return parse_scene_config(path.read_text(encoding="utf-8")), path.resolve().parent


# --- printing ---

def _format_field(spec: FieldSpec) -> str:
    if spec.kind == FieldKind.expr:
        return f'"{spec.expr}"'
    if spec.kind == FieldKind.const:
        return f"const:{spec.value!r}"
    if spec.kind == FieldKind.stretch:
        return f"stretch:{spec.value!r}"
    return f"image:{spec.path}:{spec.lo!r}:{spec.hi!r}"


def _format_bands(cfg: BandConfig) -> list:
    if cfg.shift_kind == ShiftKind.halves:
        shifts = "halves"
    elif cfg.shift_kind == ShiftKind.hashed:
        shifts = f"hashed:{cfg.seed}"
    else:
        shifts = "explicit:" + ",".join(repr(r) for r in cfg.shifts)
    return [
        f'step = "{cfg.step_num}/{cfg.step_den}"',
        f"top_level = {cfg.top_level}",
        f"depth = {cfg.depth}",
        f"shifts = {shifts}",
        f"profile = {cfg.profile.value}",
        f"strict = {'true' if cfg.strict else 'false'}",
    ]


def print_scene_config(scene: Scene) -> str:
    out = scene.output
    mode = out.mode.value
    if out.mode == OutputMode.tear:
        mode = f"tear:{out.tear_level}"
    lines = ["[bands]", *_format_bands(scene.bands), "",
             "[fields]", f"u = {_format_field(scene.u)}", f"d = {_format_field(scene.d)}", ""]
    if scene.second is not None:
        lines += ["[bands2]", *_format_bands(scene.second.bands), "",
                  "[fields2]", f"u = {_format_field(scene.second.u)}",
                  f"d = {_format_field(scene.second.d)}", ""]
    v = scene.view
    lines += [
        "[view]",
        f"rect = {v.x0!r},{v.y0!r},{v.x1!r},{v.y1!r}",
        f"t = {scene.t!r}",
        "",
        "[output]",
        f"mode = {mode}",
        f"resolution = {out.width}x{out.height}",
        f"style = {out.style.value}",
        f"thin = {out.thin!r}",
        f"tear_style = {out.tear_style.value}",
        f"fresh = {out.fresh.value}",
        f"simplify = {out.simplify!r}",
        f"smooth = {out.smooth}",
    ]
    return "\n".join(lines) + "\n"


def band_config_from_keys(values: Dict[str, str]) -> BandConfig:
    """Build a BandConfig from [bands] keys given outside a scene file."""
    unknown = set(values) - SECTION_KEYS["bands"]
    if unknown:
        raise ConfigError(0, f"unknown band keys: {', '.join(sorted(unknown))}")
    if "step" not in values:
        raise ConfigError(0, "missing key 'step'")
    return _parse_bands({k: (v, 0) for k, v in values.items()}, 0)
