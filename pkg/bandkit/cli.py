# bandkit/cli.py

import functools
import json
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

import click
from pydantic import ValidationError

from . import logs
from .errors import BandError, ConfigError, ExpressionError
from .extract import extract_borders, extract_centerlines
from .raster import rasterize
from .render import render_scene, write_ppm
from .report import curve_schema, curves_json, curves_svg, format_info, postprocess, scene_info
from .scene_config import load_scene

logger = logging.getLogger(__name__)

EXIT_CONFIG = 1
EXIT_RUNTIME = 2

config_option = click.option(
    "--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False),
    help="Scene file.",
)
threads_option = click.option(
    "--threads", default=0, show_default=True, type=click.IntRange(min=0),
    help="Raster workers, 0 = one per CPU.",
)


def guarded(fn):
    """Map bandkit errors to exit codes, message on stderr."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigError, ExpressionError, ValidationError) as exc:
            click.echo(f"config error: {exc}", err=True)
            raise SystemExit(EXIT_CONFIG)
        except (BandError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(EXIT_RUNTIME)

    return wrapper


@contextmanager
def _usage_as_config_error():
    # usage errors exit like config errors
    try:
        yield
    except click.UsageError as exc:
        exc.exit_code = EXIT_CONFIG
        raise


class BandGroup(click.Group):
    def make_context(self, *args, **kwargs):
        with _usage_as_config_error():
            return super().make_context(*args, **kwargs)

    def invoke(self, ctx):
        with _usage_as_config_error():
            return super().invoke(ctx)


@click.group(cls=BandGroup)
@click.option("-v", "--verbose", count=True, help="-v for INFO, -vv for DEBUG.")
def cli(verbose: int) -> None:
    """Procedural band patterns from scene files."""
    logs.configure(verbose)


@cli.command()
@config_option
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="PPM file.")
@threads_option
@guarded
def render(config_path: str, out_path: str, threads: int) -> None:
    """Render the scene's output mode to a PPM image."""
    scene, base_dir = load_scene(config_path)
    image = render_scene(scene, threads=threads, base_dir=base_dir)
    write_ppm(image, out_path)
    logger.info("wrote %dx%d image to %s", image.width, image.height, out_path)


def _write_curves(polylines, scene, out_path: Optional[str]) -> None:
    polylines = postprocess(polylines, scene.output)
    if out_path is None:
        click.echo(curves_json(polylines), nl=False)
        return
    path = Path(out_path)
    if path.suffix.lower() == ".svg":
        path.write_text(curves_svg(polylines, scene.view), encoding="utf-8")
    else:
        path.write_text(curves_json(polylines), encoding="utf-8")
    logger.info("wrote %d polylines to %s", len(polylines), path)


@cli.command()
@config_option
@click.option("--out", "out_path", type=click.Path(dir_okay=False),
              help="Output .svg or .json, JSON on stdout when omitted.")
@threads_option
@guarded
def curves(config_path: str, out_path: Optional[str], threads: int) -> None:
    """Extract the labeled network of band borders."""
    scene, base_dir = load_scene(config_path)
    idmap = rasterize(scene, threads=threads, base_dir=base_dir)
    _write_curves(extract_borders(idmap), scene, out_path)


@cli.command()
@config_option
@click.option("--out", "out_path", type=click.Path(dir_okay=False),
              help="Output .svg or .json, JSON on stdout when omitted.")
@threads_option
@guarded
def centerlines(config_path: str, out_path: Optional[str], threads: int) -> None:
    """Extract the middle lines of fully deployed bands."""
    scene, base_dir = load_scene(config_path)
    lines = extract_centerlines(scene, threads=threads, base_dir=base_dir)
    _write_curves(lines, scene, out_path)


@cli.command()
@config_option
@threads_option
@guarded
def info(config_path: str, threads: int) -> None:
    """Print band statistics of the scene's raster."""
    scene, base_dir = load_scene(config_path)
    report = scene_info(scene, threads=threads, base_dir=base_dir)
    click.echo(format_info(report), nl=False)


@cli.command()
def schema() -> None:
    """Print the JSON schema of curve documents."""
    click.echo(json.dumps(curve_schema(), indent=2, sort_keys=True))


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("bandkit.main:app", host=host, port=port, log_config=None)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
