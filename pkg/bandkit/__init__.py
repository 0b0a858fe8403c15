# bandkit/__init__.py
"""Procedural band patterns: stable band ids over density and direction fields."""

from .core import band_lookup, global_id, local_band, quantize
from .errors import BandError
from .schemas import BandConfig, Scene

__all__ = ["BandConfig", "BandError", "Scene", "band_lookup", "global_id", "local_band", "quantize"]
