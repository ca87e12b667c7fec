"""Command-line surface: argparse verbs and file renderers."""

from .main import build_parser, main
from .render import HeatScale, RenderMode, graymap, gridlines, render

__all__ = [
    "HeatScale",
    "RenderMode",
    "build_parser",
    "graymap",
    "gridlines",
    "main",
    "render",
]
