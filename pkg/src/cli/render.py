"""
File-only renderings of sampled fields.

"grid" mode maps every `stride`-th source gridline through the field and
writes the images as polylines in CSV; "heat" mode writes |values| as a plain
(P2) portable graymap, brightest at the maximum.
"""

import csv
import logging
from enum import Enum
from pathlib import Path
from typing import Optional, Union

import numpy as np

from src.errors import ParameterRangeError
from src.grid.models import SampledField

logger = logging.getLogger(__name__)

GRAY_LEVELS = 255
DEFAULT_LINES = 16


class RenderMode(str, Enum):
    GRID = "grid"
    HEAT = "heat"


class HeatScale(str, Enum):
    LINEAR = "linear"
    LOG = "log"


def gridlines(field: SampledField, lines: int = DEFAULT_LINES) -> list[tuple[str, int, np.ndarray]]:
    """
    Images of the source gridlines.

    Returns:
        (direction, index, points) per polyline; direction "row" follows
        axis 1 at a fixed axis-0 index, "col" follows axis 0.
    """
    if lines < 1:
        raise ParameterRangeError("lines", lines, "At least one gridline is required")
    values = field.as_array()
    n = field.grid.n
    stride = max(1, n // lines)
    picks = range(stride // 2, n, stride)
    polylines = [("row", i, values[i, :]) for i in picks]
    polylines.extend(("col", j, values[:, j]) for j in picks)
    return polylines


def graymap(field: SampledField, scale: Union[HeatScale, str] = HeatScale.LINEAR) -> np.ndarray:
    """
    Integer gray levels 0..255 of |values|, top row at the largest axis-0 coordinate.

    The log scale maps v to log1p(v / v_min) with v_min the smallest positive
    magnitude, so a field spanning decades stays visible.
    """
    scale = HeatScale(scale)
    mag = np.abs(field.as_array())[::-1, :]
    peak = float(np.max(mag)) if mag.size else 0.0
    if peak <= 0.0:
        return np.zeros(mag.shape, dtype=int)
    if scale == HeatScale.LOG:
        floor = float(np.min(mag[mag > 0]))
        mag = np.log1p(mag / floor)
        peak = float(np.log1p(peak / floor))
    return np.rint(GRAY_LEVELS * mag / peak).astype(int)


def write_gridlines(
    field: SampledField,
    path: Union[str, Path],
    lines: int = DEFAULT_LINES,
    provenance: Optional[dict] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        if provenance:
            f.write(f"# quasibel {provenance.get('version', '')} config {provenance.get('config_hash', '')}\n")
        writer = csv.writer(f)
        writer.writerow(["line", "direction", "index", "x", "y"])
        for line_id, (direction, index, points) in enumerate(gridlines(field, lines)):
            for w in points:
                writer.writerow([line_id, direction, index, f"{w.real:.17g}", f"{w.imag:.17g}"])
    logger.debug(f"Wrote gridlines of '{field.label}' to {path}")
    return path


def write_graymap(
    field: SampledField,
    path: Union[str, Path],
    scale: Union[HeatScale, str] = HeatScale.LINEAR,
    provenance: Optional[dict] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    levels = graymap(field, scale)
    rows, cols = levels.shape
    header = ["P2"]
    if provenance:
        header.append(f"# quasibel {provenance.get('version', '')} config {provenance.get('config_hash', '')}")
    header.extend([f"{cols} {rows}", str(GRAY_LEVELS)])
    body = "\n".join(" ".join(str(v) for v in row) for row in levels)
    path.write_text("\n".join(header) + "\n" + body + "\n")
    logger.debug(f"Wrote {cols}x{rows} graymap of '{field.label}' to {path}")
    return path


def render(
    field: SampledField,
    mode: Union[RenderMode, str],
    path: Union[str, Path],
    scale: Union[HeatScale, str] = HeatScale.LINEAR,
    lines: int = DEFAULT_LINES,
    provenance: Optional[dict] = None,
) -> Path:
    """Render a field to `path` in the given mode."""
    mode = RenderMode(mode)
    if mode == RenderMode.GRID:
        return write_gridlines(field, path, lines, provenance)
    return write_graymap(field, path, scale, provenance)
