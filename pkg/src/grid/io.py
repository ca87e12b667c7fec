"""
QBF-1 field files.

Line 1 is a JSON header {"format": "QBF-1", "kind", "n", "extent", "label",
"provenance"}; the remaining lines are `re(z),im(z),re(v),im(v)` in node order.
Values are written with 17 significant digits so a round trip is bit-exact.
"""

import io
import json
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
from pydantic import ValidationError

from src.errors import FieldFormatError, GridSpecError

from .models import ComplexGrid, SampledField

logger = logging.getLogger(__name__)

FORMAT_TAG = "QBF-1"


def write_field(
    field: SampledField,
    path: Union[str, Path],
    provenance: Optional[dict] = None,
) -> Path:
    """Write a field to a QBF-1 file and return the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = field.grid
    header = {
        "format": FORMAT_TAG,
        "kind": grid.kind.value,
        "n": grid.n,
        "extent": list(grid.extent),
        "label": field.label,
    }
    if provenance:
        header["provenance"] = provenance
    z = grid.nodes
    v = field.values
    rows = np.column_stack([z.real, z.imag, v.real, v.imag])
    buffer = io.StringIO()
    np.savetxt(buffer, rows, fmt="%.17g", delimiter=",")
    path.write_text(json.dumps(header) + "\n" + buffer.getvalue())
    logger.debug(f"Wrote {grid.node_count} nodes to {path}")
    return path


def read_header(path: Union[str, Path]) -> dict:
    path = Path(path)
    with path.open() as fh:
        first = fh.readline()
    try:
        header = json.loads(first)
    except json.JSONDecodeError as e:
        raise FieldFormatError(str(path), f"header is not JSON ({e.msg})") from e
    if not isinstance(header, dict):
        raise FieldFormatError(str(path), "header is not a JSON object")
    fmt = header.get("format", FORMAT_TAG)
    if fmt != FORMAT_TAG:
        raise FieldFormatError(str(path), f"unsupported format {fmt!r}")
    missing = [k for k in ("kind", "n", "extent") if k not in header]
    if missing:
        raise FieldFormatError(str(path), f"header lacks {', '.join(missing)}")
    return header


def read_field(path: Union[str, Path]) -> SampledField:
    """
    Read a QBF-1 file.

    Raises:
        FileNotFoundError: If the file does not exist
        FieldFormatError: If the header or rows are malformed or the stored
            node coordinates disagree with the declared grid
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Field file not found: {path}")
    header = read_header(path)
    try:
        grid = ComplexGrid(kind=header["kind"], n=header["n"], extent=tuple(header["extent"]))
    except (ValidationError, GridSpecError, ValueError) as e:
        raise FieldFormatError(str(path), f"invalid grid declaration ({e})") from e

    try:
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as e:
        raise FieldFormatError(str(path), f"unparseable row ({e})") from e
    if rows.shape != (grid.node_count, 4):
        raise FieldFormatError(
            str(path), f"expected {grid.node_count} rows of 4 columns, found shape {rows.shape}"
        )
    z = rows[:, 0] + 1j * rows[:, 1]
    if np.max(np.abs(z - grid.nodes)) > 1e-9 * max(1.0, float(np.max(np.abs(grid.nodes)))):
        raise FieldFormatError(str(path), "node coordinates do not match the declared grid")
    try:
        return SampledField(grid, rows[:, 2] + 1j * rows[:, 3], header.get("label", ""))
    except ValueError as e:
        raise FieldFormatError(str(path), str(e)) from e
