"""Grids, sampled fields, weighted norms, derivatives and QBF-1 files."""

from .derivatives import d1, dz, dzbar, holomorphic_derivatives, lattice_wirtinger, pullback_wirtinger, wirtinger
from .geometry import (
    DiskGeometry,
    DomainGeometry,
    GeometryKind,
    Parameterization,
    PlaneGeometry,
    QuasidiskGeometry,
    StripGeometry,
    geometry_for,
)
from .io import read_field, read_header, write_field
from .lattice import disk_lattice, field_from_array, lattice_interior, make_grid, sample, strip_lattice, zero_field
from .models import ComplexGrid, GridKind, SampledField
from .norms import WeightedNormSpec, lp_norm, weighted_norm

__all__ = [
    "ComplexGrid",
    "GridKind",
    "SampledField",
    "make_grid",
    "disk_lattice",
    "strip_lattice",
    "sample",
    "zero_field",
    "field_from_array",
    "lattice_interior",
    "DomainGeometry",
    "GeometryKind",
    "Parameterization",
    "PlaneGeometry",
    "DiskGeometry",
    "StripGeometry",
    "QuasidiskGeometry",
    "geometry_for",
    "WeightedNormSpec",
    "weighted_norm",
    "lp_norm",
    "d1",
    "dz",
    "dzbar",
    "wirtinger",
    "lattice_wirtinger",
    "pullback_wirtinger",
    "holomorphic_derivatives",
    "write_field",
    "read_field",
    "read_header",
]
