"""
Domain geometries: the plane, the unit disk, the periodic strip and quasidisks.

A geometry tells the weighted norms which nodes belong to the domain, what
area element each node carries and how far it is from the boundary.
Quasidisk fields are stored on a D-lattice in the pullback parameter z, so
their measure uses Jacobian-weighted areas and distances taken in the image.
"""

from abc import ABC, abstractmethod
from enum import Enum
from typing import Protocol, runtime_checkable

import numpy as np
from scipy.spatial import cKDTree

from .models import ComplexGrid, GridKind


class GeometryKind(str, Enum):
    PLANE = "plane"
    DISK = "disk"
    STRIP = "strip"
    QUASIDISK = "quasidisk"


@runtime_checkable
class Parameterization(Protocol):
    """A homeomorphism g of the plane taking D onto a quasidisk."""

    def __call__(self, z: np.ndarray) -> np.ndarray: ...

    def derivatives(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]: ...

    def inverse(self, w: np.ndarray) -> np.ndarray: ...


class DomainGeometry(ABC):
    """Base class for the supported domains."""

    kind: GeometryKind

    @abstractmethod
    def measure(self, grid: ComplexGrid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (weights, boundary distance, inside mask) per node."""

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class PlaneGeometry(DomainGeometry):
    kind = GeometryKind.PLANE

    def measure(self, grid):
        ones = np.ones(grid.node_count)
        return grid.weights, ones, np.ones(grid.node_count, dtype=bool)


class DiskGeometry(DomainGeometry):
    kind = GeometryKind.DISK

    def boundary_distance(self, z: np.ndarray) -> np.ndarray:
        return 1.0 - np.abs(z)

    def contains(self, z: np.ndarray) -> np.ndarray:
        return np.abs(z) < 1.0

    def measure(self, grid):
        z = grid.nodes
        return grid.weights, self.boundary_distance(z), self.contains(z)


class StripGeometry(DomainGeometry):
    kind = GeometryKind.STRIP

    def measure(self, grid):
        ones = np.ones(grid.node_count)
        return grid.weights, ones, np.ones(grid.node_count, dtype=bool)


class QuasidiskGeometry(DomainGeometry):
    """Image of the unit disk under a parameterization g."""

    kind = GeometryKind.QUASIDISK

    def __init__(self, parameterization: Parameterization, boundary_samples: int = 4096):
        self.parameterization = parameterization
        theta = 2.0 * np.pi * np.arange(boundary_samples) / boundary_samples
        self.boundary = np.asarray(parameterization(np.exp(1j * theta)), dtype=complex)
        self._tree = cKDTree(np.column_stack([self.boundary.real, self.boundary.imag]))

    def __repr__(self) -> str:
        return f"QuasidiskGeometry({self.parameterization!r})"

    def boundary_distance(self, w: np.ndarray) -> np.ndarray:
        """Distance from image points w to the sampled boundary curve g(dD)."""
        w = np.asarray(w, dtype=complex)
        dist, _ = self._tree.query(np.column_stack([w.real.ravel(), w.imag.ravel()]))
        return dist.reshape(w.shape)

    def contains(self, w: np.ndarray) -> np.ndarray:
        return np.abs(self.parameterization.inverse(np.asarray(w, dtype=complex))) < 1.0

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        gz, gzb = self.parameterization.derivatives(z)
        return np.abs(gz) ** 2 - np.abs(gzb) ** 2

    def measure(self, grid):
        z = grid.nodes
        inside = np.abs(z) < 1.0
        weights = grid.weights * self.jacobian(z)
        dist = self.boundary_distance(self.parameterization(z))
        return weights, dist, inside


def geometry_for(grid: ComplexGrid) -> DomainGeometry:
    """Default geometry for a grid kind (strip for strips, plane otherwise)."""
    if grid.kind == GridKind.STRIP:
        return StripGeometry()
    if grid.kind == GridKind.POLAR:
        return DiskGeometry()
    return PlaneGeometry()
