"""Data models for sampled complex fields."""

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from src.errors import GridSpecError, NonFiniteFieldError


class GridKind(str, Enum):
    """Discretization family of a grid."""
    SQUARE = "square-lattice"
    POLAR = "polar-disk"
    STRIP = "strip-periodic"


class ComplexGrid(BaseModel):
    """
    A lattice over a planar region with per-node quadrature weights.

    Node arrays are laid out as `shape = (n, n)`:
    - square-lattice: axis 0 is y, axis 1 is x; extent (x0, x1, y0, y1), cell-centered
    - polar-disk: axis 0 is radius, axis 1 is angle; extent (R,)
    - strip-periodic: axis 0 is phi in [-pi, pi), axis 1 is xi; extent (xi_min, xi_max)

    Flattened node order is row-major over that shape.
    """

    model_config = ConfigDict(frozen=True)

    kind: GridKind
    n: int
    extent: tuple[float, ...]

    @model_validator(mode="after")
    def _check(self) -> "ComplexGrid":
        if self.n < 8:
            raise GridSpecError("n", self.n, "Grid needs at least 8 points per axis")
        if self.kind == GridKind.SQUARE:
            if self.n & (self.n - 1):
                raise GridSpecError("n", self.n, "Square lattices need a power-of-two n")
            if len(self.extent) != 4:
                raise GridSpecError("extent", self.extent, "Square lattice extent is (x0, x1, y0, y1)")
            x0, x1, y0, y1 = self.extent
            wx, wy = x1 - x0, y1 - y0
            if wx <= 0 or wy <= 0:
                raise GridSpecError("extent", self.extent, "Extent must be positive")
            if abs(wx - wy) > 1e-12 * max(wx, wy):
                raise GridSpecError("extent", self.extent, "Square lattice box must be square")
        elif self.kind == GridKind.POLAR:
            if len(self.extent) != 1 or self.extent[0] <= 0:
                raise GridSpecError("extent", self.extent, "Polar extent is a positive radius (R,)")
        else:
            if len(self.extent) != 2 or self.extent[1] <= self.extent[0]:
                raise GridSpecError("extent", self.extent, "Strip extent is (xi_min, xi_max) with xi_max > xi_min")
        return self

    @property
    def key(self) -> tuple:
        return (self.kind, self.n, self.extent)

    # cached node arrays live in __dict__, so equality is over the defining fields only
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ComplexGrid):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def node_count(self) -> int:
        return self.n * self.n

    @cached_property
    def axis1(self) -> np.ndarray:
        """Coordinates along axis 1 (x, angle or xi)."""
        n = self.n
        if self.kind == GridKind.SQUARE:
            x0, x1 = self.extent[0], self.extent[1]
            return x0 + (np.arange(n) + 0.5) * (x1 - x0) / n
        if self.kind == GridKind.POLAR:
            return 2.0 * np.pi * np.arange(n) / n
        xi0, xi1 = self.extent
        return xi0 + (np.arange(n) + 0.5) * (xi1 - xi0) / n

    @cached_property
    def axis0(self) -> np.ndarray:
        """Coordinates along axis 0 (y, radius or phi)."""
        n = self.n
        if self.kind == GridKind.SQUARE:
            y0, y1 = self.extent[2], self.extent[3]
            return y0 + (np.arange(n) + 0.5) * (y1 - y0) / n
        if self.kind == GridKind.POLAR:
            return (np.arange(n) + 0.5) * self.extent[0] / n
        return -np.pi + 2.0 * np.pi * np.arange(n) / n

    @property
    def spacing(self) -> float:
        """Spacing along axis 1 for lattices, radial spacing for polar grids."""
        if self.kind == GridKind.SQUARE:
            return (self.extent[1] - self.extent[0]) / self.n
        if self.kind == GridKind.POLAR:
            return self.extent[0] / self.n
        return (self.extent[1] - self.extent[0]) / self.n

    @property
    def spacing_y(self) -> float:
        """Spacing along axis 0 (y, radius or phi)."""
        if self.kind == GridKind.SQUARE:
            return (self.extent[3] - self.extent[2]) / self.n
        if self.kind == GridKind.POLAR:
            return self.extent[0] / self.n
        return 2.0 * np.pi / self.n

    @property
    def h(self) -> float:
        return self.spacing

    @cached_property
    def node_array(self) -> np.ndarray:
        """Complex node coordinates with shape `self.shape`."""
        a0, a1 = np.meshgrid(self.axis0, self.axis1, indexing="ij")
        if self.kind == GridKind.SQUARE:
            z = a1 + 1j * a0
        elif self.kind == GridKind.POLAR:
            z = a0 * np.exp(1j * a1)
        else:
            z = a1 + 1j * a0
        z.setflags(write=False)
        return z

    @cached_property
    def nodes(self) -> np.ndarray:
        z = self.node_array.ravel()
        z.setflags(write=False)
        return z

    @cached_property
    def weights(self) -> np.ndarray:
        """Per-node area element, flattened in node order."""
        if self.kind == GridKind.POLAR:
            dr = self.spacing
            dtheta = 2.0 * np.pi / self.n
            w = np.repeat(self.axis0 * dr * dtheta, self.n)
        else:
            w = np.full(self.node_count, self.spacing * self.spacing_y)
        w.setflags(write=False)
        return w

    @property
    def area(self) -> float:
        if self.kind == GridKind.POLAR:
            return float(np.pi * self.extent[0] ** 2)
        if self.kind == GridKind.SQUARE:
            return (self.extent[1] - self.extent[0]) * (self.extent[3] - self.extent[2])
        return (self.extent[1] - self.extent[0]) * 2.0 * np.pi

    @staticmethod
    def _extend(axis: np.ndarray, step: float, ghost: int) -> np.ndarray:
        # interior coordinates stay bit-identical to the lattice axis
        k = np.arange(1, ghost + 1)
        return np.concatenate([axis[0] - step * k[::-1], axis, axis[-1] + step * k])

    def extended_node_array(self, ghost: int) -> np.ndarray:
        """
        Nodes of the lattice extended by `ghost` cells on every open side.

        Strip lattices are only extended along xi; phi is periodic.
        """
        if self.kind == GridKind.POLAR:
            raise GridSpecError("kind", self.kind.value, "Polar grids have no ghost extension")
        xs = self._extend(self.axis1, self.spacing, ghost)
        if self.kind == GridKind.SQUARE:
            ys = self._extend(self.axis0, self.spacing_y, ghost)
        else:
            ys = self.axis0
        a0, a1 = np.meshgrid(ys, xs, indexing="ij")
        return a1 + 1j * a0


@dataclass(frozen=True, eq=False)
class SampledField:
    """Complex values attached to the nodes of a ComplexGrid."""

    grid: ComplexGrid
    values: np.ndarray
    label: str = ""
    wrap_defect: float = 0.0

    def __post_init__(self):
        values = np.array(self.values, dtype=complex).ravel()
        if values.size != self.grid.node_count:
            raise GridSpecError(
                "values", values.size, f"Expected {self.grid.node_count} values for this grid"
            )
        bad = ~np.isfinite(values)
        if bad.any():
            first = int(np.argmax(bad))
            raise NonFiniteFieldError(self.label, int(bad.sum()), complex(self.grid.nodes[first]))
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def as_array(self) -> np.ndarray:
        """Values reshaped to the grid's (n, n) layout (read-only view)."""
        return self.values.reshape(self.grid.shape)

    def with_values(
        self,
        values: np.ndarray,
        label: Optional[str] = None,
        wrap_defect: Optional[float] = None,
    ) -> "SampledField":
        return SampledField(
            self.grid,
            values,
            self.label if label is None else label,
            self.wrap_defect if wrap_defect is None else wrap_defect,
        )

    def conj(self) -> "SampledField":
        return self.with_values(np.conj(self.values))

    def _other_values(self, other: Union["SampledField", complex, float]) -> Union[np.ndarray, complex]:
        if isinstance(other, SampledField):
            if other.grid != self.grid:
                raise GridSpecError("grid", other.grid.kind.value, "Fields live on different grids")
            return other.values
        return other

    def _combined_defect(self, other) -> float:
        if isinstance(other, SampledField):
            return max(self.wrap_defect, other.wrap_defect)
        return self.wrap_defect

    def __add__(self, other):
        return self.with_values(self.values + self._other_values(other), wrap_defect=self._combined_defect(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.with_values(self.values - self._other_values(other), wrap_defect=self._combined_defect(other))

    def __mul__(self, other):
        return self.with_values(self.values * self._other_values(other), wrap_defect=self._combined_defect(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)
