"""Data models for disk automorphisms, affine ellipse maps and reflection rules."""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.grid.geometry import DiskGeometry, DomainGeometry, Parameterization, QuasidiskGeometry


class DiskAutomorphism(BaseModel):
    """The disk automorphism z -> (w - z)/(1 - z conj(w)) sending w to 0."""

    model_config = ConfigDict(frozen=True)

    w: complex

    @field_validator("w")
    @classmethod
    def _inside(cls, v: complex) -> complex:
        if abs(v) >= 1.0:
            raise ValueError(f"Automorphism center must satisfy |w| < 1, got |w|={abs(v):.6g}")
        return v


class AffineEllipseMap(BaseModel):
    """The real-linear map z -> z + mu0 conj(z); circles go to ellipses."""

    model_config = ConfigDict(frozen=True)

    mu0: complex

    @field_validator("mu0")
    @classmethod
    def _contracting(cls, v: complex) -> complex:
        if abs(v) >= 1.0:
            raise ValueError(f"Affine dilatation must satisfy |mu0| < 1, got |mu0|={abs(v):.6g}")
        return v

    @property
    def dilatation(self) -> float:
        """Maximal dilatation K = (1 + |mu0|)/(1 - |mu0|)."""
        k = abs(self.mu0)
        return (1.0 + k) / (1.0 - k)


class ReflectionMode(str, Enum):
    DISK_INVERSION = "disk-inversion"
    PULLBACK = "pullback-through-map"


class ReflectionRule(BaseModel):
    """
    How the reflected point of w across the domain boundary is computed.

    disk-inversion needs the disk geometry. pullback-through-map needs a
    parameterization g of the domain by D; it defaults to the one held by a
    QuasidiskGeometry.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    geometry: DomainGeometry
    mode: ReflectionMode = ReflectionMode.DISK_INVERSION
    parameterization: Optional[Parameterization] = None

    @model_validator(mode="before")
    @classmethod
    def _default_map(cls, data):
        if isinstance(data, dict) and data.get("parameterization") is None:
            geometry = data.get("geometry")
            if isinstance(geometry, QuasidiskGeometry):
                data = {**data, "parameterization": geometry.parameterization}
        return data

    @model_validator(mode="after")
    def _consistent(self) -> "ReflectionRule":
        if self.mode == ReflectionMode.DISK_INVERSION and not isinstance(self.geometry, DiskGeometry):
            raise ValueError("disk-inversion reflection requires the disk geometry")
        if self.mode == ReflectionMode.PULLBACK and self.parameterization is None:
            raise ValueError("pullback reflection requires an invertible parameterization")
        return self

    @classmethod
    def disk(cls) -> "ReflectionRule":
        return cls(geometry=DiskGeometry(), mode=ReflectionMode.DISK_INVERSION)

    @classmethod
    def through(cls, geometry: QuasidiskGeometry) -> "ReflectionRule":
        return cls(geometry=geometry, mode=ReflectionMode.PULLBACK)
