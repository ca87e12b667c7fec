"""Operator specifications for the singular integral transforms."""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.grid.geometry import DiskGeometry, DomainGeometry, PlaneGeometry, StripGeometry
from src.moebius.models import ReflectionRule


class OperatorFamily(str, Enum):
    """Transform families. ZERO is the null operator used to test harnesses."""
    CAUCHY = "cauchy"
    BEURLING = "beurling"
    CAUCHY_M = "cauchy_m"
    BEURLING_M = "beurling_m"
    STRIP_CAUCHY = "strip_cauchy"
    STRIP_BEURLING = "strip_beurling"
    DOMAIN_CAUCHY_M = "domain_cauchy_m"
    DOMAIN_BEURLING_M = "domain_beurling_m"
    ZERO = "zero"

    @property
    def is_beurling(self) -> bool:
        return self in (
            OperatorFamily.BEURLING,
            OperatorFamily.BEURLING_M,
            OperatorFamily.STRIP_BEURLING,
            OperatorFamily.DOMAIN_BEURLING_M,
        )

    @property
    def is_strip(self) -> bool:
        return self in (OperatorFamily.STRIP_CAUCHY, OperatorFamily.STRIP_BEURLING)

    @property
    def is_domain(self) -> bool:
        return self in (OperatorFamily.DOMAIN_CAUCHY_M, OperatorFamily.DOMAIN_BEURLING_M)


class Backend(str, Enum):
    FFT = "fft"
    DIRECT = "direct"


class OperatorSpec(BaseModel):
    """A fully specified transform: family, counter-term order, domain and backend."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    family: OperatorFamily
    m: int = Field(default=0, ge=0)
    geometry: Optional[DomainGeometry] = None
    backend: Backend = Backend.FFT
    reflection: Optional[ReflectionRule] = None

    @model_validator(mode="before")
    @classmethod
    def _default_geometry(cls, data):
        if not isinstance(data, dict) or data.get("geometry") is not None:
            return data
        fam = OperatorFamily(data.get("family"))
        if fam.is_strip:
            geometry = StripGeometry()
        elif fam.is_domain and data.get("reflection") is not None:
            geometry = data["reflection"].geometry
        elif fam in (OperatorFamily.CAUCHY_M, OperatorFamily.BEURLING_M):
            geometry = DiskGeometry()
        else:
            geometry = PlaneGeometry()
        return {**data, "geometry": geometry}

    @model_validator(mode="after")
    def _consistent(self) -> "OperatorSpec":
        fam = self.family
        if fam in (OperatorFamily.CAUCHY, OperatorFamily.BEURLING) and self.m != 0:
            raise ValueError(f"{fam.value} has no counter-term; m must be 0")
        if fam.is_strip and self.geometry is not None and not isinstance(self.geometry, StripGeometry):
            raise ValueError(f"{fam.value} requires the strip geometry")
        if fam.is_domain and self.reflection is None:
            raise ValueError(f"{fam.value} requires a reflection rule")
        return self
