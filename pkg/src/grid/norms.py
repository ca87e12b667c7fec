"""Weighted L^p_s norms of sampled fields."""

from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .geometry import DomainGeometry, PlaneGeometry
from .models import SampledField


class WeightedNormSpec(BaseModel):
    """
    Norm of f(z)·d(z)^s in L^p, with d the boundary distance of the geometry.

    p may be float('inf') for the weighted sup-norm.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    p: float = 2.0
    s: float = Field(default=0.0, ge=0.0)
    geometry: DomainGeometry = Field(default_factory=PlaneGeometry)

    @field_validator("p")
    @classmethod
    def _check_p(cls, v: float) -> float:
        if not v >= 1.0:
            raise ValueError(f"p must be >= 1, got {v}")
        return v


def weighted_norm(field: SampledField, spec: WeightedNormSpec) -> float:
    """
    Weighted norm (sum_i w_i |f_i d_i^s|^p)^(1/p) over the nodes inside the geometry.

    np.sum reduces contiguous arrays pairwise, so the result does not depend
    on how the caller chunked or threaded the computation.
    """
    weights, distance, inside = spec.geometry.measure(field.grid)
    values = np.abs(field.values[inside])
    if spec.s:
        values = values * np.asarray(distance)[inside] ** spec.s
    if values.size == 0:
        return 0.0
    if np.isinf(spec.p):
        return float(np.max(values))
    w = np.asarray(weights)[inside]
    return float(np.sum(w * values ** spec.p) ** (1.0 / spec.p))


def lp_norm(field: SampledField, p: float = 2.0, mask: Union[np.ndarray, None] = None) -> float:
    """Unweighted L^p norm, optionally restricted to a node mask."""
    values = np.abs(field.values)
    w = field.grid.weights
    if mask is not None:
        values, w = values[mask], w[mask]
    if values.size == 0:
        return 0.0
    if np.isinf(p):
        return float(np.max(values))
    return float(np.sum(w * values ** p) ** (1.0 / p))

