"""
Reflection of points across the boundary of the disk or a quasidisk.

For a quasidisk g(D) the reflected point of w = g(z) is obtained by pulling
back to D, inverting in the unit circle and pushing forward with the
first-order expansion of g at the boundary foot point z/|z|:

    w_hat = g(z*) + g_z(z*)(z_hat - z*) + g_zbar(z*) conj(z_hat - z*),
    z_hat = 1/conj(z),  z* = z/|z|.

The expansion is exact for identity and affine parameterizations, so both
reduce to disk inversion composed with g. For a general parameterization it
stands in for the closed-form extension g_hat(1/conj(z)) and agrees with it
only to first order in the distance to the boundary.
"""

import logging
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.errors import ReflectionError

from .models import ReflectionMode, ReflectionRule

logger = logging.getLogger(__name__)


def _disk_inversion(z: np.ndarray) -> np.ndarray:
    out = np.full(z.shape, np.inf + 0j)
    nonzero = z != 0
    out[nonzero] = 1.0 / np.conj(z[nonzero])
    return out


def reflect_parameter(parameterization, z: Union[complex, np.ndarray]) -> np.ndarray:
    """Reflected point of g(z) for z in D given directly in the parameter plane."""
    z = np.asarray(z, dtype=complex)
    zhat = _disk_inversion(z)
    out = np.full(z.shape, np.inf + 0j)
    nonzero = z != 0
    if np.any(nonzero):
        zn = z[nonzero]
        foot = zn / np.abs(zn)
        gz, gzb = parameterization.derivatives(foot)
        step = zhat[nonzero] - foot
        out[nonzero] = np.asarray(parameterization(foot)) + gz * step + gzb * np.conj(step)
    return out


def reflect(rule: ReflectionRule, w: Union[complex, np.ndarray]):
    """
    Reflected point w_hat of w across the boundary of the rule's domain.

    The center of the disk (or its image) reflects to infinity.

    Raises:
        ReflectionError: If w is on or outside the boundary
    """
    w_arr = np.asarray(w, dtype=complex)
    if rule.mode == ReflectionMode.DISK_INVERSION:
        z = w_arr
    else:
        z = np.asarray(rule.parameterization.inverse(w_arr), dtype=complex)
    outside = np.abs(z) >= 1.0
    if np.any(outside):
        bad = complex(w_arr.ravel()[int(np.argmax(outside.ravel()))])
        raise ReflectionError(bad, "Point is not strictly inside the domain")
    if rule.mode == ReflectionMode.DISK_INVERSION:
        out = _disk_inversion(z)
    else:
        out = reflect_parameter(rule.parameterization, z)
    return out[()] if out.ndim == 0 else out


class SandwichMeasurement(BaseModel):
    """Measured constants c <= |w - w_hat|/(1 - |z|^2) <= C."""

    model_config = ConfigDict(frozen=True)

    lower: float
    upper: float
    samples: int
    inner_radius: float
    outer_radius: float

    @property
    def holds(self) -> bool:
        return self.lower > 0.0 and np.isfinite(self.upper)


def measure_sandwich(
    parameterization,
    inner_radius: float = 0.5,
    outer_radius: float = 0.95,
    rings: int = 16,
    per_ring: int = 64,
) -> SandwichMeasurement:
    """Sample an annulus of D and bound |g(z) - w_hat| against 1 - |z|^2."""
    r = np.linspace(inner_radius, outer_radius, rings)
    theta = 2.0 * np.pi * (np.arange(per_ring) + 0.5) / per_ring
    z = (r[:, None] * np.exp(1j * theta[None, :])).ravel()
    w = np.asarray(parameterization(z), dtype=complex)
    w_hat = reflect_parameter(parameterization, z)
    ratio = np.abs(w - w_hat) / (1.0 - np.abs(z) ** 2)
    result = SandwichMeasurement(
        lower=float(np.min(ratio)),
        upper=float(np.max(ratio)),
        samples=int(z.size),
        inner_radius=inner_radius,
        outer_radius=outer_radius,
    )
    if not result.holds:
        logger.warning(f"Reflection sandwich degenerate: c={result.lower:.3e}, C={result.upper:.3e}")
    else:
        logger.debug(f"Reflection sandwich c={result.lower:.4f}, C={result.upper:.4f}")
    return result
