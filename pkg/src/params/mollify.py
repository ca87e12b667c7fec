"""
Smoothing of a family in its parameter.

    mu_delta(z, t) = sum_j w_j mu(z, t + delta(z) s_j)

with cap-kernel nodes s_j in the unit ball and the radius rule of the
schedule. Shifted parameters are clamped to the box.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from src.errors import CertificateViolationError, InsufficientResolutionError, ParameterRangeError

from .models import FamilySpec, MollifierSchedule

logger = logging.getLogger(__name__)

DEFAULT_PROBES = (0.0, 0.5)
SLOPE_SAMPLES = 8
# |d/dt mu_delta| <= SLOPE_FACTOR * d / delta for a kernel of unit mass
SLOPE_FACTOR = 4.0


def parameter_slope(
    family: FamilySpec,
    probes: np.ndarray,
    step: float,
    samples: int = SLOPE_SAMPLES,
) -> float:
    """
    Largest central-difference t-derivative of the family at the probes.

    Parameters are the box center plus seeded uniform draws; each axis is
    differenced with the given step, clamped to the box.
    """
    rng = np.random.default_rng(family.seed)
    draws = family.lower + (family.upper - family.lower) * rng.uniform(size=(samples, family.dim))
    points = np.vstack([family.center[None, :], draws])
    worst = 0.0
    for t in points:
        for i in range(family.dim):
            e = np.zeros(family.dim)
            e[i] = step
            hi, lo = family.clamp(t + e), family.clamp(t - e)
            span = hi[i] - lo[i]
            if span <= 0.0:
                continue
            slope = np.abs(family.evaluate(probes, hi) - family.evaluate(probes, lo)) / span
            worst = max(worst, float(np.max(slope)))
    return worst


def mollify_family(
    family: FamilySpec,
    schedule: MollifierSchedule,
    order_m: int = 0,
    probes: Optional[Sequence[complex]] = None,
) -> FamilySpec:
    """
    The t-smoothed family.

    The sup certificate d is kept; a convex combination of values never
    exceeds it. Derivative certificates are dropped. The result's
    diagnostics hold the finite-difference t-slope at the probes
    (`param_slope`, step = the schedule's t-spacing), its limit
    SLOPE_FACTOR * d / delta (`param_slope_limit`) and the smallest radius
    at the probes (`min_radius`).

    Raises:
        ParameterRangeError: If order_m is negative
        InsufficientResolutionError: If the radius at a probe falls below the
            schedule's t-spacing
        CertificateViolationError: If the smoothed t-slope at the probes is
            not finite or exceeds its limit
    """
    if order_m < 0:
        raise ParameterRangeError("order_m", order_m, "Derivative order must be non-negative")
    probes = np.asarray(DEFAULT_PROBES if probes is None else probes, dtype=complex)
    radii = schedule.radius(probes, order_m)
    for z, delta in zip(probes, radii):
        if delta < schedule.t_spacing:
            raise InsufficientResolutionError(complex(z), float(delta), schedule.t_spacing)

    nodes, weights = schedule.kernel(family.dim)

    def rule(z: np.ndarray, t: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        delta = schedule.radius(z, order_m)[..., None]
        total = np.zeros(z.shape, dtype=complex)
        for s, w in zip(nodes, weights):
            total = total + w * family.evaluate(z, family.clamp(t + delta * s))
        return total

    smoothed = FamilySpec(
        rule=rule,
        box=family.box,
        d=family.d,
        label=f"{family.label}-mollified",
        seed=family.seed,
    )
    min_radius = float(np.min(radii))
    slope = parameter_slope(smoothed, probes, schedule.t_spacing)
    limit = SLOPE_FACTOR * family.d / min_radius
    if not np.isfinite(slope) or slope > limit:
        raise CertificateViolationError("param_slope", slope, limit)

    logger.info(
        f"Mollified family '{family.label}' with {weights.size} kernel nodes, "
        f"radius {min_radius:.3e}..{float(np.max(radii)):.3e} at the probes, t-slope {slope:.3e}"
    )
    return smoothed.model_copy(
        update={"diagnostics": {"param_slope": slope, "param_slope_limit": limit, "min_radius": min_radius}}
    )
