"""
Empirical estimates: operator norm lower bounds, decay exponents and
right-inverse residuals.
"""

import logging
from typing import Optional

import numpy as np
from scipy.stats import linregress

from src.config import get_settings
from src.errors import InsufficientRingsError, ParameterRangeError
from src.grid.derivatives import pullback_wirtinger, wirtinger
from src.grid.geometry import DiskGeometry, DomainGeometry
from src.grid.lattice import disk_lattice, lattice_interior, make_grid, sample, strip_lattice
from src.grid.models import ComplexGrid, GridKind, SampledField
from src.grid.norms import WeightedNormSpec, weighted_norm
from src.transforms.dispatch import apply_operator
from src.transforms.domain import parameterization_for
from src.transforms.models import OperatorFamily, OperatorSpec

logger = logging.getLogger(__name__)

MIN_TRIALS = 16
MIN_RINGS = 4
RING_RATIO = 2.0 ** 0.25
PLANE_HALF_WIDTH = 2.0
TRIAL_BUMPS = 3
PLANE_FAMILIES = (OperatorFamily.CAUCHY, OperatorFamily.BEURLING, OperatorFamily.ZERO)


def grid_for(spec: OperatorSpec, n: int) -> ComplexGrid:
    """Lattice on which trial fields for an operator family live."""
    fam = spec.family
    if fam.is_strip:
        return strip_lattice(n)
    if fam in PLANE_FAMILIES:
        return make_grid(GridKind.SQUARE, n, (-PLANE_HALF_WIDTH, PLANE_HALF_WIDTH))
    return disk_lattice(n)


def _window(z: np.ndarray, radius: float = 0.9) -> np.ndarray:
    r2 = (np.abs(z) / radius) ** 2
    out = np.zeros(z.shape)
    inside = r2 < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    return out


def trial_field(spec: OperatorSpec, grid: ComplexGrid, rng: np.random.Generator) -> SampledField:
    """
    A random smooth field with effectively compact support.

    Plane and strip trials are zbar-derivatives of Gaussian sums, so the
    Beurling-type transform maps them to the matching z-derivatives. Disk and
    domain trials are additionally cut off smoothly inside |z| < 0.9.
    """
    amplitudes = rng.normal(size=TRIAL_BUMPS) + 1j * rng.normal(size=TRIAL_BUMPS)

    if grid.kind == GridKind.STRIP:
        xi0, xi1 = grid.extent
        centers = rng.uniform(xi0 + 2.0, xi1 - 2.0, size=TRIAL_BUMPS)
        widths = rng.uniform(0.25, 0.5, size=TRIAL_BUMPS)
        modes = rng.integers(-3, 4, size=TRIAL_BUMPS)

        def strip_rule(zeta):
            xi, phi = zeta.real, zeta.imag
            total = np.zeros(zeta.shape, dtype=complex)
            for a, c, s, k in zip(amplitudes, centers, widths, modes):
                g = a * np.exp(1j * k * phi - (xi - c) ** 2 / (2.0 * s ** 2))
                total += 0.5 * (-(xi - c) / s ** 2 - k) * g
            return total

        return sample(strip_rule, grid, "trial")

    reach = 0.4
    centers = reach * np.sqrt(rng.uniform(size=TRIAL_BUMPS)) * np.exp(2j * np.pi * rng.uniform(size=TRIAL_BUMPS))
    widths = rng.uniform(0.06, 0.12, size=TRIAL_BUMPS)

    def rule(z):
        total = np.zeros(z.shape, dtype=complex)
        for a, c, s in zip(amplitudes, centers, widths):
            total += -a * (z - c) / (2.0 * s ** 2) * np.exp(-np.abs(z - c) ** 2 / (2.0 * s ** 2))
        return total

    field = sample(rule, grid, "trial")
    if spec.family in PLANE_FAMILIES:
        return field
    return field.with_values(field.values * _window(grid.nodes))


def operator_norm_estimate(
    spec: OperatorSpec,
    p: float = 2.0,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    n: Optional[int] = None,
) -> float:
    """
    Lower bound max_i ||T f_i||_p / ||f_i||_p over seeded random trials.

    Trial i is drawn from its own generator seeded by (seed, i), so a run
    with more trials extends the same sequence and never lowers the bound.

    Raises:
        ParameterRangeError: If fewer than 16 trials are requested
    """
    settings = get_settings().verify
    trials = settings.trials if trials is None else trials
    seed = settings.seed if seed is None else seed
    n = settings.n if n is None else n
    if trials < MIN_TRIALS:
        raise ParameterRangeError("trials", trials, f"Norm estimates need at least {MIN_TRIALS} trials")

    grid = grid_for(spec, n)
    norm = WeightedNormSpec(p=p, geometry=spec.geometry)
    best = 0.0
    for i in range(trials):
        f = trial_field(spec, grid, np.random.default_rng([seed, i]))
        denom = weighted_norm(f, norm)
        if denom == 0.0:
            continue
        ratio = weighted_norm(apply_operator(spec, f), norm) / denom
        best = max(best, ratio)
    logger.debug(f"{spec.family.value} m={spec.m} p={p}: norm lower bound {best:.6f} over {trials} trials")
    return best


def decay_exponent_fit(
    field: SampledField,
    geometry: Optional[DomainGeometry] = None,
    ring_band: Optional[tuple[float, float]] = None,
    ratio: float = RING_RATIO,
) -> tuple[float, float]:
    """
    Fit |field| ~ C dist^(-alpha) over geometric rings of boundary distance.

    Rings run from the outer band edge inwards by the given ratio. Each ring
    contributes its largest |field| paired with the distance of that node.

    Args:
        field: Field on a disk-like lattice
        geometry: Supplies the boundary distance (default the disk)
        ring_band: (min, max) distance, default (4h, 0.2)
        ratio: Ring width ratio

    Returns:
        (alpha, r_squared)

    Raises:
        InsufficientRingsError: If fewer than 4 rings hold a nonzero value
    """
    geometry = geometry or DiskGeometry()
    grid = field.grid
    low, high = ring_band or (4.0 * grid.spacing, 0.2)
    _, distance, inside = geometry.measure(grid)
    distance = np.asarray(distance)
    magnitude = np.abs(field.values)

    xs, ys = [], []
    outer = high
    while outer / ratio >= low:
        inner = outer / ratio
        ring = inside & (distance >= inner) & (distance < outer)
        if ring.any():
            idx = np.flatnonzero(ring)
            peak = idx[int(np.argmax(magnitude[idx]))]
            if magnitude[peak] > 0.0:
                xs.append(-np.log(distance[peak]))
                ys.append(np.log(magnitude[peak]))
        outer = inner
    if len(xs) < MIN_RINGS:
        raise InsufficientRingsError(len(xs), MIN_RINGS)
    fit = linregress(xs, ys)
    r_squared = float(fit.rvalue ** 2) if np.isfinite(fit.rvalue) else 1.0
    return float(fit.slope), r_squared


def interior_mask(spec: OperatorSpec, grid: ComplexGrid, cells: int = 4) -> np.ndarray:
    """Nodes at least `cells` spacings away from every edge where the output is cut."""
    if grid.kind == GridKind.STRIP or spec.family in PLANE_FAMILIES:
        return lattice_interior(grid, cells)
    return np.abs(grid.nodes) <= 1.0 - cells * grid.spacing


def right_inverse_residual(spec: OperatorSpec, field: SampledField, mask: Optional[np.ndarray] = None) -> float:
    """sup |dbar(T f) - f| / sup |f| over interior nodes (or the given mask)."""
    peak = float(np.max(np.abs(field.values)))
    if peak == 0.0:
        return 0.0
    out = apply_operator(spec, field)
    grid = field.grid
    if spec.family.is_domain:
        _, dbar = pullback_wirtinger(out, parameterization_for(spec.reflection), np.abs(grid.nodes) < 1.0)
    else:
        _, dbar = wirtinger(out)
    mask = interior_mask(spec, grid) if mask is None else mask
    residual = float(np.max(np.abs(dbar.values - field.values)[mask])) / peak
    logger.debug(f"Right-inverse residual of {spec.family.value} m={spec.m}: {residual:.3e}")
    return residual
