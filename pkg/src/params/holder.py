"""
Measured Holder exponent of a family's normal solutions in the parameter.

For each rung dt of a geometric ladder the normal solutions at t0 and
t0 + dt e_1 are differenced at the probe points; the slope of
log |difference| against log dt is the local exponent.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import linregress

from src.config import get_settings
from src.errors import ParameterRangeError
from src.grid.derivatives import dz
from src.grid.lattice import disk_lattice
from src.grid.models import ComplexGrid
from src.solver.normal import interpolate, normal_solution

from .models import FamilySpec

logger = logging.getLogger(__name__)

MAX_DERIVATIVE_ORDER = 2
MIN_R_SQUARED = 0.9


class HolderRow(BaseModel):
    probe: complex
    delta_t: float
    difference: float


class HolderFit(BaseModel):
    probe: complex
    slope: Optional[float] = None
    r_squared: Optional[float] = None
    usable_rungs: int = 0

    @property
    def flagged(self) -> bool:
        return self.r_squared is not None and self.r_squared < MIN_R_SQUARED


class HolderTable(BaseModel):
    """Per-rung differences and per-probe fits."""

    model_config = ConfigDict(frozen=True)

    k: int
    t0: list[float]
    rows: list[HolderRow] = Field(default_factory=list)
    fits: list[HolderFit] = Field(default_factory=list)
    saturated: bool = False


def ladder(start: float, rungs: int) -> list[float]:
    return [start * 0.5 ** i for i in range(rungs)]


def _derivative(field, k: int) -> np.ndarray:
    for _ in range(k):
        field = dz(field)
    return field.values


def _solve_at(family: FamilySpec, grid: ComplexGrid, t: np.ndarray, k: int, probes: np.ndarray) -> np.ndarray:
    mapping = normal_solution(family.coefficient(grid, t), rule=family.at(t))
    return interpolate(_derivative(mapping.f, k), grid, probes)


def holder_modulus(
    family: FamilySpec,
    k: int,
    probes: Sequence[complex],
    delta_ladder: Optional[Sequence[float]] = None,
    n: Optional[int] = None,
    workers: Optional[int] = None,
) -> tuple[Optional[float], HolderTable]:
    """
    Fit the Holder exponent of the k-th z-derivative of the normal solution.

    Args:
        family: Admissible family
        k: Derivative order, 0 to 2
        probes: Points of D where differences are measured
        delta_ladder: Parameter steps along the first axis (default a
            halving ladder from params.ladder_start)
        n: Lattice size (default verify.n)
        workers: Thread count for the independent solves

    Returns:
        (beta, table): beta is min(1, smallest probe slope), or None when every
        difference is at the solver noise floor (the table is then marked
        saturated)
    """
    if not 0 <= k <= MAX_DERIVATIVE_ORDER:
        raise ParameterRangeError("k", k, f"Derivative order must be between 0 and {MAX_DERIVATIVE_ORDER}")
    settings = get_settings()
    if delta_ladder is None:
        delta_ladder = ladder(settings.params.ladder_start, settings.params.ladder_rungs)
    n = settings.verify.n if n is None else n
    workers = settings.verify.workers if workers is None else workers
    noise_floor = 2.0 * settings.solver.series_tol

    probes = np.asarray(probes, dtype=complex)
    grid = disk_lattice(n)
    t0 = family.center
    shifted = []
    for dt in delta_ladder:
        step = np.zeros(family.dim)
        step[0] = dt
        t1 = family.clamp(t0 + step)
        if t1[0] - t0[0] < dt * (1.0 - 1e-9):
            t1 = family.clamp(t0 - step)
        shifted.append(t1)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        base_future = pool.submit(_solve_at, family, grid, t0, k, probes)
        futures = [pool.submit(_solve_at, family, grid, t1, k, probes) for t1 in shifted]
        base = base_future.result()
        values = [f.result() for f in futures]

    rows = []
    diffs = np.zeros((len(delta_ladder), probes.size))
    for r, (dt, v) in enumerate(zip(delta_ladder, values)):
        diffs[r] = np.abs(v - base)
        rows.extend(HolderRow(probe=complex(p), delta_t=dt, difference=float(d)) for p, d in zip(probes, diffs[r]))

    if np.all(diffs <= noise_floor):
        logger.info(f"Holder modulus for '{family.label}': all differences at the noise floor (saturated)")
        return None, HolderTable(k=k, t0=t0.tolist(), rows=rows, saturated=True)

    fits = []
    log_dt = np.log(np.asarray(delta_ladder, dtype=float))
    for j, p in enumerate(probes):
        usable = diffs[:, j] > noise_floor
        if usable.sum() < 2:
            fits.append(HolderFit(probe=complex(p), usable_rungs=int(usable.sum())))
            continue
        fit = linregress(log_dt[usable], np.log(diffs[usable, j]))
        entry = HolderFit(
            probe=complex(p), slope=float(fit.slope), r_squared=float(fit.rvalue ** 2), usable_rungs=int(usable.sum())
        )
        if entry.flagged:
            logger.warning(f"Holder fit at z={complex(p):.3g} has R^2 {entry.r_squared:.3f} < {MIN_R_SQUARED}")
        fits.append(entry)

    slopes = [f.slope for f in fits if f.slope is not None]
    beta = min(1.0, min(slopes)) if slopes else None
    table = HolderTable(k=k, t0=t0.tolist(), rows=rows, fits=fits, saturated=beta is None)
    logger.info(f"Holder modulus for '{family.label}' (k={k}): beta {beta}")
    return beta, table
