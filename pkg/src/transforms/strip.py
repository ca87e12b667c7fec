"""
Strip operators P_H and T_H for phi-periodic functions on H = {-pi <= phi < pi}.

    P_H f(zeta) = (1/pi) int_H f(tau) e^w/(e^w - 1) dA(tau),  w = zeta - tau,
    T_H f = d/dzeta P_H f.

Near w = 0 the kernel is (1/pi)(1/w + 1/2 + w/12 + ...), so P_H is a right
inverse of d/dzeta-bar. The lattice sum is cyclic in phi and zero-padded in
xi. The node's own cell contributes (A/pi)(f/2 - f_zeta) - (4F/pi) f_zeta-bar,
where A is the cell area and F = a^2 atan(b/a) - b^2 atan(a/b) for half-sides
a (xi) and b (phi); F vanishes for square cells.
"""

import logging
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve

from src.config import get_settings
from src.errors import GridSpecError, NonPeriodicFieldError
from src.grid.derivatives import d1, lattice_wirtinger
from src.grid.models import ComplexGrid, GridKind, SampledField

logger = logging.getLogger(__name__)

GHOST = 2


def check_periodic(field: SampledField, tolerance: Optional[float] = None) -> None:
    tolerance = get_settings().transforms.periodic_tolerance if tolerance is None else tolerance
    if field.wrap_defect > tolerance:
        raise NonPeriodicFieldError(field.wrap_defect, tolerance)


def _strip_kernel(grid: ComplexGrid, ghost: int) -> np.ndarray:
    """Kernel on phi offsets 0..n-1 (cyclic) and xi offsets -reach..reach."""
    n = grid.n
    reach = n - 1 + ghost
    dxi = np.arange(-reach, reach + 1) * grid.spacing
    dphi = np.arange(n) * grid.spacing_y
    # wrap phi offsets into [-pi, pi) so the singular node sits at offset 0
    dphi = np.where(dphi >= np.pi, dphi - 2.0 * np.pi, dphi)
    w = dxi[None, :] + 1j * dphi[:, None]
    kernel = np.zeros(w.shape, dtype=complex)
    nonzero = w != 0
    with np.errstate(over="ignore", invalid="ignore"):
        ew = np.exp(w[nonzero])
        kernel[nonzero] = ew / (ew - 1.0) / np.pi
    # e^w overflows for large positive xi offsets; the kernel tends to 1/pi there
    big = np.real(w) > 30.0
    kernel[big] = 1.0 / np.pi
    return kernel


def _cell_term(a: np.ndarray, grid: ComplexGrid) -> np.ndarray:
    hx, hy = grid.spacing, grid.spacing_y
    fz, fzb = lattice_wirtinger(a, hx, hy, periodic_y=True)
    area = hx * hy
    half_a, half_b = hx / 2.0, hy / 2.0
    shape = half_a ** 2 * np.arctan(half_b / half_a) - half_b ** 2 * np.arctan(half_a / half_b)
    return (area / np.pi) * (0.5 * a - fz) - (4.0 * shape / np.pi) * fzb


def strip_cauchy_extended(field: SampledField, ghost: int = GHOST) -> np.ndarray:
    """P_H f on the strip lattice extended by `ghost` xi-columns per side."""
    grid = field.grid
    if grid.kind != GridKind.STRIP:
        raise GridSpecError("kind", grid.kind.value, "strip operators need a strip-periodic grid")
    check_periodic(field)
    n = grid.n
    a = field.as_array()
    cyclic = _strip_kernel(grid, ghost)
    # unroll the cyclic phi offsets to -(n-1)..n-1 so a linear convolution is exact
    kernel = cyclic[np.arange(-(n - 1), n) % n]
    area = grid.spacing * grid.spacing_y
    full = fftconvolve(a * area, kernel, mode="full")
    total = full[n - 1 : 2 * n - 1, n - 1 : 2 * n - 1 + 2 * ghost]
    cell = np.pad(_cell_term(a, grid), ((0, 0), (ghost, ghost)))
    return total + cell


def strip_cauchy(field: SampledField) -> SampledField:
    """
    P_H f for a phi-periodic field supported to the left of some xi.

    Raises:
        NonPeriodicFieldError: If the sampled rule does not wrap around in phi
    """
    ext = strip_cauchy_extended(field, GHOST)
    return SampledField(field.grid, ext[:, GHOST:-GHOST].ravel(), "strip_cauchy")


def strip_beurling(field: SampledField) -> SampledField:
    """T_H f = d/dzeta P_H f by fourth-order differences (periodic in phi)."""
    grid = field.grid
    ext = strip_cauchy_extended(field, GHOST)
    dxi = d1(ext, grid.spacing, axis=1)
    dphi = d1(ext, grid.spacing_y, axis=0, periodic=True)
    values = 0.5 * (dxi - 1j * dphi)[:, GHOST:-GHOST]
    return SampledField(grid, values.ravel(), "strip_beurling")
