"""
Principal logarithmic solutions on the strip H and their plane counterparts.

    f_nu = zeta + P_H[nu h],  h = (Id - T_H nu)^(-1) 1

In the exponential chart z = e^zeta, exp o f_nu o log solves the plane
equation with coefficient mu(z) = nu(log z) z / conj(z).
"""

import logging
from typing import Optional

import numpy as np
from scipy.ndimage import map_coordinates

from src.config import get_settings
from src.errors import GridSpecError, SupportError
from src.grid.lattice import lattice_interior
from src.grid.models import GridKind, SampledField
from src.transforms.strip import check_periodic, strip_beurling, strip_cauchy

from .models import MappingKind, QcMapping
from .neumann import neumann_series

logger = logging.getLogger(__name__)


def _check_right_support(nu: SampledField) -> None:
    tolerance = get_settings().transforms.support_leak
    a = np.abs(nu.as_array())
    peak = float(np.max(a))
    if peak == 0.0:
        return
    leak = float(np.max(a[:, -2:])) / peak
    if leak > tolerance:
        raise SupportError("principal_log_solution", leak, tolerance, "coefficient is not supported left of the strip end")


def principal_log_solution(
    nu: SampledField,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> QcMapping:
    """
    Principal logarithmic solution of f_zetabar = nu f_zeta on the strip.

    Diagnostics record `sup_deviation` = max |f - zeta|, the support constant
    `c` = max |e^(-xi) nu| and `d` = max |nu|.

    Raises:
        NonPeriodicFieldError: If nu does not wrap around in phi
        SupportError: If nu reaches the right end of the strip
        ConvergenceError: If the Neumann series does not converge
    """
    grid = nu.grid
    if grid.kind != GridKind.STRIP:
        raise GridSpecError("kind", grid.kind.value, "logarithmic solutions live on strip grids")
    check_periodic(nu)
    _check_right_support(nu)

    zeta = grid.nodes
    one = SampledField(grid, np.ones(grid.node_count), "one")
    h, diag = neumann_series(
        lambda x: strip_beurling(nu * x),
        one,
        "strip Neumann series",
        tol=tol,
        max_iter=max_iter,
    )
    density = nu * h
    f = zeta + strip_cauchy(density).values
    fz = 1.0 + strip_beurling(density).values

    deviation = float(np.max(np.abs(f - zeta)))
    c = float(np.max(np.abs(np.exp(-zeta.real) * nu.values)))
    diag = diag.model_copy(
        update={"extra": {"sup_deviation": deviation, "c": c, "d": float(np.max(np.abs(nu.values)))}}
    )
    mapping = QcMapping(
        f=SampledField(grid, f, "f_nu"),
        fz=SampledField(grid, fz, "f_nu_zeta"),
        fzbar=density.with_values(density.values, "f_nu_zetabar"),
        kind=MappingKind.LOG_PRINCIPAL,
        diagnostics=diag,
    )
    residual = mapping.beltrami_residual(nu, lattice_interior(grid))
    logger.info(f"Logarithmic solution: sup |f - zeta| = {deviation:.4e}, c = {c:.3f}")
    return mapping.model_copy(update={"diagnostics": diag.model_copy(update={"residual": residual})})


def log_chart_to_plane(mapping: QcMapping, z: np.ndarray) -> np.ndarray:
    """
    exp o f_nu o log at plane points z, divided by K = exp(f_nu - zeta at the right end).

    The quotient behaves like z near 0 and like z + O(1) near infinity, so it
    equals the plane principal solution of the pushed-forward coefficient
    minus its value at 0.
    """
    grid = mapping.grid
    z = np.asarray(z, dtype=complex)
    zeta = np.log(z)
    col = (zeta.real - grid.axis1[0]) / grid.spacing
    row = (zeta.imag - grid.axis0[0]) / grid.spacing_y
    coords = np.vstack([row.ravel(), col.ravel()])
    deviation = (mapping.f.values - grid.nodes).reshape(grid.shape)
    # wraps in phi; points must have log|z| strictly inside the strip lattice
    re = map_coordinates(deviation.real, coords, order=3, mode="grid-wrap")
    im = map_coordinates(deviation.imag, coords, order=3, mode="grid-wrap")
    dev = (re + 1j * im).reshape(z.shape)
    right_end = complex(np.mean(deviation[:, -1]))
    return z * np.exp(dev - right_end)


def plane_coefficient(nu_rule, z: np.ndarray) -> np.ndarray:
    """mu(z) = nu(log z) z / conj(z), zero at z = 0."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    nonzero = z != 0
    zn = z[nonzero]
    out[nonzero] = np.broadcast_to(np.asarray(nu_rule(np.log(zn)), dtype=complex), zn.shape) * zn / np.conj(zn)
    return out
