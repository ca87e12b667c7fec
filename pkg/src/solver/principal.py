"""Principal solutions f = z + C h of f_zbar = mu f_z for compactly supported mu."""

import logging
from typing import Optional, Union

import numpy as np

from src.grid.derivatives import dz
from src.grid.lattice import lattice_interior
from src.grid.models import SampledField
from src.grid.norms import lp_norm
from src.transforms.models import Backend
from src.transforms.plane import beurling, cauchy

from .models import BeltramiCoefficient, MappingKind, QcMapping
from .neumann import as_field, inhomogeneous_with_density

logger = logging.getLogger(__name__)


def principal_solution(
    mu: Union[BeltramiCoefficient, SampledField],
    exponential: bool = False,
    backend: Union[Backend, str, None] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> QcMapping:
    """
    Principal solution normalized by f(z) = z + O(1/z).

    Default mode: h = (Id - mu S)^(-1) mu, f = z + C h, f_z = 1 + S h, f_zbar = h.

    Exponential mode: sigma solves sigma_zbar = mu sigma_z + mu_z, then
    f = z + C(mu e^sigma), f_z = e^sigma, f_zbar = mu e^sigma. The diagnostic
    `exp_consistency` is ||1 + S(mu e^sigma) - e^sigma|| / ||e^sigma||.

    Raises:
        ConvergenceError: If the Neumann series does not converge
    """
    mu_f = as_field(mu)
    grid = mu_f.grid
    z = grid.nodes

    if exponential:
        sigma, _, diag = inhomogeneous_with_density(mu_f, dz(mu_f), backend=backend, tol=tol, max_iter=max_iter)
        e_sigma = np.exp(sigma.values)
        density = mu_f.with_values(mu_f.values * e_sigma, "mu_exp_sigma")
        f = z + cauchy(density, backend).values
        fz = e_sigma
        fzbar = density.values
        consistency = 1.0 + beurling(density, backend).values - e_sigma
        scale = lp_norm(mu_f.with_values(e_sigma), 2.0)
        diag.extra["exp_consistency"] = lp_norm(mu_f.with_values(consistency), 2.0) / scale
        diag.extra["min_abs_fz"] = float(np.min(np.abs(e_sigma)))
    else:
        _, h, diag = inhomogeneous_with_density(mu_f, mu_f, backend=backend, tol=tol, max_iter=max_iter)
        f = z + cauchy(h, backend).values
        fz = 1.0 + beurling(h, backend).values
        fzbar = h.values

    mapping = QcMapping(
        f=SampledField(grid, f, "f"),
        fz=SampledField(grid, fz, "f_z"),
        fzbar=SampledField(grid, fzbar, "f_zbar"),
        kind=MappingKind.PRINCIPAL,
        diagnostics=diag,
    )
    residual = mapping.beltrami_residual(mu_f, lattice_interior(grid))
    diagnostics = diag.model_copy(update={"residual": residual})
    logger.info(
        f"Principal solution: {diag.iterations} iterations, ratio {diag.contraction_ratio:.4f}, "
        f"residual {residual:.3e}"
    )
    return mapping.model_copy(update={"diagnostics": diagnostics})
