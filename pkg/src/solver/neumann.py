"""
Neumann series for (Id - K)^(-1) rhs and the inhomogeneous Beltrami equation.

The iteration h_{n+1} = rhs + K h_n stops once the increment satisfies
||h_{n+1} - h_n|| <= tol (1 - q) ||rhs||, with q the measured contraction
ratio of successive increments. That bounds the distance to the fixed point
by tol ||rhs||.
"""

import logging
from typing import Callable, Optional, Union

import numpy as np

from src.config import get_settings
from src.errors import ConvergenceError
from src.grid.models import SampledField
from src.grid.norms import lp_norm
from src.transforms.models import Backend
from src.transforms.plane import beurling, cauchy

from .models import BeltramiCoefficient, SolveDiagnostics

logger = logging.getLogger(__name__)

# successive ratios at or above this are treated as divergence
DIVERGENCE_RATIO = 1.0
DIVERGENCE_PATIENCE = 5


def as_field(mu: Union[BeltramiCoefficient, SampledField]) -> SampledField:
    return mu.field if isinstance(mu, BeltramiCoefficient) else mu


def neumann_series(
    step: Callable[[SampledField], SampledField],
    rhs: SampledField,
    stage: str,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    p: float = 2.0,
    initial: Optional[SampledField] = None,
) -> tuple[SampledField, SolveDiagnostics]:
    """
    Fixed point of h = rhs + step(h).

    Args:
        step: The linear map K
        rhs: Right-hand side
        stage: Name used in logs and errors
        tol: Relative stopping tolerance (default solver.series_tol)
        max_iter: Iteration cap (default solver.max_iter)
        p: Exponent of the increment norm
        initial: Starting iterate (default rhs)

    Raises:
        ConvergenceError: If the series diverges or hits the iteration cap
    """
    cfg = get_settings().solver
    tol = cfg.series_tol if tol is None else tol
    max_iter = cfg.max_iter if max_iter is None else max_iter

    scale = lp_norm(rhs, p)
    h = rhs if initial is None else initial
    if scale == 0.0 and initial is None:
        return h, SolveDiagnostics()

    increments: list[float] = []
    ratio = 0.0
    rising = 0
    for iteration in range(1, max_iter + 1):
        nxt = rhs + step(h)
        inc = lp_norm(nxt - h, p)
        h = nxt
        if increments and increments[-1] > 0:
            ratio = inc / increments[-1]
        increments.append(inc)
        logger.debug(f"{stage}: iteration {iteration}, increment {inc:.3e}, ratio {ratio:.4f}")

        rising = rising + 1 if ratio >= DIVERGENCE_RATIO else 0
        if rising >= DIVERGENCE_PATIENCE or not np.isfinite(inc):
            raise ConvergenceError(stage, iteration, ratio, inc)
        q = min(ratio, 0.999)
        if inc <= tol * (1.0 - q) * max(scale, np.finfo(float).tiny):
            return h, SolveDiagnostics(
                iterations=iteration, contraction_ratio=ratio, increments=increments
            )

    raise ConvergenceError(stage, max_iter, ratio, increments[-1] if increments else None)


def solve_density(
    mu: SampledField,
    rhs: SampledField,
    backend: Union[Backend, str, None] = None,
    **kwargs,
) -> tuple[SampledField, SolveDiagnostics]:
    """h = (Id - mu S)^(-1) rhs on the plane."""
    return neumann_series(lambda x: mu * beurling(x, backend), rhs, "plane Neumann series", **kwargs)


def solve_inhomogeneous(
    mu: Union[BeltramiCoefficient, SampledField],
    phi: SampledField,
    p: float = 2.0,
    backend: Union[Backend, str, None] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> SampledField:
    """
    Solve sigma_zbar = mu sigma_z + phi with sigma = O(1/z).

    sigma = C (Id - mu S)^(-1) phi.

    Raises:
        ConvergenceError: If the Neumann series does not converge
    """
    sigma, _, _ = inhomogeneous_with_density(mu, phi, p, backend, tol, max_iter)
    return sigma


def inhomogeneous_with_density(
    mu: Union[BeltramiCoefficient, SampledField],
    phi: SampledField,
    p: float = 2.0,
    backend: Union[Backend, str, None] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> tuple[SampledField, SampledField, SolveDiagnostics]:
    """Like solve_inhomogeneous, also returning the density h = sigma_zbar and diagnostics."""
    mu_f = as_field(mu)
    h, diag = solve_density(mu_f, phi, backend, tol=tol, max_iter=max_iter, p=p)
    sigma = cauchy(h, backend)
    logger.debug(f"Inhomogeneous solve: {diag.iterations} iterations, ratio {diag.contraction_ratio:.4f}")
    return sigma.with_values(sigma.values, "sigma"), h, diag
