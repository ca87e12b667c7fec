"""
Counter-term operators P_m and T_m on a quasidisk Omega = g(D).

    P_m f(w) = (1/pi) int_Omega f(o)/(w - o) ((o - o_hat)/(w - o_hat))^m dA(o)
    T_m f(w) = d/dw P_m f(w)

Fields are stored on a disk lattice in the parameter z, value f(g(z)) at
node z. Integrals are pulled back to D: each lattice cell carries the area
J h^2 with J = |g_z|^2 - |g_zbar|^2. As for the disk operators,
((o - o_hat)/(w - o_hat))^m/(w - o) = 1/(w - o) - sum_{k<m} (o - o_hat)^k/(w - o_hat)^(k+1).

The own-cell integral of 1/(w - o) contributes -(W/pi) f_w. T_m is recovered
from the z-derivative of the Cauchy part, Psi = (Cauchy part) o g:
Psi_z = Phi_w g_z + f conj(g_zbar), since the z-bar derivative of the
Cauchy part is f.
"""

import logging
from typing import Union

import numpy as np

from src.errors import GridSpecError, ReflectionError
from src.grid.derivatives import lattice_wirtinger
from src.grid.models import GridKind, SampledField
from src.moebius.maps import IdentityParameterization
from src.moebius.models import ReflectionMode, ReflectionRule
from src.moebius.reflection import reflect_parameter

from .disk import beurling_m, cauchy_m, check_disk_support
from .models import Backend
from .plane import GHOST, _cauchy_kernel, dense_kernel_sum, z_derivative_of_extended

logger = logging.getLogger(__name__)


def parameterization_for(reflection: ReflectionRule):
    """The parameterization g behind a reflection rule (identity for the disk)."""
    if reflection.mode == ReflectionMode.PULLBACK:
        return reflection.parameterization
    return IdentityParameterization()


def _reflected_sources(param, z: np.ndarray) -> np.ndarray:
    o_hat = reflect_parameter(param, z)
    finite = np.isfinite(o_hat)
    inner = z != 0
    if np.any(~finite & inner):
        bad = complex(z[~finite & inner][0])
        raise ReflectionError(bad, "Reflected point could not be computed")
    return o_hat


def _remainder(
    targets: np.ndarray,
    sources: np.ndarray,
    hats: np.ndarray,
    weights: np.ndarray,
    m: int,
    derivative: bool,
) -> np.ndarray:
    """(1/pi) sum_s W_s f_s R(w, o_s), with R the counter-term kernel (or its w-derivative)."""
    finite = np.isfinite(hats)
    o, o_hat, wts = sources[finite], hats[finite], weights[finite]
    index = np.arange(o.size)

    def kernel(w, idx):
        src, ref = o[idx], o_hat[idx]
        gap = w - ref
        total = np.zeros(np.broadcast(w, ref).shape, dtype=complex)
        for k in range(m):
            if derivative:
                total -= (k + 1) * (src - ref) ** k / gap ** (k + 2)
            else:
                total += (src - ref) ** k / gap ** (k + 1)
        return total / np.pi

    return dense_kernel_sum(targets, index, wts, kernel)


def _domain_parts(field: SampledField, reflection: ReflectionRule, m: int, ghost: int):
    grid = field.grid
    if grid.kind != GridKind.SQUARE:
        raise GridSpecError("kind", grid.kind.value, "domain operators need a disk lattice")
    check_disk_support(field, "domain operator")
    param = parameterization_for(reflection)

    z = grid.nodes
    a = field.as_array()
    gz, gzb = (np.asarray(v).reshape(grid.shape) for v in param.derivatives(grid.node_array))
    jac = np.abs(gz) ** 2 - np.abs(gzb) ** 2
    cell = grid.spacing * grid.spacing_y * jac

    fz, fzb = lattice_wirtinger(a, grid.spacing, grid.spacing_y)
    f_w = (fz * np.conj(gz) - fzb * np.conj(gzb)) / jac

    support = (field.values != 0) & (np.abs(z) < 1.0)
    images = np.asarray(param(z))
    sources = images[support]
    weights = field.values[support] * cell.ravel()[support]

    ext_nodes = grid.extended_node_array(ghost)
    ext_images = np.asarray(param(ext_nodes))
    principal = dense_kernel_sum(ext_images, sources, weights, _cauchy_kernel)
    principal += np.pad(-(cell / np.pi) * f_w, ghost)

    hats = _reflected_sources(param, z[support])
    return param, gz, gzb, images, sources, hats, weights, principal


def domain_cauchy_m(
    field: SampledField,
    reflection: ReflectionRule,
    m: int,
    backend: Union[Backend, str, None] = None,
) -> SampledField:
    """
    P_m f for f given on the pullback lattice.

    The disk with disk inversion reduces to cauchy_m.

    Raises:
        ReflectionError: If a support node has no reflected point
    """
    if reflection.mode == ReflectionMode.DISK_INVERSION:
        out = cauchy_m(field, m, backend)
        return out.with_values(out.values, f"domain_cauchy_{m}")
    grid = field.grid
    _, _, _, images, sources, hats, weights, principal = _domain_parts(field, reflection, m, GHOST)
    inside = np.abs(grid.nodes) < 1.0
    values = principal[GHOST:-GHOST, GHOST:-GHOST].ravel()
    if m:
        values = values.copy()
        values[inside] -= _remainder(images[inside], sources, hats, weights, m, derivative=False)
    values = np.where(inside, values, 0.0)
    return SampledField(grid, values, f"domain_cauchy_{m}")


def domain_beurling_m(
    field: SampledField,
    reflection: ReflectionRule,
    m: int,
    backend: Union[Backend, str, None] = None,
) -> SampledField:
    """T_m f = d/dw P_m f for f given on the pullback lattice."""
    if reflection.mode == ReflectionMode.DISK_INVERSION:
        out = beurling_m(field, m, backend)
        return out.with_values(out.values, f"domain_beurling_{m}")
    grid = field.grid
    _, gz, gzb, images, sources, hats, weights, principal = _domain_parts(field, reflection, m, GHOST)
    psi_z = z_derivative_of_extended(principal, grid, GHOST)
    phi_w = ((psi_z - field.as_array() * np.conj(gzb)) / gz).ravel()
    inside = np.abs(grid.nodes) < 1.0
    if m:
        phi_w = phi_w.copy()
        phi_w[inside] -= _remainder(images[inside], sources, hats, weights, m, derivative=True)
    values = np.where(inside, phi_w, 0.0)
    return SampledField(grid, values, f"domain_beurling_{m}")
