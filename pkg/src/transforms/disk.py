"""
Counter-term transforms C_m and S_m on the unit disk.

The kernel of C_m is the Cauchy kernel times ((1 - |t|^2)/(1 - conj(t) z))^m.
Writing q for that factor, (1 - q^m)/(z - t) sums to

    R_m(z, t) = -conj(t) sum_{k<m} (1 - |t|^2)^k / (1 - conj(t) z)^(k+1),

so C_m = C - R_m and S_m = S - d/dz R_m. R_m is holomorphic in z on D:
the fft backend expands it in powers of z with moment coefficients

    c_j = -(1/pi) sum_{k<m} binom(j+k, k) int f conj(t)^(j+1) (1 - |t|^2)^k dA,

and the direct backend sums the closed-form kernel densely.
"""

import logging
from math import log
from typing import Optional, Union

import numpy as np
from scipy.special import comb

from src.config import get_settings
from src.errors import SupportError
from src.grid.models import SampledField

from .models import Backend
from .plane import _require_square, _resolve_backend, beurling, cauchy, dense_kernel_sum

logger = logging.getLogger(__name__)

POWER_BLOCK = 64


def check_disk_support(field: SampledField, operator: str, tolerance: Optional[float] = None) -> None:
    """Raise SupportError if the field has mass outside the open unit disk."""
    tolerance = get_settings().transforms.support_leak if tolerance is None else tolerance
    values = np.abs(field.values)
    peak = float(np.max(values))
    if peak == 0.0:
        return
    outside = np.abs(field.grid.nodes) >= 1.0
    leak = float(np.max(values[outside])) / peak if outside.any() else 0.0
    if leak > tolerance:
        raise SupportError(operator, leak, tolerance, "support extends outside the unit disk")


def series_length(support_radius: float, target_radius: float, m: int) -> int:
    """Number of power-series terms needed for the counter-term expansion."""
    cfg = get_settings().transforms
    rho = support_radius * target_radius
    if rho <= 0.0:
        return cfg.series_min_terms
    gap = max(1.0 - rho, 1e-12)
    terms = (log(1.0 / cfg.series_eps) + m * log(1.0 + 1.0 / gap)) / gap
    count = int(min(max(np.ceil(terms), cfg.series_min_terms), cfg.series_max_terms))
    if terms > cfg.series_max_terms:
        logger.warning(
            f"Counter-term series capped at {count} terms (wanted {terms:.0f}); "
            f"support radius {support_radius:.4f}"
        )
    return count


def counter_term_coefficients(field: SampledField, m: int, terms: int) -> np.ndarray:
    """Power-series coefficients c_j of R_m f, j = 0..terms-1."""
    grid = field.grid
    values = field.values
    support = (values != 0) & (np.abs(grid.nodes) < 1.0)
    t = grid.nodes[support]
    tbar = np.conj(t)
    damp = 1.0 - np.abs(t) ** 2
    area = grid.spacing * grid.spacing_y
    weights = np.stack([values[support] * area * damp ** k for k in range(m)], axis=1)

    moments = np.zeros((terms, m), dtype=complex)
    current = tbar.copy()
    for start in range(0, terms, POWER_BLOCK):
        size = min(POWER_BLOCK, terms - start)
        powers = np.empty((size, t.size), dtype=complex)
        powers[0] = current
        for i in range(1, size):
            powers[i] = powers[i - 1] * tbar
        moments[start : start + size] = powers @ weights
        current = powers[-1] * tbar

    j = np.arange(terms)[:, None]
    k = np.arange(m)[None, :]
    binomials = comb(j + k, k)
    return -(binomials * moments).sum(axis=1) / np.pi


def _horner(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    out = np.full(z.shape, coeffs[-1], dtype=complex)
    for c in coeffs[-2::-1]:
        out = out * z + c
    return out


def _counter_kernel(m: int, derivative: bool):
    def kernel(z, t):
        tbar = np.conj(t)
        damp = 1.0 - np.abs(t) ** 2
        denom = 1.0 - tbar * z
        total = np.zeros(np.broadcast(z, t).shape, dtype=complex)
        for k in range(m):
            if derivative:
                total += (k + 1) * tbar * damp ** k / denom ** (k + 2)
            else:
                total += damp ** k / denom ** (k + 1)
        return -tbar * total / np.pi

    return kernel


def counter_term(
    field: SampledField,
    m: int,
    backend: Union[Backend, str, None] = None,
    derivative: bool = False,
) -> np.ndarray:
    """R_m f (or d/dz R_m f) at the nodes inside D; zero elsewhere."""
    grid = field.grid
    nodes = grid.nodes
    inside = np.abs(nodes) < 1.0
    out = np.zeros(grid.node_count, dtype=complex)
    support = (field.values != 0) & inside
    if m == 0 or not support.any():
        return out
    targets = nodes[inside]
    if _resolve_backend(backend) == Backend.FFT:
        terms = series_length(float(np.max(np.abs(nodes[support]))), float(np.max(np.abs(targets))), m)
        coeffs = counter_term_coefficients(field, m, terms)
        if derivative:
            coeffs = coeffs[1:] * np.arange(1, terms)
            if coeffs.size == 0:
                return out
        out[inside] = _horner(coeffs, targets)
        logger.debug(f"Counter-term series m={m}: {terms} terms")
    else:
        weights = field.values[support] * (grid.spacing * grid.spacing_y)
        out[inside] = dense_kernel_sum(targets, nodes[support], weights, _counter_kernel(m, derivative))
    return out


def cauchy_m(field: SampledField, m: int, backend: Union[Backend, str, None] = None) -> SampledField:
    """
    C_m f on D; m = 0 is the plain Cauchy transform.

    Raises:
        SupportError: If the field is not supported in D
    """
    _require_square(field.grid, "cauchy_m")
    check_disk_support(field, "cauchy_m")
    if m == 0:
        return cauchy(field, backend)
    base = cauchy(field, backend).values
    inside = np.abs(field.grid.nodes) < 1.0
    values = np.where(inside, base - counter_term(field, m, backend), 0.0)
    return SampledField(field.grid, values, f"cauchy_{m}")


def beurling_m(field: SampledField, m: int, backend: Union[Backend, str, None] = None) -> SampledField:
    """S_m f = d/dz C_m f on D; m = 0 is the plain Beurling transform."""
    _require_square(field.grid, "beurling_m")
    check_disk_support(field, "beurling_m")
    if m == 0:
        return beurling(field, backend)
    base = beurling(field, backend).values
    inside = np.abs(field.grid.nodes) < 1.0
    values = np.where(inside, base - counter_term(field, m, backend, derivative=True), 0.0)
    return SampledField(field.grid, values, f"beurling_{m}")
