"""
Cauchy and Beurling transforms on the plane.

    C f(z) = (1/pi) int f(t)/(z - t) dA(t)
    S f(z) = -(1/pi) p.v. int f(t)/(z - t)^2 dA(t) = d/dz C f(z)

Fields live on a square lattice with spacing h. The Cauchy transform is the
lattice convolution with 1/(pi w) over off-diagonal nodes plus the exact cell
integral of the local linear model of f, which is -(h^2/pi) f_z (the constant
and conj-linear parts integrate to zero over a centered square). The
convolution is done either by zero-padded FFT or by dense chunked sums; both
backends share this discretization.

The Beurling transform is the fourth-order z-derivative of the Cauchy output
computed on a lattice extended by two ghost cells per side, so every node of
the original lattice sees a centered stencil.
"""

import logging
from typing import Optional, Union

import numpy as np
from scipy import fft as sp_fft
from scipy.signal import fftconvolve

from src.config import get_settings
from src.errors import GridSpecError, SupportError
from src.grid.derivatives import d1, lattice_wirtinger
from src.grid.models import ComplexGrid, GridKind, SampledField

from .models import Backend

logger = logging.getLogger(__name__)

GHOST = 2


def _require_square(grid: ComplexGrid, operator: str) -> None:
    if grid.kind != GridKind.SQUARE:
        raise GridSpecError("kind", grid.kind.value, f"{operator} needs a square lattice")


def _resolve_backend(backend: Union[Backend, str, None]) -> Backend:
    return Backend(backend or get_settings().transforms.backend)


def support_leak(a: np.ndarray, ring: int = 2) -> float:
    """max |f| on the outer `ring` cells relative to max |f| (0 for a zero field)."""
    peak = float(np.max(np.abs(a)))
    if peak == 0.0:
        return 0.0
    edge = np.ones(a.shape, dtype=bool)
    edge[ring:-ring, ring:-ring] = False
    return float(np.max(np.abs(a[edge]))) / peak


def check_support(a: np.ndarray, operator: str, tolerance: Optional[float] = None) -> None:
    """Refuse fields that reach the lattice edge; zero padding would alias them."""
    tolerance = get_settings().transforms.support_leak if tolerance is None else tolerance
    leak = support_leak(a)
    if leak > tolerance:
        raise SupportError(operator, leak, tolerance)


def _offset_kernel(grid: ComplexGrid, reach: int) -> np.ndarray:
    """1/(pi w) on lattice offsets -reach..reach, zero at the origin."""
    k = np.arange(-reach, reach + 1)
    dx, dy = np.meshgrid(k * grid.spacing, k * grid.spacing_y, indexing="xy")
    w = dx + 1j * dy
    kernel = np.zeros(w.shape, dtype=complex)
    nonzero = w != 0
    kernel[nonzero] = 1.0 / (np.pi * w[nonzero])
    return kernel


def _lattice_sum_fft(a: np.ndarray, grid: ComplexGrid, ghost: int) -> np.ndarray:
    n = grid.n
    kernel = _offset_kernel(grid, n - 1 + ghost)
    full = fftconvolve(a * (grid.spacing * grid.spacing_y), kernel, mode="full")
    return full[n - 1 : 2 * n - 1 + 2 * ghost, n - 1 : 2 * n - 1 + 2 * ghost]


def dense_kernel_sum(
    targets: np.ndarray,
    sources: np.ndarray,
    weights: np.ndarray,
    kernel,
    chunk: Optional[int] = None,
) -> np.ndarray:
    """
    sum_k kernel(targets_j, sources_k) * weights_k, evaluated in blocks of targets.

    The kernel callable receives (targets[:, None], sources[None, :]).
    """
    chunk = chunk or get_settings().transforms.direct_chunk
    flat = targets.ravel()
    out = np.zeros(flat.shape, dtype=complex)
    if sources.size == 0:
        return out.reshape(targets.shape)
    for start in range(0, flat.size, chunk):
        block = flat[start : start + chunk]
        with np.errstate(divide="ignore", invalid="ignore"):
            values = kernel(block[:, None], sources[None, :])
        out[start : start + chunk] = values @ weights
    return out.reshape(targets.shape)


def _cauchy_kernel(z: np.ndarray, t: np.ndarray) -> np.ndarray:
    diff = z - t
    return np.where(diff == 0, 0.0, 1.0 / (np.pi * np.where(diff == 0, 1.0, diff)))


def _lattice_sum_direct(a: np.ndarray, grid: ComplexGrid, ghost: int) -> np.ndarray:
    flat = a.ravel()
    support = flat != 0
    sources = grid.nodes[support]
    weights = flat[support] * (grid.spacing * grid.spacing_y)
    return dense_kernel_sum(grid.extended_node_array(ghost), sources, weights, _cauchy_kernel)


def cell_correction(a: np.ndarray, grid: ComplexGrid, ghost: int = 0) -> np.ndarray:
    """-(h^2/pi) f_z, zero-padded by `ghost` cells."""
    fz, _ = lattice_wirtinger(a, grid.spacing, grid.spacing_y)
    corr = -(grid.spacing * grid.spacing_y / np.pi) * fz
    return np.pad(corr, ghost) if ghost else corr


def cauchy_extended(
    field: SampledField,
    backend: Union[Backend, str, None] = None,
    ghost: int = GHOST,
) -> np.ndarray:
    """Cauchy transform on the lattice extended by `ghost` cells per side."""
    grid = field.grid
    _require_square(grid, "cauchy")
    backend = _resolve_backend(backend)
    a = field.as_array()
    if backend == Backend.FFT:
        check_support(a, "cauchy")
        total = _lattice_sum_fft(a, grid, ghost)
    else:
        total = _lattice_sum_direct(a, grid, ghost)
    return total + cell_correction(a, grid, ghost)


def _crop(ext: np.ndarray, ghost: int) -> np.ndarray:
    return ext[ghost:-ghost, ghost:-ghost] if ghost else ext


def cauchy(field: SampledField, backend: Union[Backend, str, None] = None) -> SampledField:
    """
    Cauchy transform of a compactly supported field.

    Raises:
        SupportError: fft backend only, if the field reaches the lattice edge
    """
    ext = cauchy_extended(field, backend, GHOST)
    return SampledField(field.grid, _crop(ext, GHOST).ravel(), "cauchy")


def z_derivative_of_extended(ext: np.ndarray, grid: ComplexGrid, ghost: int = GHOST) -> np.ndarray:
    """Centered fourth-order d/dz of a ghost-extended array, cropped to the lattice."""
    dx = d1(ext, grid.spacing, axis=1)
    dy = d1(ext, grid.spacing_y, axis=0)
    return _crop(0.5 * (dx - 1j * dy), ghost)


def beurling(field: SampledField, backend: Union[Backend, str, None] = None) -> SampledField:
    """Beurling transform, computed as d/dz of the Cauchy transform."""
    ext = cauchy_extended(field, backend, GHOST)
    values = z_derivative_of_extended(ext, field.grid, GHOST)
    return SampledField(field.grid, values.ravel(), "beurling")


def spectral_beurling(field: SampledField) -> SampledField:
    """
    Beurling transform as the Fourier multiplier conj(k)/k on a 2x zero-padded lattice.

    Accurate for fields whose transform decays fast and whose image is
    localized (for example z-bar derivatives of Gaussians); used as an
    independent reference.
    """
    grid = field.grid
    _require_square(grid, "spectral_beurling")
    n = grid.n
    padded = np.zeros((2 * n, 2 * n), dtype=complex)
    padded[:n, :n] = field.as_array()
    spectrum = sp_fft.fft2(padded)
    kx = sp_fft.fftfreq(2 * n, d=grid.spacing)
    ky = sp_fft.fftfreq(2 * n, d=grid.spacing_y)
    k = kx[None, :] + 1j * ky[:, None]
    multiplier = np.zeros(k.shape, dtype=complex)
    nonzero = k != 0
    multiplier[nonzero] = np.conj(k[nonzero]) / k[nonzero]
    values = sp_fft.ifft2(spectrum * multiplier)[:n, :n]
    return SampledField(grid, values.ravel(), "spectral_beurling")
