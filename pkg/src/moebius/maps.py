"""
Moebius and affine normalizers, and the parameterizations g: D -> Omega.

Every function here is vectorized over numpy arrays of complex points.
"""

import logging
from typing import Optional, Union

import numpy as np
from scipy.ndimage import map_coordinates
from scipy.spatial import cKDTree

from src.errors import GridSpecError, ParameterRangeError, ReflectionError
from src.grid.models import ComplexGrid, GridKind, SampledField

from .models import AffineEllipseMap, DiskAutomorphism

logger = logging.getLogger(__name__)

ComplexLike = Union[complex, np.ndarray]


def apply_moebius(aut: DiskAutomorphism, z: ComplexLike) -> ComplexLike:
    """phi_w(z) = (w - z)/(1 - z conj(w)); phi_w is its own inverse."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > 1.0 + 1e-12):
        raise ParameterRangeError("z", float(np.max(np.abs(z))), "Moebius normalizer takes points of the closed disk")
    w = aut.w
    denom = 1.0 - z * np.conj(w)
    # |z conj(w)| < 1 whenever |z| <= 1 and |w| < 1
    assert np.all(np.abs(denom) > 0.0)
    out = (w - z) / denom
    return out[()] if out.ndim == 0 else out


def affine_forward(amap: AffineEllipseMap, z: ComplexLike) -> ComplexLike:
    z = np.asarray(z, dtype=complex)
    out = z + amap.mu0 * np.conj(z)
    return out[()] if out.ndim == 0 else out


def affine_inverse(amap: AffineEllipseMap, z: ComplexLike) -> ComplexLike:
    z = np.asarray(z, dtype=complex)
    out = (z - amap.mu0 * np.conj(z)) / (1.0 - abs(amap.mu0) ** 2)
    return out[()] if out.ndim == 0 else out


def automorphism_identity_gap(w: ComplexLike, z: ComplexLike) -> np.ndarray:
    """|1 - conj(w) z|^2 - |w - z|^2 - (1 - |w|^2)(1 - |z|^2); identically zero."""
    w = np.asarray(w, dtype=complex)
    z = np.asarray(z, dtype=complex)
    lhs = np.abs(1.0 - np.conj(w) * z) ** 2 - np.abs(w - z) ** 2
    return lhs - (1.0 - np.abs(w) ** 2) * (1.0 - np.abs(z) ** 2)


def automorphism_gap_bound(w: ComplexLike, z: ComplexLike) -> tuple[np.ndarray, np.ndarray]:
    """
    Both sides of ||1 - conj(w) z| - |w - z|| >= (1 - |w|^2)(1 - |z|^2) / (2 |1 - conj(w) z|).

    Since |w - z| <= |1 - conj(w) z| on D, the difference of moduli is the
    difference of squares over a sum of at most twice the larger modulus. Where
    |1 - conj(w) z| <= 1 this is at least half the product.

    Returns:
        (left side, right side) arrays
    """
    w = np.asarray(w, dtype=complex)
    z = np.asarray(z, dtype=complex)
    left = np.abs(np.abs(1.0 - np.conj(w) * z) - np.abs(w - z))
    right = (1.0 - np.abs(w) ** 2) * (1.0 - np.abs(z) ** 2) / (2.0 * np.abs(1.0 - np.conj(w) * z))
    return left, right


def newton_inverse(
    param,
    w: ComplexLike,
    z0: Optional[np.ndarray] = None,
    tol: float = 1e-12,
    max_iter: int = 60,
) -> np.ndarray:
    """
    Solve g(z) = w for a real-differentiable g by Newton's method.

    The real-linear step solves g_z d + g_zbar conj(d) = -r, i.e.
    d = (conj(g_z)(-r) - g_zbar conj(-r)) / (|g_z|^2 - |g_zbar|^2).
    """
    w = np.asarray(w, dtype=complex)
    z = np.array(w if z0 is None else z0, dtype=complex)
    for _ in range(max_iter):
        r = np.asarray(param(z), dtype=complex) - w
        if np.all(np.abs(r) <= tol * np.maximum(1.0, np.abs(w))):
            break
        gz, gzb = param.derivatives(z)
        jac = np.abs(gz) ** 2 - np.abs(gzb) ** 2
        if np.any(jac <= 0):
            bad = np.asarray(w).ravel()[int(np.argmin(np.ravel(jac)))]
            raise ReflectionError(complex(bad), "Parameterization is not orientation preserving")
        z = z + (np.conj(gz) * (-r) - gzb * np.conj(-r)) / jac
    else:
        residual = float(np.max(np.abs(np.asarray(param(z)) - w)))
        logger.warning(f"Newton inversion stopped after {max_iter} steps, residual {residual:.3e}")
    return z


class IdentityParameterization:
    """g(z) = z."""

    def __call__(self, z):
        return np.asarray(z, dtype=complex)

    def derivatives(self, z):
        z = np.asarray(z, dtype=complex)
        return np.ones_like(z), np.zeros_like(z)

    def inverse(self, w):
        return np.asarray(w, dtype=complex)

    def __repr__(self) -> str:
        return "IdentityParameterization()"


class AffineParameterization:
    """g(z) = z + mu0 conj(z); maps D onto an ellipse."""

    def __init__(self, amap: Union[AffineEllipseMap, complex]):
        self.map = amap if isinstance(amap, AffineEllipseMap) else AffineEllipseMap(mu0=amap)

    def __call__(self, z):
        return affine_forward(self.map, z)

    def derivatives(self, z):
        z = np.asarray(z, dtype=complex)
        return np.ones_like(z), np.full_like(z, self.map.mu0)

    def inverse(self, w):
        return affine_inverse(self.map, w)

    def __repr__(self) -> str:
        return f"AffineParameterization(mu0={self.map.mu0})"


class SampledParameterization:
    """
    A solved mapping on a square lattice used as a parameterization.

    Values and first derivatives are interpolated with cubic splines; the
    inverse is computed by Newton iteration started from the nearest node.
    """

    def __init__(self, f: SampledField, fz: SampledField, fzbar: SampledField):
        grid = f.grid
        if grid.kind != GridKind.SQUARE:
            raise GridSpecError("kind", grid.kind.value, "Sampled parameterizations need a square lattice")
        if fz.grid != grid or fzbar.grid != grid:
            raise GridSpecError("grid", grid.kind.value, "Mapping and derivatives must share a grid")
        self.grid: ComplexGrid = grid
        self._f = f.as_array()
        self._fz = fz.as_array()
        self._fzbar = fzbar.as_array()
        self._tree = None

    @classmethod
    def from_mapping(cls, mapping) -> "SampledParameterization":
        """Build from any object with f, fz and fzbar fields (a QcMapping)."""
        return cls(mapping.f, mapping.fz, mapping.fzbar)

    def _coords(self, z: np.ndarray) -> np.ndarray:
        g = self.grid
        col = (z.real - g.axis1[0]) / g.spacing
        row = (z.imag - g.axis0[0]) / g.spacing_y
        return np.vstack([row.ravel(), col.ravel()])

    def _interp(self, a: np.ndarray, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        c = self._coords(z)
        re = map_coordinates(a.real, c, order=3, mode="nearest")
        im = map_coordinates(a.imag, c, order=3, mode="nearest")
        return (re + 1j * im).reshape(z.shape)

    def __call__(self, z):
        return self._interp(self._f, z)

    def derivatives(self, z):
        return self._interp(self._fz, z), self._interp(self._fzbar, z)

    def inverse(self, w):
        w = np.asarray(w, dtype=complex)
        if self._tree is None:
            values = self._f.ravel()
            self._tree = cKDTree(np.column_stack([values.real, values.imag]))
        _, idx = self._tree.query(np.column_stack([w.real.ravel(), w.imag.ravel()]))
        nearest = self.grid.nodes[idx]
        return newton_inverse(self, w, nearest.reshape(w.shape))

    def __repr__(self) -> str:
        return f"SampledParameterization(n={self.grid.n})"
