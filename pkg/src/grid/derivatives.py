"""
Finite-difference and Cauchy-circle derivatives of complex fields.

Lattice derivatives use fourth-order central differences in the interior.
Near array edges or mask edges they fall back to second-order central, then
second-order one-sided stencils, so masked disk fields never read values from
outside their support.
"""

from math import factorial
from typing import Callable, Optional

import numpy as np

from src.errors import GridSpecError

from .models import ComplexGrid, GridKind, SampledField


def _shift(a: np.ndarray, k: int, axis: int, fill) -> np.ndarray:
    """out[i] = a[i + k] along axis, with `fill` beyond the array."""
    out = np.full_like(a, fill)
    n = a.shape[axis]
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    if k >= 0:
        src[axis] = slice(k, n)
        dst[axis] = slice(0, n - k)
    else:
        src[axis] = slice(0, n + k)
        dst[axis] = slice(-k, n)
    out[tuple(dst)] = a[tuple(src)]
    return out


def d1(
    a: np.ndarray,
    h: float,
    axis: int,
    mask: Optional[np.ndarray] = None,
    periodic: bool = False,
) -> np.ndarray:
    """
    First derivative along one axis.

    Args:
        a: Array of samples
        h: Spacing along the axis
        axis: Axis to differentiate
        mask: Nodes that carry valid samples (default all)
        periodic: Wrap around along the axis

    Returns:
        Derivative array; zero at masked-out nodes
    """
    if periodic:
        r = lambda k: np.roll(a, -k, axis=axis)  # noqa: E731
        return (-r(2) + 8.0 * r(1) - 8.0 * r(-1) + r(-2)) / (12.0 * h)

    m = np.ones(a.shape, dtype=bool) if mask is None else mask
    p1, p2 = _shift(m, 1, axis, False), _shift(m, 2, axis, False)
    m1, m2 = _shift(m, -1, axis, False), _shift(m, -2, axis, False)
    a_p1, a_p2 = _shift(a, 1, axis, 0), _shift(a, 2, axis, 0)
    a_m1, a_m2 = _shift(a, -1, axis, 0), _shift(a, -2, axis, 0)

    c4 = m & p1 & p2 & m1 & m2
    c2 = m & p1 & m1 & ~c4
    fwd = m & p1 & p2 & ~c4 & ~c2
    bwd = m & m1 & m2 & ~c4 & ~c2 & ~fwd

    out = np.zeros(a.shape, dtype=np.result_type(a, float))
    out[c4] = ((-a_p2 + 8.0 * a_p1 - 8.0 * a_m1 + a_m2) / (12.0 * h))[c4]
    out[c2] = ((a_p1 - a_m1) / (2.0 * h))[c2]
    out[fwd] = ((-3.0 * a + 4.0 * a_p1 - a_p2) / (2.0 * h))[fwd]
    out[bwd] = ((3.0 * a - 4.0 * a_m1 + a_m2) / (2.0 * h))[bwd]
    return out


def lattice_wirtinger(
    a: np.ndarray,
    hx: float,
    hy: float,
    mask: Optional[np.ndarray] = None,
    periodic_y: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """(d/dz, d/dzbar) of an array with axis 1 = x and axis 0 = y."""
    ax = d1(a, hx, axis=1, mask=mask)
    ay = d1(a, hy, axis=0, mask=mask, periodic=periodic_y)
    return 0.5 * (ax - 1j * ay), 0.5 * (ax + 1j * ay)


def wirtinger(field: SampledField, mask: Optional[np.ndarray] = None) -> tuple[SampledField, SampledField]:
    """
    Wirtinger derivatives (f_z, f_zbar) of a sampled field.

    Polar grids use the chain rule through (r, theta); strip grids are
    periodic in phi.
    """
    grid = field.grid
    a = field.as_array()
    m = None if mask is None else np.asarray(mask).reshape(grid.shape)
    if grid.kind == GridKind.POLAR:
        r = grid.axis0[:, None]
        theta = grid.axis1[None, :]
        ar = d1(a, grid.spacing, axis=0, mask=m)
        at = d1(a, 2.0 * np.pi / grid.n, axis=1, periodic=True)
        fz = 0.5 * np.exp(-1j * theta) * (ar - 1j * at / r)
        fzb = 0.5 * np.exp(1j * theta) * (ar + 1j * at / r)
    else:
        fz, fzb = lattice_wirtinger(
            a, grid.spacing, grid.spacing_y, mask=m, periodic_y=grid.kind == GridKind.STRIP
        )
    if m is not None:
        fz = np.where(m, fz, 0.0)
        fzb = np.where(m, fzb, 0.0)
    label = field.label or "f"
    return (
        SampledField(grid, fz.ravel(), f"{label}_z"),
        SampledField(grid, fzb.ravel(), f"{label}_zbar"),
    )


def dz(field: SampledField, mask: Optional[np.ndarray] = None) -> SampledField:
    return wirtinger(field, mask)[0]


def dzbar(field: SampledField, mask: Optional[np.ndarray] = None) -> SampledField:
    return wirtinger(field, mask)[1]


def holomorphic_derivatives(
    h: Callable[[np.ndarray], np.ndarray],
    z: np.ndarray,
    order: int = 2,
    radius: Optional[np.ndarray] = None,
    points: int = 32,
) -> list[np.ndarray]:
    """
    Derivatives h^(1..order) of a holomorphic callable by the Cauchy integral.

    The circle integral is the trapezoid rule on `points` nodes, which is a
    discrete Fourier coefficient:  h^(k)(z) = k!/rho^k * mean_j h(z + rho e^{i t_j}) e^{-i k t_j}.

    Args:
        h: Vectorized holomorphic function
        z: Evaluation points
        order: Highest derivative order
        radius: Circle radii (default (1 - |z|)/2, for functions on the disk)
        points: Trapezoid nodes per circle
    """
    z = np.asarray(z, dtype=complex)
    rho = (1.0 - np.abs(z)) / 2.0 if radius is None else np.broadcast_to(radius, z.shape)
    if np.any(rho <= 0):
        raise GridSpecError("radius", float(np.min(rho)), "Cauchy circles need a positive radius")
    t = 2.0 * np.pi * np.arange(points) / points
    circle = np.exp(1j * t)
    samples = np.asarray(h(z[..., None] + rho[..., None] * circle), dtype=complex)
    derivs = []
    for k in range(1, order + 1):
        coeff = np.mean(samples * np.conj(circle) ** k, axis=-1)
        derivs.append(factorial(k) * coeff / rho ** k)
    return derivs


def pullback_wirtinger(
    field: SampledField,
    parameterization=None,
    mask: Optional[np.ndarray] = None,
) -> tuple[SampledField, SampledField]:
    """
    (f_w, f_wbar) for a field stored at z with value f(g(z)).

    Inverts F_z = f_w g_z + f_wbar conj(g_zbar), F_zbar = f_w g_zbar + f_wbar conj(g_z).
    Without a parameterization this is the plain Wirtinger pair.
    """
    fz, fzb = wirtinger(field, mask)
    if parameterization is None:
        return fz, fzb
    gz, gzb = parameterization.derivatives(field.grid.nodes)
    jac = np.abs(gz) ** 2 - np.abs(gzb) ** 2
    f_w = (fz.values * np.conj(gz) - fzb.values * np.conj(gzb)) / jac
    f_wb = (gz * fzb.values - gzb * fz.values) / jac
    label = field.label or "f"
    return (
        SampledField(field.grid, f_w, f"{label}_w"),
        SampledField(field.grid, f_wb, f"{label}_wbar"),
    )
