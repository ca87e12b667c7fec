"""
Normal solutions: the mu-quasiconformal self-map of D fixing 0 and 1.

Construction for mu supported in D:
  1. F = f_mu - f_mu(0), the principal solution on a box around D.
  2. The reflected map f~(z) = 1/conj(F(1/conj(z))), conformal in D.
  3. lambda = (mu f~_z / conj(f~_z)) o f~^(-1) on f~(D).
  4. f_c = f0_lambda o f~, normalized by f = f_c / f_c(1).

F outside the solve box is evaluated from its Laurent expansion
F(u) = u - f_mu(0) + sum_k a_k u^(-k-1), a_k = (1/pi) int h t^k dA.
"""

import logging
from typing import Callable, Optional, Union

import numpy as np
from scipy.interpolate import griddata
from scipy.ndimage import map_coordinates

from src.config import get_settings
from src.errors import GridSpecError, NormalizationError
from src.grid.derivatives import wirtinger
from src.grid.lattice import make_grid, sample
from src.grid.models import ComplexGrid, GridKind, SampledField
from src.transforms.models import Backend

from .models import BeltramiCoefficient, MappingKind, QcMapping
from .neumann import as_field
from .principal import principal_solution

logger = logging.getLogger(__name__)


def interpolate(field_values: np.ndarray, grid: ComplexGrid, points: np.ndarray, order: int = 3) -> np.ndarray:
    """Spline interpolation of a square-lattice array at complex points (clamped at the edges)."""
    points = np.asarray(points, dtype=complex)
    col = (points.real - grid.axis1[0]) / grid.spacing
    row = (points.imag - grid.axis0[0]) / grid.spacing_y
    coords = np.vstack([row.ravel(), col.ravel()])
    a = np.asarray(field_values).reshape(grid.shape)
    re = map_coordinates(a.real, coords, order=order, mode="nearest")
    im = map_coordinates(a.imag, coords, order=order, mode="nearest")
    return (re + 1j * im).reshape(points.shape)


def resample(
    mu: Union[BeltramiCoefficient, SampledField],
    grid: ComplexGrid,
    rule: Optional[Callable] = None,
) -> SampledField:
    """mu on another square lattice, restricted to D; uses the rule when one is known."""
    if rule is None and isinstance(mu, BeltramiCoefficient):
        rule = mu.rule
    inside = np.abs(grid.nodes) < 1.0
    if rule is not None:
        values = sample(rule, grid).values
    else:
        source = as_field(mu)
        values = interpolate(source.values, source.grid, grid.nodes, order=1)
    return SampledField(grid, np.where(inside, values, 0.0), "mu")


class ReflectedMap:
    """f~(z) = 1/conj(F(1/conj(z))) built from a principal solution F + c."""

    def __init__(self, principal: QcMapping, laurent_radius: float, laurent_terms: int):
        self.principal = principal
        self.grid = principal.grid
        self.laurent_radius = laurent_radius
        self.center = complex(interpolate(principal.f.values, self.grid, np.array([0j]))[0])
        density = principal.fzbar.values
        nodes = self.grid.nodes
        support = density != 0
        t = nodes[support]
        w = density[support] * self.grid.weights[support] / np.pi
        powers = np.ones_like(t)
        coeffs = np.empty(laurent_terms, dtype=complex)
        for k in range(laurent_terms):
            coeffs[k] = np.sum(w * powers)
            powers = powers * t
        self.coeffs = coeffs

    def F(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(F(u), F'(u)) with F = f_mu - f_mu(0); F' is used where F is conformal."""
        u = np.asarray(u, dtype=complex)
        value = np.empty(u.shape, dtype=complex)
        deriv = np.empty(u.shape, dtype=complex)
        far = np.abs(u) > self.laurent_radius
        if np.any(far):
            uf = u[far]
            inv = 1.0 / uf
            k = np.arange(self.coeffs.size)
            pw = inv[:, None] ** (k[None, :] + 1)
            value[far] = uf - self.center + pw @ self.coeffs
            deriv[far] = 1.0 - (pw * inv[:, None]) @ (self.coeffs * (k + 1))
        near = ~far
        if np.any(near):
            value[near] = interpolate(self.principal.f.values, self.grid, u[near]) - self.center
            deriv[near] = interpolate(self.principal.fz.values, self.grid, u[near])
        return value, deriv

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        nonzero = z != 0
        value, _ = self.F(1.0 / np.conj(z[nonzero]))
        out[nonzero] = 1.0 / np.conj(value)
        return out

    def dz(self, z: np.ndarray) -> np.ndarray:
        """f~_z = conj(F'(u)) / (z^2 conj(F(u))^2), u = 1/conj(z)."""
        z = np.asarray(z, dtype=complex)
        value, deriv = self.F(1.0 / np.conj(z))
        return np.conj(deriv) / (z ** 2 * np.conj(value) ** 2)


def normal_solution(
    mu: Union[BeltramiCoefficient, SampledField],
    grid: Optional[ComplexGrid] = None,
    rule: Optional[Callable] = None,
    backend: Union[Backend, str, None] = None,
    tol: Optional[float] = None,
) -> QcMapping:
    """
    Normal solution of f_zbar = mu f_z on D with f(0) = 0 and f(1) = 1.

    Args:
        mu: Coefficient supported in D, on a square lattice around D
        grid: Output lattice (default the lattice of mu)
        rule: Closed form of mu, used instead of interpolation when resampling
        backend: Transform backend for both principal solves
        tol: Neumann tolerance

    Raises:
        ConvergenceError: If either principal solve fails to converge
        NormalizationError: If |f_c(1)| deviates from 1 by more than the tolerance
    """
    cfg = get_settings().solver.normal
    mu_f = as_field(mu)
    out_grid = grid or mu_f.grid
    if out_grid.kind != GridKind.SQUARE:
        raise GridSpecError("kind", out_grid.kind.value, "normal solutions are computed on square lattices")
    n = out_grid.n
    mu_out = resample(mu, out_grid, rule)

    if not np.any(mu_out.values):
        z = out_grid.nodes
        identity = QcMapping(
            f=SampledField(out_grid, z, "f"),
            fz=SampledField(out_grid, np.ones_like(z), "f_z"),
            fzbar=SampledField(out_grid, np.zeros_like(z), "f_zbar"),
            kind=MappingKind.NORMAL,
        )
        logger.info("Normal solution: zero coefficient, identity map")
        return identity

    half = cfg.outer_half_width
    box1 = make_grid(GridKind.SQUARE, n, (-half, half))
    mu1 = resample(mu, box1, rule)
    first = principal_solution(mu1, backend=backend, tol=tol)
    reflected = ReflectedMap(first, cfg.laurent_radius, cfg.laurent_terms)

    # inverse of f~ from scattered samples over |z| <= 1.4
    zs = box1.nodes
    ring = (np.abs(zs) > box1.spacing) & (np.abs(zs) <= 1.4)
    z_samples = np.concatenate([[0j], zs[ring]])
    w_samples = np.concatenate([[0j], reflected(zs[ring])])

    f_tilde_out = reflected(out_grid.nodes)
    half2 = cfg.image_margin * float(np.max(np.abs(f_tilde_out)))
    box2 = make_grid(GridKind.SQUARE, n, (-half2, half2))
    w = box2.nodes
    z_of_w = griddata(
        (w_samples.real, w_samples.imag), z_samples, (w.real, w.imag), method="linear"
    )
    inside = np.isfinite(z_of_w) & (np.abs(z_of_w) < 1.0)
    lam = np.zeros(box2.node_count, dtype=complex)
    if np.any(inside):
        zi = z_of_w[inside]
        if rule is None and isinstance(mu, BeltramiCoefficient):
            rule = mu.rule
        if rule is not None:
            with np.errstate(all="ignore"):
                mu_vals = np.broadcast_to(np.asarray(rule(zi), dtype=complex), zi.shape)
        else:
            mu_vals = interpolate(mu_f.values, mu_f.grid, zi, order=1)
        ftz = reflected.dz(zi)
        lam[inside] = mu_vals * ftz / np.conj(ftz)
    second = principal_solution(SampledField(box2, lam, "lambda"), backend=backend, tol=tol)
    f_lambda_0 = interpolate(second.f.values, box2, np.array([0j]))[0]

    def f_c(points: np.ndarray) -> np.ndarray:
        return interpolate(second.f.values, box2, reflected(points)) - f_lambda_0

    at_one = complex(f_c(np.array([1.0 + 0j]))[0])
    if abs(abs(at_one) - 1.0) > cfg.fc_tolerance:
        raise NormalizationError(abs(at_one), cfg.fc_tolerance)

    values = f_c(out_grid.nodes) / at_one
    f = SampledField(out_grid, values, "f")
    fz, fzbar = wirtinger(f)
    h = out_grid.spacing
    interior = np.abs(out_grid.nodes) <= 1.0 - 4.0 * h
    diagnostics = first.diagnostics.model_copy(
        update={
            "iterations": first.diagnostics.iterations + second.diagnostics.iterations,
            "contraction_ratio": max(first.diagnostics.contraction_ratio, second.diagnostics.contraction_ratio),
            "extra": {"fc_at_one_modulus": abs(at_one), "image_half_width": half2},
        }
    )
    mapping = QcMapping(f=f, fz=fz, fzbar=fzbar, kind=MappingKind.NORMAL, diagnostics=diagnostics)
    residual = mapping.beltrami_residual(mu_out, interior)
    logger.info(f"Normal solution: |f_c(1)| = {abs(at_one):.6f}, interior residual {residual:.3e}")
    return mapping.model_copy(update={"diagnostics": diagnostics.model_copy(update={"residual": residual})})
