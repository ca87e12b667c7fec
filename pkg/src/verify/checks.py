"""
Registry of estimate checks.

Each check builds its own grids, runs one estimate and returns the measured
values with a pass flag. The anchor names the estimate the check exercises.
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from src.config import VerifyTolerances
from src.grid.geometry import DiskGeometry, QuasidiskGeometry
from src.grid.lattice import disk_lattice, field_from_array, make_grid, sample, strip_lattice
from src.grid.models import GridKind
from src.grid.norms import WeightedNormSpec, lp_norm, weighted_norm
from src.moebius.maps import AffineParameterization, IdentityParameterization
from src.moebius.models import ReflectionRule
from src.moebius.reflection import measure_sandwich
from src.params.expressions import BUMPS
from src.params.holder import holder_modulus
from src.params.models import FamilySpec
from src.solver.chain import derivative_chain_solve, reconstruct_map
from src.solver.logarithmic import log_chart_to_plane, plane_coefficient, principal_log_solution
from src.solver.models import BeltramiCoefficient
from src.solver.normal import interpolate, normal_solution
from src.solver.principal import principal_solution
from src.solver.univalence import injectivity_sample, univalence_margin
from src.transforms.disk import beurling_m, cauchy_m
from src.transforms.domain import domain_beurling_m, domain_cauchy_m
from src.transforms.models import Backend, OperatorFamily, OperatorSpec
from src.transforms.plane import beurling, spectral_beurling

from .estimates import decay_exponent_fit, operator_norm_estimate, right_inverse_residual, trial_field

logger = logging.getLogger(__name__)

REFERENCE_N = 256
BOUNDS_SCHEDULE = (0.3, 0.15, 0.05)
MIN_REFINEMENT_DROP = 3.0
DECAY_STABILITY = 0.1
CONJUGATION_C = 0.1
CONJUGATION_CELLS = 10.0


@dataclass
class CheckContext:
    n: int
    seed: int
    trials: int
    tolerances: VerifyTolerances

    def scaled(self, tol: float, order: float = 2.0) -> float:
        """A tolerance stated at n=256 carried over to the context's n."""
        return tol * (REFERENCE_N / self.n) ** order


@dataclass
class CheckOutcome:
    measured: dict[str, Any]
    passed: bool
    tol: Optional[float] = None


@dataclass
class Check:
    id: str
    anchor: str
    run: Callable[[CheckContext], CheckOutcome]


REGISTRY: dict[str, Check] = {}


def register(check_id: str, anchor: str):
    def decorator(fn: Callable[[CheckContext], CheckOutcome]):
        REGISTRY[check_id] = Check(check_id, anchor, fn)
        return fn

    return decorator


def cap(z: np.ndarray, radius: float = 1.0) -> np.ndarray:
    return BUMPS["cap"](np.asarray(z, dtype=complex) / radius)


def strip_cutoff(xi: np.ndarray) -> np.ndarray:
    """Smooth step: 1 for xi <= -1, 0 for xi >= 0."""
    xi = np.asarray(xi, dtype=float)

    def psi(x):
        out = np.zeros(x.shape)
        pos = x > 0
        out[pos] = np.exp(-1.0 / x[pos])
        return out

    left, right = psi(-xi), psi(1.0 + xi)
    return left / (left + right)


def log_coefficient(c: float) -> Callable[[np.ndarray], np.ndarray]:
    """nu(zeta) = c e^xi cutoff(xi)."""
    return lambda zeta: c * np.exp(zeta.real) * strip_cutoff(zeta.real)


def chain_coefficient(z: np.ndarray) -> np.ndarray:
    """0.03 (1 - |z|^2) cap(z)."""
    return 0.03 * BUMPS["taper"](z) * cap(z)


def radial_coefficient(z: np.ndarray, k: float = 0.2) -> np.ndarray:
    """k z/conj(z) on D, whose normal solution is z |z|^((1+k)/(1-k) - 1)."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    keep = (z != 0) & (np.abs(z) < 1.0)
    out[keep] = k * z[keep] / np.conj(z[keep])
    return out


@register("kz-norm", "tends to 1 as p→2")
def check_kz_norm(ctx: CheckContext) -> CheckOutcome:
    spec = OperatorSpec(family=OperatorFamily.BEURLING)
    norms = {p: operator_norm_estimate(spec, p, ctx.trials, ctx.seed, ctx.n) for p in (2.0, 2.5, 3.0)}
    tol = ctx.tolerances.isometry
    passed = (
        abs(norms[2.0] - 1.0) <= tol
        and norms[2.5] >= norms[2.0] - tol
        and norms[3.0] >= norms[2.5] - tol
    )
    return CheckOutcome({f"p={p}": v for p, v in norms.items()}, passed, tol)


@register("beurling-isometry", "Beurling transform is an isometry of L^2; counter-terms raise the norm")
def check_beurling_isometry(ctx: CheckContext) -> CheckOutcome:
    spec = OperatorSpec(family=OperatorFamily.BEURLING)
    grid = make_grid(GridKind.SQUARE, ctx.n, (-2.0, 2.0))
    f = trial_field(spec, grid, np.random.default_rng([ctx.seed, 0]))
    lattice = lp_norm(beurling(f)) / lp_norm(f)
    spectral = lp_norm(spectral_beurling(f)) / lp_norm(f)
    s1 = operator_norm_estimate(OperatorSpec(family=OperatorFamily.BEURLING_M, m=1), 2.0, ctx.trials, ctx.seed, ctx.n)
    tol = ctx.tolerances.isometry
    # the lattice transform differentiates with 4th-order stencils; the spectral oracle is exact
    lattice_tol = ctx.scaled(tol, order=4.0)
    passed = abs(lattice - 1.0) <= lattice_tol and abs(spectral - 1.0) <= tol and s1 >= 1.0 - tol
    measured = {"lattice": lattice, "lattice_tol": lattice_tol, "spectral": spectral, "beurling_1": s1}
    return CheckOutcome(measured, passed, tol)


def _converging_residual(ctx: CheckContext, residual_at: Callable[[int], float]) -> CheckOutcome:
    """Residual at n within tolerance, dropping at least MIN_REFINEMENT_DROP-fold at 2n."""
    residual = residual_at(ctx.n)
    refined = residual_at(2 * ctx.n)
    drop = residual / refined if refined > 0.0 else float("inf")
    tol = ctx.scaled(ctx.tolerances.right_inverse)
    passed = residual <= tol and drop >= MIN_REFINEMENT_DROP
    return CheckOutcome({"residual": residual, "residual_2n": refined, "drop": drop}, passed, tol)


def cauchy_residual(n: int) -> float:
    grid = make_grid(GridKind.SQUARE, n, (-2.0, 2.0))
    f = sample(lambda z: cap(z, 0.75), grid, "bump")
    return right_inverse_residual(OperatorSpec(family=OperatorFamily.CAUCHY), f)


def cauchy_m_residual(n: int) -> float:
    f = sample(lambda z: cap(z, 0.5), disk_lattice(n), "bump")
    return right_inverse_residual(OperatorSpec(family=OperatorFamily.CAUCHY_M, m=3), f)


def strip_residual(n: int) -> float:
    grid = strip_lattice(n)
    f = sample(lambda zeta: np.exp(zeta.real) * np.cos(zeta.imag) * strip_cutoff(zeta.real), grid, "strip bump")
    xi = grid.nodes.real
    band = (xi >= -3.0) & (xi <= -0.5)
    return right_inverse_residual(OperatorSpec(family=OperatorFamily.STRIP_CAUCHY), f, band)


@register("cauchy-right-inverse", "right inverse to the Cauchy-Riemann operator")
def check_cauchy_right_inverse(ctx: CheckContext) -> CheckOutcome:
    return _converging_residual(ctx, cauchy_residual)


@register("cauchy-m-right-inverse", "C_m is right-inverse to the Cauchy-Riemann operator on D")
def check_cauchy_m_right_inverse(ctx: CheckContext) -> CheckOutcome:
    return _converging_residual(ctx, cauchy_m_residual)


@register("strip-right-inverse", "P_H is right inverse to d/dzetabar")
def check_strip_right_inverse(ctx: CheckContext) -> CheckOutcome:
    return _converging_residual(ctx, strip_residual)


def _weighted_ratio(n: int, m: int) -> float:
    grid = disk_lattice(n)
    h = grid.spacing
    z = grid.nodes
    keep = np.abs(z) <= 1.0 - 4.0 * h
    values = np.zeros(grid.node_count)
    values[keep] = (1.0 - np.abs(z[keep])) ** -2
    f = field_from_array(grid, values, "weighted")
    out = cauchy_m(f, m)
    disk = DiskGeometry()
    num = weighted_norm(out, WeightedNormSpec(p=float("inf"), s=2.0, geometry=disk))
    den = weighted_norm(f, WeightedNormSpec(p=4.0, s=2.0, geometry=disk))
    return num / den


@register("cauchy-m-weighted", "C_m is bounded from L^p_s(D) into C^0_s(D)")
def check_cauchy_m_weighted(ctx: CheckContext) -> CheckOutcome:
    coarse = _weighted_ratio(ctx.n // 2, 3)
    fine = _weighted_ratio(ctx.n, 3)
    plain_coarse = _weighted_ratio(ctx.n // 2, 0)
    plain_fine = _weighted_ratio(ctx.n, 0)
    growth = fine / coarse
    return CheckOutcome(
        {"ratio_coarse": coarse, "ratio_fine": fine, "growth": growth, "plain_growth": plain_fine / plain_coarse},
        growth <= 1.5,
        1.5,
    )


@register("strip-isometry", "T_H is bounded in L^2_H with norm 1")
def check_strip_isometry(ctx: CheckContext) -> CheckOutcome:
    norm = operator_norm_estimate(OperatorSpec(family=OperatorFamily.STRIP_BEURLING), 2.0, ctx.trials, ctx.seed, ctx.n)
    tol = ctx.tolerances.isometry
    return CheckOutcome({"norm": norm}, abs(norm - 1.0) <= tol, tol)


@register("principal-closed-form", "principal solution normalized by f(z) = z + O(1/z)")
def check_principal_closed_form(ctx: CheckContext) -> CheckOutcome:
    grid = make_grid(GridKind.SQUARE, ctx.n, (-2.0, 2.0))
    mu = sample(lambda z: 0.5 * (np.abs(z) < 1.0), grid, "mu")
    mapping = principal_solution(mu)
    z = grid.nodes
    h = grid.spacing
    expected = np.where(np.abs(z) < 1.0, z + 0.5 * np.conj(z), z + 0.5 / z)
    away = np.abs(np.abs(z) - 1.0) > 4.0 * h
    error = float(np.max(np.abs(mapping.f.values - expected)[away]))
    jacobian = float(np.min(mapping.jacobian()[away]))
    tol = ctx.tolerances.closed_form_cells * h
    return CheckOutcome({"sup_error": error, "min_jacobian": jacobian}, error <= tol and jacobian > 0, tol)


@register("normal-fixed-points", "normal map is a mu-quasiconformal homeomorphism of D fixing 0 and 1")
def check_normal_fixed_points(ctx: CheckContext) -> CheckOutcome:
    grid = disk_lattice(ctx.n)
    mu = BeltramiCoefficient.from_rule(radial_coefficient, grid, d=0.2)
    mapping = normal_solution(mu, rule=radial_coefficient)
    z = grid.nodes
    h = grid.spacing
    f = mapping.f.values
    expected = z * np.abs(z) ** 0.5
    interior = np.abs(z) <= 1.0 - 4.0 * h
    error = float(np.max(np.abs(f - expected)[interior]))
    at_zero = abs(complex(interpolate(f, grid, np.array([0j]))[0]))
    at_one = abs(complex(interpolate(f, grid, np.array([1.0 + 0j]))[0]) - 1.0)
    inside = np.abs(z) < 1.0
    ring = inside & (np.abs(z) >= 1.0 - 2.0 * h)
    max_modulus = float(np.max(np.abs(f[inside])))
    min_ring = float(np.min(np.abs(f[ring])))
    tol = ctx.tolerances.normal_cells * h
    passed = (
        error <= tol and at_zero <= tol and at_one <= tol
        and max_modulus <= 1.0 + tol and min_ring >= 1.0 - tol
    )
    measured = {
        "sup_error": error,
        "f_at_0": at_zero,
        "f_at_1_gap": at_one,
        "max_modulus": max_modulus,
        "min_boundary_modulus": min_ring,
    }
    return CheckOutcome(measured, passed, tol)


@register("derivative-bounds", "a <= |f_z| <= A, tending to 1 as d and b_1 tend to 0")
def check_derivative_bounds(ctx: CheckContext) -> CheckOutcome:
    grid = disk_lattice(ctx.n)
    lows, highs = [], []
    for d in BOUNDS_SCHEDULE:
        rule = lambda z, d=d: d * cap(z)
        # b_1 of d cap is about d/3, so b_1 = d is a valid certificate
        mu = BeltramiCoefficient.from_rule(rule, grid, d=d, growth=[(1, d)])
        a, big_a = normal_solution(mu, rule=rule).derivative_bounds(0.9)
        lows.append(a)
        highs.append(big_a)
    gaps = [max(abs(1.0 - a), abs(b - 1.0)) for a, b in zip(lows, highs)]

    d0 = BOUNDS_SCHEDULE[0]
    coarse_grid = disk_lattice(ctx.n // 2)
    coarse_rule = lambda z: d0 * cap(z)
    coarse = normal_solution(BeltramiCoefficient.from_rule(coarse_rule, coarse_grid, d=d0), rule=coarse_rule)
    coarse_a, coarse_big_a = coarse.derivative_bounds(0.9)
    drift = max(abs(coarse_a - lows[0]), abs(coarse_big_a - highs[0]))
    tol = ctx.tolerances.normal_cells * coarse_grid.spacing

    passed = (
        all(a > 0 for a in lows)
        and all(np.isfinite(highs))
        and all(g1 >= g2 for g1, g2 in zip(gaps, gaps[1:]))
        and drift <= tol
    )
    measured = {
        "d": list(BOUNDS_SCHEDULE),
        "b_1": list(BOUNDS_SCHEDULE),
        "a": lows,
        "A": highs,
        "refinement_drift": drift,
    }
    return CheckOutcome(measured, passed, tol)


@register("log-bound", "|f_nu(zeta) - zeta| <= C_a c^2/(1-d)")
def check_log_bound(ctx: CheckContext) -> CheckOutcome:
    grid = strip_lattice(ctx.n)
    deviations = {}
    for c in (0.1, 0.2):
        nu = sample(log_coefficient(c), grid, "nu")
        deviations[c] = principal_log_solution(nu).diagnostics.extra["sup_deviation"]
    ratio = deviations[0.2] / deviations[0.1]
    exponent = float(np.log2(ratio))
    # quadratic scaling predicts exponent 2; accept within one
    passed = 1.0 <= exponent <= 3.0
    measured = {"sup_c=0.1": deviations[0.1], "sup_c=0.2": deviations[0.2], "ratio": ratio, "exponent": exponent}
    return CheckOutcome(measured, passed)


@register("domain-disk-reduction", "P_m and T_m on D with the identity map reduce to C_m and S_m")
def check_domain_disk_reduction(ctx: CheckContext) -> CheckOutcome:
    grid = disk_lattice(min(ctx.n, 64))
    f = sample(lambda z: cap(z, 0.6) * (1.0 + 0.5j * z), grid, "bump")
    rule = ReflectionRule.through(QuasidiskGeometry(IdentityParameterization()))
    scale = float(np.max(np.abs(f.values)))
    cauchy_gap = np.max(np.abs(domain_cauchy_m(f, rule, 2).values - cauchy_m(f, 2, Backend.DIRECT).values)) / scale
    beurling_gap = np.max(np.abs(domain_beurling_m(f, rule, 2).values - beurling_m(f, 2, Backend.DIRECT).values)) / scale
    tol = 1e-8
    return CheckOutcome(
        {"cauchy_gap": float(cauchy_gap), "beurling_gap": float(beurling_gap)},
        cauchy_gap <= tol and beurling_gap <= tol,
        tol,
    )


@register("reflection-sandwich", "c(1 - |z|^2) <= |w - w_hat| <= C(1 - |z|^2)")
def check_reflection_sandwich(ctx: CheckContext) -> CheckOutcome:
    sandwich = measure_sandwich(AffineParameterization(0.3))
    return CheckOutcome({"c": sandwich.lower, "C": sandwich.upper, "samples": sandwich.samples}, sandwich.holds)


@register("chain-pipeline", "F(w) = int e^g dw + mu e^g dwbar with |F_ww/F_w| dist < 1")
def check_chain_pipeline(ctx: CheckContext) -> CheckOutcome:
    grid = disk_lattice(ctx.n)
    mu = BeltramiCoefficient.from_rule(chain_coefficient, grid, d=0.03)
    chain = derivative_chain_solve(mu, k=1, m=8)
    mapping = reconstruct_map(chain, mu)
    margin = univalence_margin(mapping)
    sample_result = injectivity_sample(mapping, seed=ctx.seed)
    tol = ctx.tolerances.chain_residual
    discrepancy = mapping.diagnostics.extra["path_discrepancy"]
    passed = (
        chain.residuals[0] <= tol
        and discrepancy <= tol
        and mapping.diagnostics.residual <= tol
        and margin <= 0.5
        and sample_result.holds
    )
    measured = {
        "chain_residual": chain.residuals[0],
        "decay_1": chain.diagnostics.extra["decay_1"],
        "path_discrepancy": discrepancy,
        "dilatation_residual": mapping.diagnostics.residual,
        "univalence_margin": margin,
        "injectivity_pairs": sample_result.pairs,
        "injectivity_violations": sample_result.violations,
    }
    return CheckOutcome(measured, passed, tol)


@register("holder-slope", "|f(z,t) - f(z,t+dt)| <= C min(1, dt^beta (1-|z|)^-s)")
def check_holder_slope(ctx: CheckContext) -> CheckOutcome:
    family = FamilySpec(
        rule=lambda z, t: 0.3 * t[..., 0] * BUMPS["taper"](z),
        box=[(0.0, 0.5)],
        d=0.15,
        label="linear-taper",
    )
    beta, table = holder_modulus(family, 0, [0.0, 0.25, 0.5], n=ctx.n)
    r2 = [f.r_squared for f in table.fits if f.r_squared is not None]
    passed = beta is not None and 0.0 < beta <= 1.0 and bool(r2) and min(r2) >= 0.9
    return CheckOutcome({"beta": beta, "r_squared": r2}, passed)


@register("decay-exponent", "|f_z| <= C(1-|z|)^-alpha with 0 <= alpha < 1")
def check_decay_exponent(ctx: CheckContext) -> CheckOutcome:
    rule = lambda z: 0.3 * cap(z)
    fits = {}
    for n in (ctx.n, 2 * ctx.n):
        grid = disk_lattice(n)
        mapping = normal_solution(BeltramiCoefficient.from_rule(rule, grid, d=0.3), rule=rule)
        fits[n] = decay_exponent_fit(mapping.fz)
    (alpha, r2), (alpha_2n, _) = fits[ctx.n], fits[2 * ctx.n]
    shift = abs(alpha_2n - alpha)
    tol = ctx.tolerances.decay_alpha
    passed = alpha < tol and shift <= DECAY_STABILITY
    return CheckOutcome({"alpha": alpha, "alpha_2n": alpha_2n, "shift": shift, "r_squared": r2}, passed, tol)


@register("log-plane-conjugation", "exp o f_nu o log solves the plane equation for nu(log z) z/conj(z)")
def check_log_plane_conjugation(ctx: CheckContext) -> CheckOutcome:
    rule = log_coefficient(CONJUGATION_C)
    strip_map = principal_log_solution(sample(rule, strip_lattice(ctx.n), "nu"))
    grid = make_grid(GridKind.SQUARE, ctx.n, (-2.0, 2.0))
    plane = principal_solution(sample(lambda z: plane_coefficient(rule, z), grid, "mu"))
    z = grid.nodes
    band = (np.abs(z) >= 0.2) & (np.abs(z) <= 0.8)
    at_zero = complex(interpolate(plane.f.values, grid, np.array([0j]))[0])
    expected = plane.f.values[band] - at_zero
    error = float(np.max(np.abs(log_chart_to_plane(strip_map, z[band]) - expected)))
    tol = CONJUGATION_CELLS * grid.spacing
    return CheckOutcome({"sup_error": error, "plane_f_at_0": abs(at_zero)}, error <= tol, tol)
