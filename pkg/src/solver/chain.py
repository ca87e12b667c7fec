"""
Logarithmic-derivative chain on a quasidisk and reconstruction of the map.

For F with F_wbar = mu F_w, the functions f_1 = F_ww/F_w and f_j = (f_{j-1})_w
satisfy

    (f_k)_wbar = mu (f_k)_w + P_k,
    P_k = sum_{i=1..k} n_{k,i} mu_{w^i} f_{k+1-i} + mu_{w^(k+1)},

with n_{k,i} = [i = 1] + n_{k-1,i-1} + n_{k-1,i}. Each level is found by
iterating f <- P_m (Id - mu T_m)^(-1) P_k(f). The map itself is recovered by
F(w) = int e^g dw + mu e^g dwbar with g(w) = int f_1 dw + (mu_w + mu f_1) dwbar.
"""

import logging
from typing import Optional, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from src.config import get_settings
from src.errors import ConvergenceError, ParameterRangeError, PathInconsistencyError
from src.grid.derivatives import pullback_wirtinger
from src.grid.models import SampledField
from src.grid.norms import lp_norm
from src.moebius.models import ReflectionRule
from src.transforms.domain import domain_beurling_m, domain_cauchy_m, parameterization_for
from src.transforms.models import Backend

from .models import BeltramiCoefficient, DerivativeChain, MappingKind, QcMapping, SolveDiagnostics
from .neumann import as_field, neumann_series

logger = logging.getLogger(__name__)

MIN_ORDER_MARGIN = 7


def chain_coefficients(k: int) -> dict[int, dict[int, int]]:
    """n_{j,i} for 1 <= i <= j <= k."""
    table: dict[int, dict[int, int]] = {1: {1: 1}}
    for j in range(2, k + 1):
        prev = table[j - 1]
        table[j] = {i: int(i == 1) + prev.get(i - 1, 0) + prev.get(i, 0) for i in range(1, j + 1)}
    return table


class ChainContext:
    """Operators, masks and coefficient derivatives shared by the chain levels."""

    def __init__(
        self,
        mu: SampledField,
        reflection: ReflectionRule,
        k: int,
        m: int,
        backend: Union[Backend, str, None] = None,
    ):
        self.mu = mu
        self.reflection = reflection
        self.m = m
        self.backend = backend
        self.grid = mu.grid
        self.param = parameterization_for(reflection)
        nodes = self.grid.nodes
        self.inside = np.abs(nodes) < 1.0
        self.interior = np.abs(nodes) <= 1.0 - 4.0 * self.grid.spacing
        _, distance, _ = reflection.geometry.measure(self.grid)
        self.distance = np.where(self.inside, np.maximum(np.asarray(distance, dtype=float), 0.0), 0.0)
        self.coefficients = chain_coefficients(k)
        # mu_{w^j} for j = 0..k+1
        self.mu_w = [mu]
        for _ in range(k + 1):
            d_w, _ = self.w_derivatives(self.mu_w[-1])
            self.mu_w.append(d_w)

    def w_derivatives(self, field: SampledField) -> tuple[SampledField, SampledField]:
        f_w, f_wb = pullback_wirtinger(field, self.param, self.inside)
        return self._restrict(f_w), self._restrict(f_wb)

    def _restrict(self, field: SampledField) -> SampledField:
        return field.with_values(np.where(self.inside, field.values, 0.0))

    def P(self, x: SampledField) -> SampledField:
        return domain_cauchy_m(x, self.reflection, self.m, self.backend)

    def T(self, x: SampledField) -> SampledField:
        return domain_beurling_m(x, self.reflection, self.m, self.backend)

    def Q(self, rhs: SampledField) -> SampledField:
        """P_m (Id - mu T_m)^(-1) rhs."""
        rhs = self._restrict(rhs)
        y, _ = neumann_series(lambda x: self.mu * self.T(x), rhs, "chain inner series")
        return self.P(y)

    def forcing(self, level: int, levels: dict[int, SampledField]) -> SampledField:
        """P_level built from the current f_1..f_level."""
        total = self.mu_w[level + 1]
        for i, coeff in self.coefficients[level].items():
            total = total + coeff * self.mu_w[i] * levels[level + 1 - i]
        return self._restrict(total)

    def smallness(self, order: int) -> float:
        """max_j sup |mu_{w^j}| dist^j over the interior, j = 0..order."""
        worst = 0.0
        for j in range(order + 1):
            scaled = np.abs(self.mu_w[j].values) * self.distance ** j
            worst = max(worst, float(np.max(scaled[self.interior])) if self.interior.any() else 0.0)
        return worst

    def decay_constant(self, j: int, field: SampledField) -> float:
        """sup |f_j| dist^j over the interior."""
        scaled = np.abs(field.values) * self.distance ** j
        return float(np.max(scaled[self.interior])) if self.interior.any() else 0.0

    def residual(self, level: int, levels: dict[int, SampledField]) -> float:
        """Interior sup of |(f)_wbar - mu (f)_w - P_level| dist^(level+1)."""
        f = levels[level]
        f_w, f_wb = self.w_derivatives(f)
        r = f_wb - self.mu * f_w - self.forcing(level, levels)
        scaled = np.abs(r.values) * self.distance ** (level + 1)
        return float(np.max(scaled[self.interior])) if self.interior.any() else 0.0


def _fixed_point(
    ctx: ChainContext,
    level: int,
    levels: dict[int, SampledField],
    tol: float,
    max_iter: int,
) -> tuple[SampledField, int, float]:
    """Iterate f_level <- Q(P_level) with the lower levels held fixed."""
    current = levels.get(level)
    if current is None:
        current = SampledField(ctx.grid, np.zeros(ctx.grid.node_count), f"f_{level}")
        levels[level] = current
    ratio = 0.0
    previous_inc: Optional[float] = None
    for iteration in range(1, max_iter + 1):
        updated = ctx.Q(ctx.forcing(level, levels))
        updated = updated.with_values(updated.values, f"f_{level}")
        inc = lp_norm(updated - current, 2.0)
        scale = lp_norm(updated, 2.0)
        if previous_inc:
            ratio = inc / previous_inc
        previous_inc = inc
        current = updated
        levels[level] = current
        logger.debug(f"chain level {level}: iteration {iteration}, increment {inc:.3e}, ratio {ratio:.4f}")
        if inc <= tol * max(scale, 1e-300) or scale == 0.0:
            return current, iteration, ratio
        if iteration > 3 and ratio >= 1.0:
            raise ConvergenceError(f"chain level {level}", iteration, ratio, inc)
    raise ConvergenceError(f"chain level {level}", max_iter, ratio, previous_inc)


def derivative_chain_solve(
    mu: Union[BeltramiCoefficient, SampledField],
    reflection: Optional[ReflectionRule] = None,
    k: int = 1,
    m: int = 8,
    backend: Union[Backend, str, None] = None,
    b_max: Optional[float] = None,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> DerivativeChain:
    """
    Solve for the chain f_1..f_k.

    Args:
        mu: Coefficient on the pullback lattice of the domain
        reflection: Reflection rule of the domain (default the unit disk)
        k: Chain order
        m: Counter-term order, at least k + 7
        backend: Transform backend
        b_max: Smallness threshold for mu and its w-derivatives

    Raises:
        ParameterRangeError: If m or the measured smallness constant is out of range
        ConvergenceError: If a level iteration does not converge
    """
    cfg = get_settings().solver
    b_max = cfg.b_max if b_max is None else b_max
    tol = cfg.chain_tol if tol is None else tol
    max_iter = cfg.chain_outer_iter if max_iter is None else max_iter
    if k < 1:
        raise ParameterRangeError("k", k, "Chain order must be at least 1")
    if m < k + MIN_ORDER_MARGIN:
        raise ParameterRangeError("m", m, f"Counter-term order must be at least k + {MIN_ORDER_MARGIN}")

    reflection = reflection or ReflectionRule.disk()
    mu_f = as_field(mu)
    ctx = ChainContext(mu_f, reflection, k, m, backend)
    b = ctx.smallness(k + 1)
    if b > b_max:
        raise ParameterRangeError("b", b, f"Coefficient is not small enough for the chain (b_max={b_max})")

    levels: dict[int, SampledField] = {}
    iterations = 0
    ratio = 0.0
    for level in range(1, k + 1):
        _, its, r = _fixed_point(ctx, level, levels, tol, max_iter)
        iterations += its
        ratio = max(ratio, r)

    if k >= 2:
        for sweep in range(1, max_iter + 1):
            top_before = levels[k]
            _rebuild_lower_levels(ctx, levels, k)
            _, its, r = _fixed_point(ctx, k, levels, tol, max_iter)
            iterations += its
            change = lp_norm(levels[k] - top_before, 2.0)
            scale = lp_norm(levels[k], 2.0)
            logger.debug(f"chain sweep {sweep}: top-level change {change:.3e}")
            if change <= tol * max(scale, 1e-300) or scale == 0.0:
                break

    residuals = [ctx.residual(j, levels) for j in range(1, k + 1)]
    extra = {"b": b}
    extra.update({f"decay_{j}": ctx.decay_constant(j, levels[j]) for j in range(1, k + 1)})
    diagnostics = SolveDiagnostics(
        iterations=iterations,
        residual=max(residuals),
        contraction_ratio=ratio,
        extra=extra,
    )
    logger.info(f"Derivative chain k={k}, m={m}: residuals {', '.join(f'{r:.2e}' for r in residuals)}")
    return DerivativeChain(
        k=k, levels=[levels[j] for j in range(1, k + 1)], residuals=residuals, m=m, diagnostics=diagnostics
    )


def _center_indices(n: int) -> tuple[slice, slice]:
    c = n // 2
    return slice(c - 1, c + 1), slice(c - 1, c + 1)


def integrate_form(
    p_form: SampledField,
    q_form: SampledField,
    parameterization=None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Staircase integrals of p dw + q dwbar from the central node.

    Path A runs along x first and then along y; path B swaps the order.
    Returns both as flat arrays in node order.
    """
    grid = p_form.grid
    p, q = p_form.values, q_form.values
    if parameterization is not None:
        gz, gzb = parameterization.derivatives(grid.nodes)
        p, q = p * gz + q * np.conj(gzb), p * gzb + q * np.conj(gz)
    along_x = (p + q).reshape(grid.shape)
    along_y = (1j * (p - q)).reshape(grid.shape)
    cx = cumulative_trapezoid(along_x, dx=grid.spacing, axis=1, initial=0)
    cy = cumulative_trapezoid(along_y, dx=grid.spacing_y, axis=0, initial=0)
    c = grid.n // 2
    path_a = (cx[c, :] - cx[c, c])[None, :] + (cy - cy[c, :][None, :])
    path_b = (cy[:, c] - cy[c, c])[:, None] + (cx - cx[:, c][:, None])
    return path_a.ravel(), path_b.ravel()


def _anchor(values: np.ndarray, n: int) -> complex:
    rows, cols = _center_indices(n)
    return complex(np.mean(values.reshape(n, n)[rows, cols]))


def _rebuild_lower_levels(ctx: ChainContext, levels: dict[int, SampledField], k: int) -> None:
    """f_j = anchor + int f_{j+1} dw + (mu f_{j+1} + P_j) dwbar, for j = k-1..1."""
    n = ctx.grid.n
    for j in range(k - 1, 0, -1):
        upper = levels[j + 1]
        wbar_part = ctx.mu * upper + ctx.forcing(j, levels)
        path, _ = integrate_form(upper, wbar_part, ctx.param)
        anchor = _anchor(levels[j].values, n) - _anchor(path, n)
        values = np.where(ctx.inside, path + anchor, 0.0)
        levels[j] = levels[j].with_values(values, f"f_{j}")


def reconstruct_map(
    chain: DerivativeChain,
    mu: Union[BeltramiCoefficient, SampledField],
    reflection: Optional[ReflectionRule] = None,
    tolerance: Optional[float] = None,
) -> QcMapping:
    """
    Rebuild F from the first chain level by two path integrals.

    F is normalized so that its value at the center of the lattice is 0.
    f_z and f_zbar of the result hold F_w = e^g and F_wbar = mu e^g.

    Raises:
        PathInconsistencyError: If the two staircase paths disagree by more
            than ten times the tolerance
    """
    tolerance = get_settings().solver.residual_tol if tolerance is None else tolerance
    reflection = reflection or ReflectionRule.disk()
    mu_f = as_field(mu)
    ctx = ChainContext(mu_f, reflection, 0, chain.m)
    grid = mu_f.grid
    n = grid.n
    f1 = chain.level(1)

    g_a, g_b = integrate_form(f1, ctx.mu_w[1] + mu_f * f1, ctx.param)
    g_shift = _anchor(g_a, n)
    g_a, g_b = g_a - g_shift, g_b - g_shift
    exp_g = np.where(ctx.inside, np.exp(g_a), 0.0)
    exp_field = SampledField(grid, exp_g, "F_w")
    big_a, big_b = integrate_form(exp_field, mu_f * exp_field, ctx.param)
    f_shift = _anchor(big_a, n)
    big_a, big_b = big_a - f_shift, big_b - f_shift

    interior = ctx.interior
    discrepancy = 0.0
    if interior.any():
        discrepancy = max(
            float(np.max(np.abs(g_a - g_b)[interior])),
            float(np.max(np.abs(big_a - big_b)[interior])),
        )
    limit = 10.0 * tolerance
    if discrepancy > limit:
        raise PathInconsistencyError(discrepancy, limit)

    f = SampledField(grid, np.where(ctx.inside, big_a, 0.0), "F")
    mapping = QcMapping(
        f=f,
        fz=exp_field,
        fzbar=SampledField(grid, (mu_f * exp_field).values, "F_wbar"),
        kind=MappingKind.RECONSTRUCTED,
    )
    fd_w, fd_wb = ctx.w_derivatives(f)
    denom = lp_norm(fd_w, 2.0, interior)
    residual = lp_norm(fd_wb - mu_f * fd_w, 2.0, interior) / denom if denom else 0.0
    diagnostics = SolveDiagnostics(
        residual=residual,
        extra={"path_discrepancy": discrepancy},
    )
    logger.info(f"Reconstructed map: path discrepancy {discrepancy:.3e}, dilatation residual {residual:.3e}")
    return mapping.model_copy(update={"diagnostics": diagnostics})
