"""Data models for parameter-dependent Beltrami families."""

import logging
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.errors import CertificateViolationError, ParameterRangeError
from src.grid.models import ComplexGrid
from src.solver.models import BeltramiCoefficient

logger = logging.getLogger(__name__)

MAX_PARAMETER_DIM = 4
FAMILY_SPOT_CHECKS = 50
GROWTH_SLACK = 1.05

# mu(z, t) with t broadcast to z.shape + (dim,)
FamilyRule = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _wirtinger_partials(f: Callable[[np.ndarray], np.ndarray], z: np.ndarray, k: int, step: np.ndarray) -> np.ndarray:
    """max over order-k Wirtinger partials at z, by nested central differences."""
    if k == 0:
        return np.abs(f(z))

    def d_z(g):
        return lambda x: 0.5 * ((g(x + step) - g(x - step)) / (2 * step) - 1j * (g(x + 1j * step) - g(x - 1j * step)) / (2 * step))

    def d_zbar(g):
        return lambda x: 0.5 * ((g(x + step) - g(x - step)) / (2 * step) + 1j * (g(x + 1j * step) - g(x - 1j * step)) / (2 * step))

    layer = [f]
    for _ in range(k):
        layer = [op(g) for g in layer for op in (d_z, d_zbar)]
    return np.max(np.abs(np.stack([g(z) for g in layer])), axis=0)


class FamilySpec(BaseModel):
    """
    A family mu(z, t) over z in D and t in a box of at most 4 real dimensions.

    Certificates hold uniformly in t: |mu| <= d, order-k z-derivatives bounded
    by b_k (1 - |z|)^(-k), t-derivatives by C (1 - |z|)^(-N) for
    param_growth = (N, C).
    Families produced by mollification carry their smoothing measurements in
    diagnostics.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    rule: FamilyRule
    box: list[tuple[float, float]]
    d: float
    growth: list[tuple[int, float]] = Field(default_factory=list)
    param_growth: Optional[tuple[float, float]] = None
    label: str = "family"
    seed: int = 0
    diagnostics: dict[str, float] = Field(default_factory=dict)

    @field_validator("box")
    @classmethod
    def _box(cls, v: list[tuple[float, float]]) -> list[tuple[float, float]]:
        if not 1 <= len(v) <= MAX_PARAMETER_DIM:
            raise ParameterRangeError("box", v, f"Parameter dimension must be between 1 and {MAX_PARAMETER_DIM}")
        for lo, hi in v:
            if not hi > lo:
                raise ParameterRangeError("box", v, "Every parameter interval needs hi > lo")
        return v

    @model_validator(mode="after")
    def _certify(self) -> "FamilySpec":
        if not 0.0 <= self.d < 1.0:
            raise ParameterRangeError("d", self.d, "Sup bound must satisfy 0 <= d < 1")
        self._spot_check()
        return self

    @property
    def dim(self) -> int:
        return len(self.box)

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.box])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.box])

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def clamp(self, t: np.ndarray) -> np.ndarray:
        return np.clip(t, self.lower, self.upper)

    def evaluate(self, z: np.ndarray, t: np.ndarray) -> np.ndarray:
        """mu at points z with parameters t of shape (dim,) or z.shape + (dim,)."""
        z = np.asarray(z, dtype=complex)
        t = np.broadcast_to(np.asarray(t, dtype=float), z.shape + (self.dim,))
        with np.errstate(all="ignore"):
            out = self.rule(z, t)
        return np.broadcast_to(np.asarray(out, dtype=complex), z.shape)

    def at(self, t: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
        """The single-coefficient rule z -> mu(z, t)."""
        t = np.asarray(t, dtype=float)
        return lambda z: self.evaluate(z, t)

    def coefficient(self, grid: ComplexGrid, t: np.ndarray) -> BeltramiCoefficient:
        return BeltramiCoefficient.from_rule(self.at(t), grid, d=self.d, seed=self.seed)

    def _spot_check(self) -> None:
        rng = np.random.default_rng(self.seed)
        radius = 0.95 * np.sqrt(rng.uniform(size=FAMILY_SPOT_CHECKS))
        z = radius * np.exp(2j * np.pi * rng.uniform(size=FAMILY_SPOT_CHECKS))
        t = self.lower + (self.upper - self.lower) * rng.uniform(size=(FAMILY_SPOT_CHECKS, self.dim))
        dist = 1.0 - np.abs(z)

        measured = float(np.max(np.abs(self.evaluate(z, t))))
        if measured > self.d + 1e-12:
            raise CertificateViolationError("d", measured, self.d)

        step = 1e-4 * dist
        for k, bound in self.growth:
            worst = 0.0
            for j in range(FAMILY_SPOT_CHECKS):
                point = np.array([z[j]])
                partial = _wirtinger_partials(lambda x: self.evaluate(x, t[j]), point, k, step[j])
                worst = max(worst, float(partial[0]) * dist[j] ** k)
            if worst > GROWTH_SLACK * bound:
                raise CertificateViolationError(f"b_{k}", worst, bound)

        if self.param_growth is not None:
            power, constant = self.param_growth
            width = self.upper - self.lower
            worst = 0.0
            for i in range(self.dim):
                e = np.zeros(self.dim)
                e[i] = 1e-6 * width[i]
                hi, lo = self.clamp(t + e), self.clamp(t - e)
                span = hi[:, i] - lo[:, i]
                slope = np.abs(self.evaluate(z, hi) - self.evaluate(z, lo)) / span
                worst = max(worst, float(np.max(slope * dist ** power)))
            if worst > GROWTH_SLACK * constant:
                raise CertificateViolationError("param_growth", worst, constant)
        logger.debug(f"Family '{self.label}': {FAMILY_SPOT_CHECKS} spot checks passed, sup {measured:.4f}")


def cap_weight(s: np.ndarray) -> np.ndarray:
    """exp(-1/(1 - |s|^2)) inside the unit ball, 0 outside."""
    r2 = np.sum(np.asarray(s) ** 2, axis=-1)
    out = np.zeros(r2.shape)
    inside = r2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


class MollifierSchedule(BaseModel):
    """
    Cap-kernel smoothing in the parameter with a z-dependent radius

        delta(z) = min(delta_max, [b/C (1 - |z|)^(s + 2m - 1)]^(1/beta)).

    beta and s default to 0.25 and 2; they are user inputs, not derived bounds.
    """

    model_config = ConfigDict(frozen=True)

    b: float = Field(gt=0)
    beta: float = Field(default=0.25, gt=0, le=1)
    s: float = Field(default=2.0, ge=0)
    constant: float = Field(default=1.0, gt=0)
    delta_max: float = Field(default=0.1, gt=0)
    nodes_per_axis: int = Field(default=9, ge=3)
    t_spacing: float = Field(default=1e-8, gt=0)

    def kernel(self, dim: int) -> tuple[np.ndarray, np.ndarray]:
        """Symmetric cell-centered nodes in the unit ball and unit-mass weights."""
        q = self.nodes_per_axis
        axis = -1.0 + (2.0 * np.arange(q) + 1.0) / q
        mesh = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
        weights = cap_weight(mesh)
        keep = weights > 0
        nodes, weights = mesh[keep], weights[keep]
        return nodes, weights / weights.sum()

    def radius(self, z: np.ndarray, order_m: int = 0) -> np.ndarray:
        dist = np.clip(1.0 - np.abs(np.asarray(z, dtype=complex)), 0.0, None)
        with np.errstate(divide="ignore"):
            rule = (self.b / self.constant * dist ** (self.s + 2 * order_m - 1)) ** (1.0 / self.beta)
        return np.minimum(self.delta_max, rule)
