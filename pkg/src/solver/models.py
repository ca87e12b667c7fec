"""Data models for Beltrami coefficients and solved mappings."""

from enum import Enum
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.errors import CertificateViolationError, ParameterRangeError
from src.grid.derivatives import wirtinger
from src.grid.lattice import sample
from src.grid.models import ComplexGrid, SampledField
from src.grid.norms import lp_norm

GROWTH_SPOT_CHECKS = 100
GROWTH_SLACK = 1.05


class MappingKind(str, Enum):
    """How a mapping was constructed."""
    PRINCIPAL = "principal"
    NORMAL = "normal"
    LOG_PRINCIPAL = "log-principal"
    RECONSTRUCTED = "reconstructed"


class SolveDiagnostics(BaseModel):
    """Convergence record of a solve."""

    iterations: int = 0
    residual: float = 0.0
    contraction_ratio: float = 0.0
    increments: list[float] = Field(default_factory=list)
    extra: dict[str, float] = Field(default_factory=dict)


def _order_k_partials(field: SampledField, k: int, mask: np.ndarray) -> np.ndarray:
    """max over all order-k Wirtinger partials, per node."""
    layer = [field]
    for _ in range(k):
        nxt = []
        for f in layer:
            fz, fzb = wirtinger(f, mask)
            nxt.extend([fz, fzb])
        layer = nxt
    return np.max(np.abs(np.stack([f.values for f in layer])), axis=0)


class BeltramiCoefficient(BaseModel):
    """
    A sampled Beltrami coefficient with its certificates.

    growth holds pairs (k, b_k) certifying |mu_(k)| <= b_k (1 - |z|)^(-k) for
    every order-k derivative; param_growth holds (N, C) of the parameter
    derivative bound C (1 - |z|)^(-N).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    field: SampledField
    d: float
    growth: list[tuple[int, float]] = Field(default_factory=list)
    param_growth: Optional[tuple[float, float]] = None
    rule: Optional[Callable] = None
    seed: int = 0

    @model_validator(mode="after")
    def _certify(self) -> "BeltramiCoefficient":
        if not 0.0 <= self.d < 1.0:
            raise ParameterRangeError("d", self.d, "Sup bound must satisfy 0 <= d < 1")
        measured = float(np.max(np.abs(self.field.values))) if self.field.values.size else 0.0
        if measured > self.d + 1e-12:
            raise CertificateViolationError("d", measured, self.d)
        if self.growth:
            self._spot_check_growth()
        return self

    def _spot_check_growth(self) -> None:
        grid = self.field.grid
        h = grid.spacing
        dist = 1.0 - np.abs(grid.nodes)
        interior = dist > 4.0 * h
        candidates = np.flatnonzero(interior)
        if candidates.size == 0:
            return
        rng = np.random.default_rng(self.seed)
        picks = rng.choice(candidates, size=min(GROWTH_SPOT_CHECKS, candidates.size), replace=False)
        mask = dist > 0
        for k, bound in self.growth:
            partials = _order_k_partials(self.field, k, mask)
            scaled = partials[picks] * dist[picks] ** k
            worst = float(np.max(scaled))
            if worst > GROWTH_SLACK * bound:
                raise CertificateViolationError(f"b_{k}", worst, bound)

    @classmethod
    def from_rule(
        cls,
        rule: Callable[[np.ndarray], np.ndarray],
        grid: ComplexGrid,
        d: Optional[float] = None,
        **certificates,
    ) -> "BeltramiCoefficient":
        """Sample a rule; d defaults to the measured sup."""
        field = sample(rule, grid, "mu")
        if d is None:
            d = float(np.max(np.abs(field.values)))
        return cls(field=field, d=d, rule=rule, **certificates)

    @property
    def grid(self) -> ComplexGrid:
        return self.field.grid

    def growth_bound(self, k: int) -> Optional[float]:
        for order, bound in self.growth:
            if order == k:
                return bound
        return None


class QcMapping(BaseModel):
    """A solved mapping with first derivatives and diagnostics."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    f: SampledField
    fz: SampledField
    fzbar: SampledField
    kind: MappingKind
    diagnostics: SolveDiagnostics = Field(default_factory=SolveDiagnostics)

    @property
    def grid(self) -> ComplexGrid:
        return self.f.grid

    def jacobian(self) -> np.ndarray:
        return np.abs(self.fz.values) ** 2 - np.abs(self.fzbar.values) ** 2

    def beltrami_residual(self, mu: SampledField, mask: Optional[np.ndarray] = None) -> float:
        """
        ||f_zbar - mu f_z||_2 / ||f_z||_2 on the mask.

        Both derivatives are finite differences of the sampled f, not the
        stored fz and fzbar. They are taken of f - z, which stays periodic on
        strip grids.
        """
        grid = self.grid
        deviation = SampledField(grid, self.f.values - grid.nodes, "deviation")
        dev_z, dev_zbar = wirtinger(deviation)
        fz = dev_z + 1.0
        diff = dev_zbar - mu * fz
        denom = lp_norm(fz, 2.0, mask)
        return lp_norm(diff, 2.0, mask) / denom if denom else 0.0

    def derivative_bounds(self, radius: float = 0.9) -> tuple[float, float]:
        """(min, max) of |f_z| over nodes with |z| <= radius."""
        inside = np.abs(self.grid.nodes) <= radius
        mod = np.abs(self.fz.values[inside])
        return float(np.min(mod)), float(np.max(mod))


class DerivativeChain(BaseModel):
    """Levels f_1..f_k of the logarithmic-derivative chain."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: int = Field(ge=1)
    levels: list[SampledField]
    residuals: list[float]
    m: int
    diagnostics: SolveDiagnostics = Field(default_factory=SolveDiagnostics)

    @model_validator(mode="after")
    def _sizes(self) -> "DerivativeChain":
        if len(self.levels) != self.k or len(self.residuals) != self.k:
            raise ValueError(f"Chain of order {self.k} needs {self.k} levels and residuals")
        return self

    def level(self, j: int) -> SampledField:
        """f_j for 1 <= j <= k."""
        return self.levels[j - 1]
