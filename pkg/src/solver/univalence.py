"""
Univalence margins and injectivity sampling.

The margin of a holomorphic h on D is sup |h''/h'| (1 - |z|); for a mapping
F on a quasidisk it is sup |F_ww/F_w| dist(w, boundary). A margin below 1
satisfies the univalence criterion on the sampled nodes.
"""

import logging
from typing import Callable, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.errors import DegenerateDerivativeError, ParameterRangeError
from src.grid.derivatives import holomorphic_derivatives, pullback_wirtinger
from src.grid.geometry import DiskGeometry, DomainGeometry, QuasidiskGeometry
from src.grid.lattice import disk_lattice

from .models import QcMapping

logger = logging.getLogger(__name__)

DEGENERATE_DERIVATIVE = 1e-14
HOLOMORPHIC_LATTICE_N = 128

Holomorphic = Callable[[np.ndarray], np.ndarray]


def _check_nonvanishing(derivative: np.ndarray, nodes: np.ndarray) -> None:
    small = np.abs(derivative) <= DEGENERATE_DERIVATIVE
    if small.any():
        idx = int(np.argmax(small))
        raise DegenerateDerivativeError(complex(nodes[idx]), float(np.abs(derivative[idx])))


def _holomorphic_ratio(h: Holomorphic, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    grid = disk_lattice(n)
    nodes = grid.nodes[np.abs(grid.nodes) <= 1.0 - 2.0 * grid.spacing]
    first, second = holomorphic_derivatives(h, nodes, order=2)
    _check_nonvanishing(first, nodes)
    return nodes, np.abs(second / first), 1.0 - np.abs(nodes)


def _mapping_ratio(
    mapping: QcMapping, geometry: DomainGeometry
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    grid = mapping.grid
    z = grid.nodes
    inside = np.abs(z) < 1.0
    interior = np.abs(z) <= 1.0 - 4.0 * grid.spacing
    param = geometry.parameterization if isinstance(geometry, QuasidiskGeometry) else None
    _check_nonvanishing(mapping.fz.values[interior], z[interior])
    f_ww, _ = pullback_wirtinger(mapping.fz, param, inside)
    _, distance, _ = geometry.measure(grid)
    ratio = np.abs(f_ww.values[interior] / mapping.fz.values[interior])
    return z[interior], ratio, np.asarray(distance)[interior]


def _ratios(
    target: Union[QcMapping, Holomorphic],
    geometry: Optional[DomainGeometry],
    n: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    geometry = geometry or DiskGeometry()
    if isinstance(target, QcMapping):
        return _mapping_ratio(target, geometry)
    if not isinstance(geometry, DiskGeometry):
        raise ParameterRangeError("geometry", geometry, "Holomorphic callables are measured on the disk")
    return _holomorphic_ratio(target, n)


def univalence_margin(
    target: Union[QcMapping, Holomorphic],
    geometry: Optional[DomainGeometry] = None,
    n: int = HOLOMORPHIC_LATTICE_N,
) -> float:
    """
    sup |h''/h'| (1 - |z|) for a holomorphic callable, or
    sup |F_ww/F_w| dist(w, boundary) for a sampled mapping.

    Args:
        target: Vectorized holomorphic function on D, or a QcMapping whose
            fz holds F_w on the pullback lattice of the geometry
        geometry: Disk (default) or a quasidisk
        n: Lattice size used for callables

    Raises:
        DegenerateDerivativeError: If the first derivative vanishes at a node
    """
    nodes, ratio, distance = _ratios(target, geometry, n)
    if nodes.size == 0:
        return 0.0
    scaled = ratio * distance
    worst = int(np.argmax(scaled))
    margin = float(scaled[worst])
    logger.debug(f"Univalence margin {margin:.4f} attained at z={complex(nodes[worst]):.4g}")
    return margin


def univalence_profile(
    target: Union[QcMapping, Holomorphic],
    geometry: Optional[DomainGeometry] = None,
    rings: int = 16,
    n: int = HOLOMORPHIC_LATTICE_N,
) -> tuple[np.ndarray, np.ndarray]:
    """Ring-wise maxima of the scaled ratio against |z|; empty rings report 0."""
    nodes, ratio, distance = _ratios(target, geometry, n)
    edges = np.linspace(0.0, 1.0, rings + 1)
    which = np.clip(np.digitize(np.abs(nodes), edges) - 1, 0, rings - 1)
    profile = np.zeros(rings)
    np.maximum.at(profile, which, ratio * distance)
    return 0.5 * (edges[:-1] + edges[1:]), profile


class InjectivitySample(BaseModel):
    """Outcome of random pair sampling of a mapping."""

    model_config = ConfigDict(frozen=True)

    pairs: int
    violations: int
    closest_image: float

    @property
    def holds(self) -> bool:
        return self.violations == 0


def injectivity_sample(
    mapping: QcMapping,
    pairs: int = 10_000,
    seed: int = 0,
    source_separation: Optional[float] = None,
    image_separation: float = 1e-9,
) -> InjectivitySample:
    """
    Sample random node pairs inside D and count collisions.

    A pair counts when its source points are farther apart than
    source_separation (default 10h) while the images are closer than
    image_separation.
    """
    grid = mapping.grid
    source_separation = 10.0 * grid.spacing if source_separation is None else source_separation
    candidates = np.flatnonzero(np.abs(grid.nodes) < 1.0)
    if candidates.size < 2:
        return InjectivitySample(pairs=0, violations=0, closest_image=float("inf"))
    rng = np.random.default_rng(seed)
    a = rng.choice(candidates, size=pairs)
    b = rng.choice(candidates, size=pairs)
    far = np.abs(grid.nodes[a] - grid.nodes[b]) > source_separation
    gaps = np.abs(mapping.f.values[a] - mapping.f.values[b])[far]
    closest = float(np.min(gaps)) if gaps.size else float("inf")
    violations = int(np.count_nonzero(gaps < image_separation))
    if violations:
        logger.warning(f"Injectivity sampling found {violations} colliding pair(s) of {int(far.sum())}")
    return InjectivitySample(pairs=int(far.sum()), violations=violations, closest_image=closest)
