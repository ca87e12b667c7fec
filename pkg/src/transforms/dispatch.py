"""Dispatch an OperatorSpec to its transform."""

import logging
import time

import numpy as np

from src.grid.models import SampledField

from .disk import beurling_m, cauchy_m
from .domain import domain_beurling_m, domain_cauchy_m
from .models import OperatorFamily, OperatorSpec
from .plane import beurling, cauchy
from .strip import strip_beurling, strip_cauchy

logger = logging.getLogger(__name__)


def apply_operator(spec: OperatorSpec, field: SampledField) -> SampledField:
    """Apply the transform described by `spec` to `field`."""
    start = time.perf_counter()
    fam = spec.family
    if fam == OperatorFamily.ZERO:
        result = field.with_values(np.zeros_like(field.values), "zero")
    elif fam == OperatorFamily.CAUCHY:
        result = cauchy(field, spec.backend)
    elif fam == OperatorFamily.BEURLING:
        result = beurling(field, spec.backend)
    elif fam == OperatorFamily.CAUCHY_M:
        result = cauchy_m(field, spec.m, spec.backend)
    elif fam == OperatorFamily.BEURLING_M:
        result = beurling_m(field, spec.m, spec.backend)
    elif fam == OperatorFamily.STRIP_CAUCHY:
        result = strip_cauchy(field)
    elif fam == OperatorFamily.STRIP_BEURLING:
        result = strip_beurling(field)
    elif fam == OperatorFamily.DOMAIN_CAUCHY_M:
        result = domain_cauchy_m(field, spec.reflection, spec.m, spec.backend)
    elif fam == OperatorFamily.DOMAIN_BEURLING_M:
        result = domain_beurling_m(field, spec.reflection, spec.m, spec.backend)
    else:
        raise ValueError(f"Unknown operator family: {fam}")
    logger.debug(
        f"{fam.value} m={spec.m} backend={spec.backend.value} n={field.grid.n} "
        f"in {time.perf_counter() - start:.3f}s"
    )
    return result
