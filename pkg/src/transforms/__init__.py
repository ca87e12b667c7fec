"""Singular integral operators on the plane, the disk, the strip and quasidisks."""

from .disk import beurling_m, cauchy_m, check_disk_support, counter_term
from .dispatch import apply_operator
from .domain import domain_beurling_m, domain_cauchy_m
from .models import Backend, OperatorFamily, OperatorSpec
from .plane import beurling, cauchy, check_support, spectral_beurling
from .strip import strip_beurling, strip_cauchy

__all__ = [
    "Backend",
    "OperatorFamily",
    "OperatorSpec",
    "apply_operator",
    "cauchy",
    "beurling",
    "spectral_beurling",
    "check_support",
    "cauchy_m",
    "beurling_m",
    "counter_term",
    "check_disk_support",
    "strip_cauchy",
    "strip_beurling",
    "domain_cauchy_m",
    "domain_beurling_m",
]
