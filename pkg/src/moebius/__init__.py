"""Moebius and affine normalizers, parameterizations and boundary reflection."""

from .maps import (
    AffineParameterization,
    IdentityParameterization,
    SampledParameterization,
    affine_forward,
    affine_inverse,
    apply_moebius,
    automorphism_gap_bound,
    automorphism_identity_gap,
    newton_inverse,
)
from .models import AffineEllipseMap, DiskAutomorphism, ReflectionMode, ReflectionRule
from .reflection import SandwichMeasurement, measure_sandwich, reflect, reflect_parameter

__all__ = [
    "DiskAutomorphism",
    "AffineEllipseMap",
    "ReflectionMode",
    "ReflectionRule",
    "apply_moebius",
    "affine_forward",
    "affine_inverse",
    "automorphism_identity_gap",
    "automorphism_gap_bound",
    "newton_inverse",
    "IdentityParameterization",
    "AffineParameterization",
    "SampledParameterization",
    "reflect",
    "reflect_parameter",
    "SandwichMeasurement",
    "measure_sandwich",
]
