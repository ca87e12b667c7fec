"""Solvers for Beltrami equations: principal, normal, logarithmic and chain constructions."""

from .chain import chain_coefficients, derivative_chain_solve, integrate_form, reconstruct_map
from .logarithmic import log_chart_to_plane, plane_coefficient, principal_log_solution
from .models import BeltramiCoefficient, DerivativeChain, MappingKind, QcMapping, SolveDiagnostics
from .neumann import neumann_series, solve_inhomogeneous
from .normal import normal_solution, resample
from .principal import principal_solution
from .univalence import InjectivitySample, injectivity_sample, univalence_margin, univalence_profile

__all__ = [
    "BeltramiCoefficient",
    "DerivativeChain",
    "InjectivitySample",
    "MappingKind",
    "QcMapping",
    "SolveDiagnostics",
    "chain_coefficients",
    "derivative_chain_solve",
    "injectivity_sample",
    "integrate_form",
    "log_chart_to_plane",
    "neumann_series",
    "normal_solution",
    "plane_coefficient",
    "principal_log_solution",
    "principal_solution",
    "reconstruct_map",
    "resample",
    "solve_inhomogeneous",
    "univalence_margin",
    "univalence_profile",
]
