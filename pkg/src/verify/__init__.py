"""Estimate verification harness: norm estimates, decay fits and the check suite."""

from .checks import REGISTRY, CheckContext, CheckOutcome
from .estimates import decay_exponent_fit, operator_norm_estimate, right_inverse_residual
from .models import CheckStatus, EstimateReport, SuiteReport
from .suite import ALL, resolve_checks, run_suite, write_reports

__all__ = [
    "ALL",
    "REGISTRY",
    "CheckContext",
    "CheckOutcome",
    "CheckStatus",
    "EstimateReport",
    "SuiteReport",
    "decay_exponent_fit",
    "operator_norm_estimate",
    "resolve_checks",
    "right_inverse_residual",
    "run_suite",
    "write_reports",
]
