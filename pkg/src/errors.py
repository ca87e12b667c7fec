"""Exception hierarchy shared by all quasibel modules."""

from typing import Optional, Sequence


class QuasibelError(Exception):
    """Base class for all quasibel errors."""


class GridSpecError(QuasibelError, ValueError):
    """Raised when a grid declaration is inconsistent."""

    def __init__(self, field: str, value: object, reason: str):
        self.field = field
        self.value = value
        self.reason = reason
        super().__init__(f"{reason}: {field}={value!r}")


class NonFiniteFieldError(QuasibelError, ValueError):
    """Raised when a sampled field contains NaN or infinite values."""

    def __init__(self, label: str, count: int, location: complex):
        self.label = label
        self.count = count
        self.location = location
        super().__init__(
            f"Field '{label}' has {count} non-finite value(s), first at z={location:.6g}"
        )


class NonPeriodicFieldError(QuasibelError, ValueError):
    """Raised when a strip field does not wrap around in the angular direction."""

    def __init__(self, defect: float, tolerance: float):
        self.defect = defect
        self.tolerance = tolerance
        super().__init__(
            f"Field is not periodic in phi: wraparound defect {defect:.3e} > {tolerance:.1e}"
        )


class SupportError(QuasibelError, ValueError):
    """Raised when a field is not supported where an operator requires it."""

    def __init__(self, operator: str, leak: float, tolerance: float, reason: str = "support touches the grid boundary"):
        self.operator = operator
        self.leak = leak
        self.tolerance = tolerance
        self.reason = reason
        super().__init__(f"{operator}: {reason} (leak {leak:.3e} > {tolerance:.1e})")


class ReflectionError(QuasibelError, ValueError):
    """Raised when a reflection point cannot be computed."""

    def __init__(self, point: complex, reason: str):
        self.point = point
        self.reason = reason
        super().__init__(f"{reason}: w={point:.6g}")


class ConvergenceError(QuasibelError, RuntimeError):
    """Raised when an iteration fails to converge."""

    def __init__(self, stage: str, iterations: int, ratio: float, increment: Optional[float] = None):
        self.stage = stage
        self.iterations = iterations
        self.ratio = ratio
        self.increment = increment
        detail = f", last increment {increment:.3e}" if increment is not None else ""
        super().__init__(
            f"{stage} did not converge after {iterations} iterations "
            f"(measured contraction ratio {ratio:.4f}{detail})"
        )


class NormalizationError(QuasibelError, RuntimeError):
    """Raised when a normal-solution construction loses its normalization."""

    def __init__(self, value: float, tolerance: float):
        self.value = value
        self.tolerance = tolerance
        super().__init__(f"|f_c(1)| = {value:.6f} deviates from 1 by more than {tolerance}")


class CertificateViolationError(QuasibelError, ValueError):
    """Raised when a declared bound on a coefficient is violated."""

    def __init__(self, name: str, measured: float, bound: float):
        self.name = name
        self.measured = measured
        self.bound = bound
        super().__init__(f"Certificate '{name}' violated: measured {measured:.6g} > bound {bound:.6g}")


class ParameterRangeError(QuasibelError, ValueError):
    """Raised when an input parameter is outside its admissible range."""

    def __init__(self, name: str, value: object, reason: str):
        self.name = name
        self.value = value
        self.reason = reason
        super().__init__(f"{reason}: {name}={value!r}")


class PathInconsistencyError(QuasibelError, RuntimeError):
    """Raised when two integration paths disagree beyond the allowed limit."""

    def __init__(self, discrepancy: float, limit: float):
        self.discrepancy = discrepancy
        self.limit = limit
        super().__init__(f"Path integrals disagree by {discrepancy:.3e} (limit {limit:.3e})")


class DegenerateDerivativeError(QuasibelError, ValueError):
    """Raised when a derivative vanishes where a ratio needs it."""

    def __init__(self, location: complex, value: float):
        self.location = location
        self.value = value
        super().__init__(f"Derivative vanishes at z={location:.6g} (|h'|={value:.3e})")


class InsufficientResolutionError(QuasibelError, ValueError):
    """Raised when a radius rule falls below the available parameter spacing."""

    def __init__(self, location: complex, radius: float, spacing: float):
        self.location = location
        self.radius = radius
        self.spacing = spacing
        super().__init__(
            f"Mollifier radius {radius:.3e} at z={location:.6g} is below the t-spacing {spacing:.3e}"
        )


class InsufficientRingsError(QuasibelError, ValueError):
    """Raised when a decay fit has too few usable rings."""

    def __init__(self, found: int, required: int):
        self.found = found
        self.required = required
        super().__init__(f"Only {found} usable ring(s), at least {required} required")


class UnknownCheckError(QuasibelError, KeyError):
    """Raised when a suite names a check that is not registered."""

    def __init__(self, name: str, known: Sequence[str]):
        self.name = name
        self.known = list(known)
        super().__init__(f"Unknown check '{name}' (known: {', '.join(self.known)})")

    def __str__(self) -> str:
        return self.args[0]


class FieldFormatError(QuasibelError, ValueError):
    """Raised when a QBF-1 file cannot be parsed."""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{reason}: '{path}'")
