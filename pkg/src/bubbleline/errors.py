"""Exception hierarchy for the bubbleline package.

Every failure mode that callers are expected to distinguish gets its own
class.  The CLI maps these onto process exit codes, so the split mirrors
the observable contract: usage mistakes, invalid models, inconclusive
numerics, and internal diagnostics.
"""

from __future__ import annotations


class BubblelineError(Exception):
    """Base class for all package-specific errors."""


class UsageError(BubblelineError, ValueError):
    """Caller passed arguments that violate a documented precondition."""


class ExprError(BubblelineError, ValueError):
    """Problem with a density formula; carries a byte offset into the source."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class LexicalError(ExprError):
    """Character sequence that is not a valid token."""


class ParseError(ExprError):
    """Token stream that does not match the formula grammar."""


class UnknownIdentifierError(ExprError):
    """Identifier that is neither a known function nor the free variable."""


class EvalDomainError(BubblelineError, ValueError):
    """Formula evaluation left the domain of a primitive (log, sqrt, division)."""

    def __init__(self, message: str, subexpression: str) -> None:
        super().__init__(f"{message} in '{subexpression}'")
        self.subexpression = subexpression


class NonSmoothPointError(BubblelineError, ValueError):
    """One-sided derivatives disagree where a C1 density was required."""

    def __init__(self, point: float, left: float, right: float) -> None:
        super().__init__(
            f"one-sided slopes disagree at {point!r}: {left!r} vs {right!r}"
        )
        self.point = point
        self.left = left
        self.right = right


class DensityFileError(BubblelineError, ValueError):
    """Malformed density description file."""


class ModelInvalidError(BubblelineError, ValueError):
    """Density failed validation; carries the full check report."""

    def __init__(self, report: object) -> None:
        failures = getattr(report, "failures", [])
        names = ", ".join(check.name for check in failures) or "unknown"
        super().__init__(f"density validation failed: {names}")
        self.report = report


class CoordinateError(BubblelineError, ValueError):
    """Operation requires the other coordinate convention."""


class IndeterminateFormError(BubblelineError, ArithmeticError):
    """Extended-real arithmetic hit an indeterminate form such as inf - inf."""


class QuadratureError(BubblelineError, ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance."""

    def __init__(self, message: str, achieved: float) -> None:
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


class UnboundedInverseError(BubblelineError, ArithmeticError):
    """Inverting the position/volume transform ran past the position cap."""


class BracketError(BubblelineError, ArithmeticError):
    """Root bracketing failed: no sign change over the allowed range."""


class InconclusiveLimitsError(BubblelineError, ArithmeticError):
    """A downstream quantity needs a limit whose estimate did not settle."""


class UndefinedQuantityError(BubblelineError, ArithmeticError):
    """Requested quantity is undefined for this asymptotic regime."""


class NoTieError(BubblelineError, ValueError):
    """No tie volume exists for the requested region volume."""


class DiagnosticsError(BubblelineError, ArithmeticError):
    """Internal sanity cap was hit; carries whatever partial state exists."""

    def __init__(self, message: str, best_so_far: object = None) -> None:
        super().__init__(message)
        self.best_so_far = best_so_far
