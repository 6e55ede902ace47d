"""Exception types shared across the package."""

from __future__ import annotations


class PTSelectError(Exception):
    """Base class for all package-specific errors."""


class DenominatorUnderflow(PTSelectError):
    """Kernel-weight denominator fell below the underflow guard.

    Signals that the evaluation point sits outside the effective support of
    the training abscissae at the current bandwidth.
    """


class DegenerateSample(PTSelectError):
    """Sample has no spread; a data-driven bandwidth cannot be formed."""


class DegenerateDesign(PTSelectError):
    """Covariate matrix is collinear to working precision."""


class OptimFailed(PTSelectError):
    """No optimizer restart produced a finite objective value."""


class TooFewEvents(PTSelectError):
    """Not enough uncensored observations to identify the index model."""


class EmptyStratum(PTSelectError):
    """No training subject carries the requested best-arm label."""


class LengthMismatch(PTSelectError):
    """Two rank vectors that must be conformable are not."""


class TooLarge(PTSelectError):
    """Problem size exceeds the exact-enumeration budget."""


class SchemaMismatch(PTSelectError):
    """Dataset file header does not match its declared manifest."""


class BadValue(PTSelectError):
    """A dataset cell failed validation."""

    def __init__(self, line: int, column: str, message: str):
        super().__init__(f"line {line}, column {column!r}: {message}")
        self.line = line
        self.column = column


class EngineFitError(PTSelectError):
    """One or more per-(response, arm) fits failed during engine construction."""

    def __init__(self, failures: list[tuple[str, int, str]]):
        lines = "; ".join(f"response {r!r} arm {k}: {msg}" for r, k, msg in failures)
        super().__init__(f"engine fit failed: {lines}")
        self.failures = failures
