"""Exception hierarchy for the orthogonality-equation toolkit."""

from typing import Any


class OrthoEqError(Exception):
    """Base class for every error raised by orthoeq."""


class DimensionError(OrthoEqError, ValueError):
    """Shapes or dimensions do not agree, or cannot be inferred."""


class SingularPairingError(OrthoEqError, ValueError):
    """A Gram matrix is numerically singular."""


class ContainmentError(OrthoEqError, ValueError):
    """A subspace expected to lie inside another does not."""


class EmptyInstanceError(OrthoEqError, ValueError):
    """An instance has no samples to evaluate."""


class NotLinearError(OrthoEqError):
    """Sampled data is not explained by any linear operator."""

    def __init__(self, residual: float, threshold: float):
        self.residual = residual
        self.threshold = threshold
        super().__init__(
            f"Best linear fit leaves residual {residual:.6g} above threshold {threshold:.6g}"
        )


class CoverageError(OrthoEqError):
    """A section table has no sample at a required input."""

    def __init__(self, table: str, key: Any, distance: float):
        self.table = table
        self.key = key
        self.distance = distance
        super().__init__(
            f"No {table} sample within lookup tolerance of {key!r} (nearest at {distance:.3g})"
        )


class IllConditionedError(OrthoEqError):
    """An operator that must be invertible is not, numerically."""

    def __init__(self, condition: float, limit: float):
        self.condition = condition
        self.limit = limit
        super().__init__(f"Condition number {condition:.6g} exceeds limit {limit:.3g}")


class NotHilbertError(OrthoEqError, ValueError):
    """A pairing is not symmetric positive definite."""


class ExtractionError(OrthoEqError):
    """A stage of the decomposition pipeline failed."""

    STAGES = (
        "precondition",
        "span",
        "fit-Q0",
        "annihilator",
        "fit-Q1",
        "invertibility",
        "identity-check",
        "sections",
        "hilbert-sections",
    )

    def __init__(self, stage: str, message: str):
        if stage not in self.STAGES:
            raise ValueError(f"Unknown extraction stage: {stage}")
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


class ConfigurationError(OrthoEqError):
    """Environment configuration is malformed."""


class FileFormatError(OrthoEqError, ValueError):
    """An instance or decomposition file cannot be read."""

    def __init__(self, path: str, location: str, message: str):
        self.path = path
        self.location = location
        super().__init__(f"{path}: {location}: {message}")
