"""Exception hierarchy for qclab.

Every failure raised by the number-theory, lattice and protocol layers
derives from :class:`QclabError` so the CLI can map it to an exit code
and a recovery hint. Attacks never raise on failure; they return an
unsuccessful report instead.
"""

from __future__ import annotations

from typing import Any


class QclabError(Exception):
    """Base exception for qclab errors.

    Provides a consistent interface for all failures with descriptive
    error messages.
    """

    def __init__(self, message: str, operation: str | None = None, details: str | None = None) -> None:
        """Initialize the error.

        Args:
            message: Human-readable error message
            operation: The operation that failed (e.g., "MOD_POW", "LLL")
            details: Additional technical details about the error
        """
        self.message = message
        self.operation = operation
        self.details = details
        super().__init__(self._format_message())

    def _format_message(self) -> str:
        """Format the full error message."""
        parts = [self.message]
        if self.operation:
            parts.insert(0, f"[{self.operation}]")
        if self.details:
            parts.append(f"Details: {self.details}")
        return " ".join(parts)


class ParameterError(QclabError, ValueError):
    """Raised when an argument is outside the range an operation accepts.

    Common causes:
    - Zero modulus
    - Prime size below 8 bits
    - Zero denominator for a continued fraction
    - Zero polynomial handed to the root finder
    """

    def __init__(self, message: str, operation: str | None = None, details: str | None = None) -> None:
        super().__init__(message, operation=operation, details=details)


class DomainMismatchError(QclabError):
    """Raised when two quadratic-extension elements live in different rings."""

    def __init__(self, left: tuple[int, int], right: tuple[int, int]) -> None:
        """Initialize the mismatch error.

        Args:
            left: (w, m) of the left operand
            right: (w, m) of the right operand
        """
        self.left = left
        self.right = right
        super().__init__(
            f"Cannot combine elements of Z_{left[1]}[sqrt({left[0]})] and Z_{right[1]}[sqrt({right[0]})]",
            operation="QUAD_ARITH",
        )


class NotAResidueError(QclabError):
    """Raised when a square root is requested for a quadratic nonresidue."""

    def __init__(self, n: int, p: int, details: str | None = None) -> None:
        self.n = n
        self.p = p
        super().__init__(f"{n} is not a quadratic residue modulo {p}", operation="SQRT", details=details)


class NonTerminationError(QclabError):
    """Raised when Cipolla's nonresidue search gives up.

    This only happens when the modulus is not actually prime.
    """

    def __init__(self, p: int, attempts: int) -> None:
        self.p = p
        self.attempts = attempts
        super().__init__(
            f"No quadratic nonresidue found modulo {p} after {attempts} samples",
            operation="SQRT",
            details="The modulus is probably composite",
        )


class RankDeficiencyError(QclabError):
    """Raised when lattice reduction meets linearly dependent rows."""

    def __init__(self, row: int, details: str | None = None) -> None:
        self.row = row
        super().__init__(
            f"Basis row {row} is linearly dependent on the previous rows", operation="LLL", details=details
        )


class ProtocolFailureError(QclabError):
    """Raised when an honest protocol session exceeds its round cap."""

    def __init__(self, rounds: int, details: str | None = None) -> None:
        self.rounds = rounds
        super().__init__(f"No accepted round after {rounds} attempts", operation="PROTOCOL", details=details)


class CheckpointMismatchError(QclabError):
    """Raised when a replayed session diverges from its reference values."""

    def __init__(self, checkpoint: str, expected: Any, actual: Any) -> None:
        """Initialize the checkpoint error.

        Args:
            checkpoint: Name of the first diverging checkpoint
            expected: Reference value
            actual: Value produced by the replay
        """
        self.checkpoint = checkpoint
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"Checkpoint '{checkpoint}' diverged",
            operation="REPLAY",
            details=f"expected {expected}, got {actual}",
        )
