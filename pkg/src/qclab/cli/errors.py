"""Error handling utilities with recovery suggestions for CLI."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NoReturn

import typer
from pydantic import ValidationError

from qclab.core.errors import ParameterError, QclabError

# Exit codes shared by every command
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


@dataclass
class ErrorInfo:
    """Information about an error with recovery suggestion."""

    error_type: str
    message: str
    details: str | None = None
    recovery_suggestion: str | None = None


# Mapping of error types to recovery suggestions
ERROR_RECOVERY_SUGGESTIONS: dict[str, str] = {
    "ParameterError": (
        "A size or numeric parameter is out of range. Primes need at least 8 bits, "
        "k_bits must not exceed p_bits - 2, and delta must lie strictly between 1/4 and 1."
    ),
    "ValidationError": (
        "The experiment configuration is invalid. Check the flag values and your qclab.yaml; "
        "the cf attack only works with `--variant koffset`."
    ),
    "DomainMismatchError": "Both operands must come from the same ring Z_m[sqrt(w)].",
    "NotAResidueError": (
        "The value has no square root modulo this modulus. If it came from an attack, "
        "the recovered factor is not the secret prime."
    ),
    "NonTerminationError": "Cipolla's method needs a prime modulus. Check that the modulus is prime.",
    "RankDeficiencyError": (
        "The lattice basis is linearly dependent. Try a different shift depth with `--m` and `--t`."
    ),
    "ProtocolFailureError": (
        "No round was accepted within the round cap. Try another `--seed`; with a prime p this is "
        "vanishingly unlikely."
    ),
    "CheckpointMismatchError": (
        "The replay diverged from the reference values. Run with `--verbose` to see every intermediate."
    ),
    "FileNotFoundError": (
        "The specified file does not exist. Verify the file path is correct "
        "and the file is accessible from the current directory."
    ),
    "PermissionError": (
        "Permission denied when accessing the file. Check file permissions for `--out` and `--config`."
    ),
    "ValueError": (
        "Invalid input value. Check that all provided arguments are in the correct format. "
        "Use `--help` to see expected argument formats."
    ),
}


def get_recovery_suggestion(error_type: str) -> str | None:
    """Get a recovery suggestion for an error type.

    Args:
        error_type: The error class name (e.g., "ParameterError")

    Returns:
        Recovery suggestion string or None if not found
    """
    return ERROR_RECOVERY_SUGGESTIONS.get(error_type)


def exit_code_for(exception: Exception) -> int:
    """Usage and configuration problems exit with 2, everything else with 1."""
    if isinstance(exception, (ValidationError, ParameterError, FileNotFoundError)):
        return EXIT_USAGE
    if isinstance(exception, QclabError):
        return EXIT_FAILURE
    if isinstance(exception, ValueError):
        return EXIT_USAGE
    return EXIT_FAILURE


def get_error_info(
    exception: Exception,
    default_message: str | None = None,
) -> ErrorInfo:
    """Extract error information from an exception with recovery suggestion.

    Args:
        exception: The exception to extract info from
        default_message: Optional default message if exception has none

    Returns:
        ErrorInfo with type, message, details, and recovery suggestion
    """
    error_type = type(exception).__name__
    message = str(exception) or default_message or "An error occurred"

    details = None
    if isinstance(exception, QclabError):
        message = exception.message
        details = exception.details
    elif isinstance(exception, ValidationError):
        message = "; ".join(
            f"{'.'.join(str(p) for p in e['loc']) or 'config'}: {e['msg']}" for e in exception.errors()
        )
    elif exception.__cause__:
        details = str(exception.__cause__)

    return ErrorInfo(
        error_type=error_type,
        message=message,
        details=details,
        recovery_suggestion=get_recovery_suggestion(error_type),
    )


def format_error_with_suggestion(
    error_info: ErrorInfo,
    show_details: bool = False,
) -> str:
    """Format error information with recovery suggestion for display.

    Args:
        error_info: ErrorInfo instance
        show_details: Whether to include technical details

    Returns:
        Formatted error string for Rich console
    """
    parts = [f"[error]{error_info.message}[/error]"]

    if show_details and error_info.details:
        parts.append(f"[dim]{error_info.details}[/dim]")

    if error_info.recovery_suggestion:
        parts.append(f"\n[info]Hint: {error_info.recovery_suggestion}[/info]")

    return "\n".join(parts)


def handle_command_error(e: Exception, prefix: str, verbose: bool, json_output: bool) -> NoReturn:
    """Report an error in the active output format and exit with its code."""
    from qclab.cli.console import console, print_error
    from qclab.cli.output import format_error_json, print_json

    error_info = get_error_info(e)
    code = exit_code_for(e)

    if json_output:
        print_json(
            format_error_json(
                error_type=error_info.error_type,
                message=f"{prefix}: {error_info.message}",
                details=error_info.details,
                recovery_suggestion=error_info.recovery_suggestion,
                exit_code=code,
            )
        )
    else:
        print_error(f"{prefix}: {error_info.message}")
        if error_info.details:
            console.print(f"[dim]{error_info.details}[/dim]")
        if error_info.recovery_suggestion:
            console.print(f"\n[info]Hint: {error_info.recovery_suggestion}[/info]")
        if verbose and code == EXIT_FAILURE:
            console.print_exception()

    raise typer.Exit(code) from None
