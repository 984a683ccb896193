"""JSON and machine-readable output formatting."""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any

from qclab.core.harness import ReportFormat

if TYPE_CHECKING:
    from qclab.core.harness import CounterexampleReplay, DemoResult, ExperimentSummary


@dataclass
class JSONOutputMeta:
    """Metadata for JSON output.

    Carries no clock values so identical runs print identical bytes.
    """

    tool: str = "qclab"
    version: str = ""


@dataclass
class JSONCounterexampleOutput:
    """JSON output structure for the counterexample replay."""

    status: str  # "match", "diverged"
    exit_code: int
    meta: JSONOutputMeta
    variant: str
    checkpoints: list[dict[str, Any]]
    transcript: dict[str, Any]
    first_divergence: str | None = None


@dataclass
class JSONDemoOutput:
    """JSON output structure for a demo session."""

    status: str  # "expected", "unexpected"
    exit_code: int
    meta: JSONOutputMeta
    variant: str
    p_bits: int
    seed: str
    instance: dict[str, str]
    transcript: dict[str, Any]


@dataclass
class JSONErrorOutput:
    """JSON output structure for errors."""

    status: str = "error"
    exit_code: int = 2
    meta: JSONOutputMeta = field(default_factory=JSONOutputMeta)
    error: dict[str, Any] = field(default_factory=dict)


def get_version() -> str:
    """Get qclab version."""
    try:
        from qclab import __version__

        return __version__
    except ImportError:
        return "unknown"


def format_counterexample_json(replay: CounterexampleReplay) -> dict[str, Any]:
    """Format a counterexample replay as a JSON-serializable dictionary."""
    bad = replay.first_divergence
    output = JSONCounterexampleOutput(
        status="match" if replay.ok else "diverged",
        exit_code=0 if replay.ok else 1,
        meta=JSONOutputMeta(version=get_version()),
        variant=replay.variant.value,
        checkpoints=[c.to_dict() for c in replay.checkpoints],
        transcript=replay.transcript.to_dict(),
        first_divergence=bad.name if bad else None,
    )
    return asdict(output)


def format_demo_json(result: DemoResult) -> dict[str, Any]:
    """Format a demo session as a JSON-serializable dictionary."""
    data = result.to_dict()
    output = JSONDemoOutput(
        status="expected" if result.expected else "unexpected",
        exit_code=0 if result.expected else 1,
        meta=JSONOutputMeta(version=get_version()),
        variant=data["variant"],
        p_bits=data["p_bits"],
        seed=data["seed"],
        instance=data["instance"],
        transcript=data["transcript"],
    )
    return asdict(output)


def format_error_json(
    error_type: str,
    message: str,
    details: str | None = None,
    recovery_suggestion: str | None = None,
    exit_code: int = 2,
) -> dict[str, Any]:
    """Format an error as JSON.

    Args:
        error_type: Type of error (e.g., "ParameterError")
        message: Error message
        details: Optional detailed error information
        recovery_suggestion: Optional suggestion for fixing the error
        exit_code: Exit code to use

    Returns:
        Dictionary suitable for JSON serialization
    """
    output = JSONErrorOutput(
        exit_code=exit_code,
        meta=JSONOutputMeta(version=get_version()),
        error={
            "type": error_type,
            "message": message,
            "details": details,
            "recovery_suggestion": recovery_suggestion,
        },
    )
    return asdict(output)


def render_experiment(summary: ExperimentSummary, fmt: ReportFormat, include_timing: bool = False) -> str:
    """Serialize an experiment as JSON-lines or CSV."""
    if fmt == ReportFormat.CSV:
        return summary.to_csv(include_timing=include_timing)
    return summary.to_jsonl(include_timing=include_timing)


def write_experiment(
    summary: ExperimentSummary,
    fmt: ReportFormat,
    out: Path | None = None,
    include_timing: bool = False,
) -> None:
    """Write experiment output to ``out``, or to stdout when no path is given."""
    text = render_experiment(summary, fmt, include_timing)
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")


def print_json(data: dict[str, Any], file: Any = None) -> None:
    """Print JSON output to stdout or specified file.

    Args:
        data: Dictionary to serialize as JSON
        file: Optional file handle (defaults to stdout)
    """
    output = json.dumps(data, indent=2, sort_keys=True, default=str)
    print(output, file=file or sys.stdout)
