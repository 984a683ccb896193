"""Rich formatters for replays, sessions and experiment summaries."""

from __future__ import annotations

from typing import TYPE_CHECKING

from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from qclab.cli.console import console, error_console
from qclab.core.protocol import OutcomeKind, Verdict

if TYPE_CHECKING:
    from qclab.core.harness import CounterexampleReplay, DemoResult, ExperimentSummary
    from qclab.core.protocol import Outcome, Transcript

# Rounds shown before the rest are elided
MAX_ROUNDS_SHOWN = 10


def _outcome_text(outcome: Outcome | None) -> Text:
    if outcome is None:
        return Text("none", style="muted")
    if outcome.kind == OutcomeKind.ROOT:
        return Text(f"ROOT x = {outcome.x}", style="success")
    if outcome.kind == OutcomeKind.NON_INTEGER:
        return Text(f"NON_INTEGER {outcome.u} + {outcome.v}*sqrt({outcome.w})", style="error")
    return Text("CHECK_FAILED", style="error")


def format_checkpoints(replay: CounterexampleReplay) -> Table:
    """Table of every replay checkpoint with its status."""
    table = Table(title=f"Counterexample x^2 = 9 mod 83 ({replay.variant.value})", show_lines=False)
    table.add_column("Checkpoint", style="key")
    table.add_column("Expected", overflow="fold")
    table.add_column("Actual", overflow="fold")
    table.add_column("Status", justify="center")

    for c in replay.checkpoints:
        status = Text("OK", style="success") if c.ok else Text("DIVERGED", style="error")
        table.add_row(c.name, c.expected, c.actual, status)
    return table


def format_transcript(transcript: Transcript, title: str = "Session Transcript") -> Panel:
    """Panel with the blinded query, the rounds and the outcome."""
    table = Table(show_header=False, box=None, padding=(0, 2))
    table.add_column("Label", style="bold")
    table.add_column("Value", overflow="fold")

    query = transcript.query
    table.add_row("n'", str(query.n_b))
    table.add_row("d'", str(query.d_b))
    table.add_row("d2'", str(query.d2_b))
    table.add_row("p'", str(query.p_b))
    table.add_row("", "")

    for i, r in enumerate(transcript.rounds[:MAX_ROUNDS_SHOWN], start=1):
        style = "accepted" if r.verdict == Verdict.Y else "rejected"
        table.add_row(f"Round {i}", Text(f"a = {r.a}, R1' = {r.r1_b} -> {r.verdict.value}", style=style))
    if len(transcript.rounds) > MAX_ROUNDS_SHOWN:
        table.add_row("", Text(f"... and {len(transcript.rounds) - MAX_ROUNDS_SHOWN} more", style="muted"))

    if transcript.r2_b is not None:
        r2 = transcript.r2_b
        table.add_row("R2'", f"{r2.u} + {r2.v}*sqrt({r2.w})")
    table.add_row("Outcome", _outcome_text(transcript.outcome))

    border_style = "green" if transcript.outcome is not None and transcript.outcome.is_root else "red"
    return Panel(table, title=title, border_style=border_style)


def format_demo_result(result: DemoResult) -> Panel:
    """Demo session panel, titled with whether the outcome matched the variant's expectation."""
    verdict = "as expected" if result.expected else "UNEXPECTED"
    title = f"{result.variant.value} session, {result.p_bits}-bit p, seed {result.seed}: {verdict}"
    return format_transcript(result.transcript, title=title)


def format_experiment_summary(summary: ExperimentSummary, include_timing: bool = False) -> Panel:
    """Summary panel for an experiment."""
    table = Table(show_header=False, box=None, padding=(0, 2))
    table.add_column("Label", style="bold")
    table.add_column("Value", justify="right")

    config = summary.config
    table.add_row("Attack", str(config.get("attack", "-")))
    table.add_row("Variant", str(config.get("variant", "-")))
    table.add_row("p bits / k bits", f"{config.get('p_bits', '-')} / {config.get('k_bits', '-')}")
    table.add_row("Seed", str(config.get("seed", "-")))
    table.add_row("", "")
    table.add_row("Trials", f"{summary.trials:,}")
    table.add_row("Successes", f"{summary.successes:,}")
    rate_style = "success" if summary.successes == summary.trials else "warning"
    table.add_row("Rate", Text(f"{summary.rate:.2%}", style=rate_style))

    errors = sum(1 for r in summary.records if r.error)
    if errors:
        table.add_row("Errors", Text(f"{errors:,}", style="error"))

    if include_timing and summary.records:
        table.add_row("", "")
        table.add_row("Mean", f"{summary.mean_micros / 1000:,.1f} ms")
        table.add_row("p50", f"{summary.p50_micros / 1000:,.1f} ms")
        table.add_row("p90", f"{summary.p90_micros / 1000:,.1f} ms")

    return Panel(table, title="Experiment Summary", border_style="cyan")


def print_checkpoints(replay: CounterexampleReplay) -> None:
    console.print(format_checkpoints(replay))


def print_transcript(transcript: Transcript) -> None:
    console.print(format_transcript(transcript))


def print_demo_result(result: DemoResult) -> None:
    console.print(format_demo_result(result))


def print_experiment_summary(summary: ExperimentSummary, include_timing: bool = False, err: bool = False) -> None:
    """Print the summary panel; ``err`` sends it to stderr when stdout carries the data."""
    (error_console if err else console).print(format_experiment_summary(summary, include_timing))
