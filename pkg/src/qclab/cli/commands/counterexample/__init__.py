"""Counterexample command: replay the worked session x^2 = 9 mod 83."""

from __future__ import annotations

import logging
from typing import Annotated

import typer

from qclab.cli.console import configure_logging, print_error, print_success, set_json_output_mode
from qclab.cli.errors import EXIT_FAILURE, EXIT_OK, handle_command_error
from qclab.cli.formatters import print_checkpoints, print_transcript
from qclab.cli.output import format_counterexample_json, print_json
from qclab.core.harness import replay_counterexample
from qclab.core.protocol import Variant

logger = logging.getLogger(__name__)


def counterexample(
    variant: Annotated[
        Variant,
        typer.Option(
            "--variant",
            help="Exponent variant to replay: 'original' (reference values) or 'corrected'",
            case_sensitive=False,
        ),
    ] = Variant.ORIGINAL,
    verbose: Annotated[
        bool,
        typer.Option(
            "--verbose",
            help="Log every intermediate value",
        ),
    ] = False,
    json_output: Annotated[
        bool,
        typer.Option(
            "--json",
            help="Output the checkpoints and transcript as JSON",
        ),
    ] = False,
) -> None:
    """Replay the outsourced computation of x^2 = 9 mod 83 with fixed secrets.

    The original exponent ends outside the base field at 31 + 34*sqrt(35),
    so the client never learns a root. Every intermediate value is checked
    against its reference; the command exits 0 only if all of them match.

    Examples:

        qclab counterexample

        qclab counterexample --variant corrected --json
    """
    if json_output:
        set_json_output_mode(True)
    configure_logging(verbose)

    try:
        replay = replay_counterexample(variant)
    except Exception as e:
        handle_command_error(e, "Replay failed", verbose, json_output)

    if json_output:
        print_json(format_counterexample_json(replay))
    else:
        print_checkpoints(replay)
        print_transcript(replay.transcript)

    if replay.ok:
        print_success(f"All {len(replay.checkpoints)} checkpoints match")
        raise typer.Exit(EXIT_OK)

    bad = replay.first_divergence
    print_error(f"First divergence at '{bad.name}': expected {bad.expected}, got {bad.actual}")
    raise typer.Exit(EXIT_FAILURE)
