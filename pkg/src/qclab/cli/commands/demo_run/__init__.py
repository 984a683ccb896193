"""Demo command: one honest session on a freshly planted instance."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Annotated

import typer

from qclab.cli.console import (
    configure_logging,
    print_error,
    print_success,
    set_json_output_mode,
    status_context,
)
from qclab.cli.errors import EXIT_FAILURE, EXIT_OK, handle_command_error
from qclab.cli.formatters import print_demo_result
from qclab.cli.output import format_demo_json, print_json
from qclab.config import get_settings
from qclab.core.harness import demo_run as run_demo
from qclab.core.protocol import DEFAULT_K1_MAX, OutcomeKind, Variant

logger = logging.getLogger(__name__)


def demo_run(
    variant: Annotated[
        Variant,
        typer.Option(
            "--variant",
            help="Exponent variant: 'corrected' should yield a root, 'original' and 'koffset' should not",
            case_sensitive=False,
        ),
    ] = Variant.CORRECTED,
    p_bits: Annotated[
        int,
        typer.Option(
            "--p-bits",
            help="Bit length of the secret prime p",
        ),
    ] = 64,
    seed: Annotated[
        int | None,
        typer.Option(
            "--seed",
            help="64-bit seed (falls back to QCLAB_SEED, then 0)",
        ),
    ] = None,
    k_bits: Annotated[
        int | None,
        typer.Option(
            "--k-bits",
            help="Bit length of the blinding exponent k (default 80, clamped to p_bits - 2)",
        ),
    ] = None,
    k1_max: Annotated[
        int,
        typer.Option(
            "--k1-max",
            help="Largest k1 offset for the koffset variant",
        ),
    ] = DEFAULT_K1_MAX,
    config_file: Annotated[
        Path | None,
        typer.Option(
            "--config",
            help="Path to configuration file (YAML)",
        ),
    ] = None,
    verbose: Annotated[
        bool,
        typer.Option(
            "--verbose",
            help="Show detailed output",
        ),
    ] = False,
    json_output: Annotated[
        bool,
        typer.Option(
            "--json",
            help="Output the transcript as JSON",
        ),
    ] = False,
) -> None:
    """Run one blinded square-root session against an honest server.

    Exits 0 when the outcome is the one the variant predicts: a verified
    root for 'corrected', anything else for 'original' and 'koffset'.

    Examples:

        qclab demo-run --variant corrected --p-bits 64 --seed 7

        qclab demo-run --variant original --p-bits 128 --json
    """
    if json_output:
        set_json_output_mode(True)
    configure_logging(verbose)

    try:
        settings = get_settings(config_file=config_file)
        resolved_seed = seed if seed is not None else (settings.seed or 0)
        with status_context(f"Running a {variant.value} session on a {p_bits}-bit prime..."):
            result = run_demo(variant, p_bits, resolved_seed, k_bits=k_bits, k1_max=k1_max)
    except Exception as e:
        handle_command_error(e, "Session failed", verbose, json_output)

    if json_output:
        print_json(format_demo_json(result))
    else:
        print_demo_result(result)

    outcome = result.transcript.outcome
    if result.expected:
        if outcome.kind == OutcomeKind.ROOT:
            print_success(f"Recovered x = {outcome.x} with x^2 = n mod p")
        else:
            print_success(f"Client did not obtain a root ({outcome.kind.value}), as the variant predicts")
        raise typer.Exit(EXIT_OK)

    print_error(f"Unexpected outcome for the {variant.value} variant: {outcome.kind.value}")
    raise typer.Exit(EXIT_FAILURE)
