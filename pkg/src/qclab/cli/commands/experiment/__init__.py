"""Experiment command: success rates of an attack over planted instances."""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Any

import typer

from qclab.cli.console import configure_logging, print_info, print_success, print_warning, progress_context
from qclab.cli.errors import EXIT_OK, handle_command_error
from qclab.cli.formatters import print_experiment_summary
from qclab.cli.output import write_experiment
from qclab.config import get_settings
from qclab.core.harness import ExperimentConfig, ExperimentKind, ReportFormat, run_experiment
from qclab.core.protocol import Variant


def _build_config(settings_defaults: Any, seed: int, overrides: dict[str, Any]) -> ExperimentConfig:
    """Merge CLI overrides onto the configured defaults and validate."""
    data: dict[str, Any] = {
        "attack": settings_defaults.attack,
        "variant": settings_defaults.variant,
        "p_bits": settings_defaults.p_bits,
        "k_bits": settings_defaults.k_bits,
        "k1_max": settings_defaults.k1_max,
        "trials": settings_defaults.trials,
        "beta": settings_defaults.beta,
        "m": settings_defaults.m,
        "t": settings_defaults.t,
        "c": settings_defaults.c,
        "delta": settings_defaults.delta,
        "sweep": settings_defaults.sweep,
        "workers": settings_defaults.workers,
        "seed": seed,
    }
    data.update({key: value for key, value in overrides.items() if value is not None})
    return ExperimentConfig(**data)


def experiment(
    attack: Annotated[
        ExperimentKind | None,
        typer.Option("--attack", "-a", help="Attack to run per trial, or 'honest' for protocol correctness"),
    ] = None,
    variant: Annotated[
        Variant | None,
        typer.Option("--variant", help="Exponent variant of the blinded queries", case_sensitive=False),
    ] = None,
    p_bits: Annotated[int | None, typer.Option("--p-bits", help="Bit length of p (and q)")] = None,
    q_bits: Annotated[int | None, typer.Option("--q-bits", help="Bit length of q (honest runs only)")] = None,
    k_bits: Annotated[int | None, typer.Option("--k-bits", help="Bit length of the blinding exponent k")] = None,
    k1_max: Annotated[int | None, typer.Option("--k1-max", help="Largest k1 offset")] = None,
    trials: Annotated[int | None, typer.Option("--trials", "-n", help="Number of planted instances")] = None,
    seed: Annotated[int | None, typer.Option("--seed", help="64-bit seed (falls back to QCLAB_SEED)")] = None,
    beta: Annotated[str | None, typer.Option("--beta", help="Coppersmith beta, e.g. '127/256'")] = None,
    m: Annotated[int | None, typer.Option("--m", help="Coppersmith shift depth")] = None,
    t: Annotated[int | None, typer.Option("--t", help="Extra x-shifts of f^m")] = None,
    c: Annotated[int | None, typer.Option("--c", help="Root bound multiplier")] = None,
    delta: Annotated[str | None, typer.Option("--delta", help="LLL parameter, e.g. '3/4'")] = None,
    sweep: Annotated[
        bool | None,
        typer.Option("--sweep/--no-sweep", help="Strip small cofactors in the two-query gcd attack"),
    ] = None,
    max_tries: Annotated[int | None, typer.Option("--max-tries", help="Bases tried by the gcd attack")] = None,
    workers: Annotated[int | None, typer.Option("--workers", "-w", help="Worker processes")] = None,
    fmt: Annotated[
        ReportFormat | None,
        typer.Option("--format", "-f", help="Output format: JSON-lines or CSV"),
    ] = None,
    out: Annotated[
        Path | None,
        typer.Option("--out", "-o", help="Write results here instead of stdout"),
    ] = None,
    timing: Annotated[
        bool,
        typer.Option("--timing", help="Include per-trial wall time (output is then no longer reproducible)"),
    ] = False,
    config_file: Annotated[Path | None, typer.Option("--config", help="Path to configuration file (YAML)")] = None,
    verbose: Annotated[bool, typer.Option("--verbose", help="Show detailed output")] = False,
) -> None:
    """Run an attack over many planted instances and report the success rate.

    Each trial plants a random instance, blinds it, runs the attack on
    the public values only, and checks the recovered p and root against
    the planted ones. Trial i draws its randomness from (seed, i), so the
    output is identical for any number of workers.

    Examples:

        qclab experiment --attack gcd --p-bits 512 --trials 100 --seed 1

        qclab experiment --attack gcd2 --trials 200 --format csv --out gcd2.csv

        qclab experiment --attack coppersmith --p-bits 1024 --k-bits 256 --workers 4

        qclab experiment --attack honest --variant original --p-bits 64
    """
    configure_logging(verbose)
    to_stdout = out is None

    try:
        settings = get_settings(config_file=config_file)
        resolved_seed = seed if seed is not None else settings.seed
        if resolved_seed is None:
            resolved_seed = 0
            print_warning("No --seed or QCLAB_SEED given; using seed 0")
        config = _build_config(
            settings.defaults,
            resolved_seed,
            {
                "attack": attack,
                "variant": variant,
                "p_bits": p_bits,
                "q_bits": q_bits,
                "k_bits": k_bits,
                "k1_max": k1_max,
                "trials": trials,
                "beta": beta,
                "m": m,
                "t": t,
                "c": c,
                "delta": delta,
                "sweep": sweep,
                "max_tries": max_tries,
                "workers": workers,
            },
        )
        report_format = fmt or settings.defaults.format
    except Exception as e:
        handle_command_error(e, "Invalid experiment configuration", verbose, json_output=False)

    if not to_stdout:
        print_info(
            f"Running {config.trials} {config.attack.value} trials "
            f"({config.variant.value}, {config.p_bits}-bit p, seed {config.seed})"
        )

    try:
        with progress_context(f"{config.attack.value} trials", total=config.trials) as (progress, task):
            summary = run_experiment(config, on_trial=lambda _record: progress.advance(task))
        write_experiment(summary, report_format, out, include_timing=timing)
    except Exception as e:
        handle_command_error(e, "Experiment failed", verbose, json_output=False)

    print_experiment_summary(summary, include_timing=timing, err=to_stdout)
    if not to_stdout:
        print_success(f"Wrote {summary.trials} trial records to {out}")
    raise typer.Exit(EXIT_OK)
