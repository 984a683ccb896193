"""Typer CLI entrypoint for qclab."""

from __future__ import annotations

import typer

from qclab import __version__
from qclab.cli.commands import counterexample, demo_run, experiment
from qclab.cli.console import console

app = typer.Typer(
    name="qclab",
    help="Reproduce and attack blinded outsourcing of modular square roots.",
    add_completion=False,
    no_args_is_help=True,
)

# Register commands
app.command()(counterexample)
app.command(name="demo-run")(demo_run)
app.command()(experiment)


def version_callback(value: bool) -> None:
    """Print version and exit."""
    if value:
        console.print(f"qclab version {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: bool = typer.Option(
        False,
        "--version",
        "-v",
        callback=version_callback,
        is_eager=True,
        help="Show version and exit.",
    ),
) -> None:
    """qclab: counterexamples and key-recovery attacks on outsourced square roots."""
    pass


if __name__ == "__main__":
    app()
