"""CLI commands for qclab."""

from qclab.cli.commands.counterexample import counterexample
from qclab.cli.commands.demo_run import demo_run
from qclab.cli.commands.experiment import experiment

__all__ = ["counterexample", "demo_run", "experiment"]
