"""Command-line interface for qclab."""

from qclab.cli.main import app

__all__ = ["app"]
