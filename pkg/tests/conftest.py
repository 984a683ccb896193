"""Pytest fixtures for qclab tests."""

from __future__ import annotations

import pytest

from qclab.cli.console import set_json_output_mode
from qclab.config import reset_settings
from qclab.core.ntcore import QuadExtElem, Rng
from qclab.core.protocol import BlindingOverrides, BlindingSecrets, ProblemInstance, Variant, blind


@pytest.fixture(autouse=True)
def reset_global_settings(monkeypatch: pytest.MonkeyPatch):
    """Reset global settings and console state before each test."""
    monkeypatch.delenv("QCLAB_SEED", raising=False)
    reset_settings()
    set_json_output_mode(False)
    yield
    reset_settings()
    set_json_output_mode(False)


@pytest.fixture
def rng() -> Rng:
    """A fixed-seed random stream."""
    return Rng(20240601)


@pytest.fixture
def toy_instance() -> ProblemInstance:
    """The worked example: x^2 = 9 mod 83."""
    return ProblemInstance(p=83, n=9, known_root=3)


@pytest.fixture
def toy_overrides() -> BlindingOverrides:
    """Forced secrets of the worked example."""
    return BlindingOverrides(q=97, r1=21, r2=73, k=13, a_values=(3345,))


@pytest.fixture
def toy_session(toy_instance, toy_overrides, rng):
    """(secrets, query) of the worked example with the original exponent."""
    return blind(toy_instance, rng, Variant.ORIGINAL, overrides=toy_overrides)


@pytest.fixture
def toy_secrets(toy_session) -> BlindingSecrets:
    return toy_session[0]


@pytest.fixture
def toy_query(toy_session):
    return toy_session[1]


@pytest.fixture
def toy_x() -> QuadExtElem:
    """Reduced final value of the worked example, 31 + 34*sqrt(35) mod 83."""
    return QuadExtElem(31, 34, 35, 83)


@pytest.fixture
def planted_64(rng) -> ProblemInstance:
    """A random planted instance with a 64-bit prime."""
    return ProblemInstance.plant(64, rng)
