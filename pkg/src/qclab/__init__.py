__version__ = "0.1.0"

from qclab.core.attacks import AttackKind, AttackReport, CoppersmithParams
from qclab.core.errors import (
    CheckpointMismatchError,
    DomainMismatchError,
    NonTerminationError,
    NotAResidueError,
    ParameterError,
    ProtocolFailureError,
    QclabError,
    RankDeficiencyError,
)
from qclab.core.harness import ExperimentConfig, ExperimentSummary, run_experiment
from qclab.core.ntcore import Rng
from qclab.core.protocol import ProblemInstance, Transcript, Variant

__all__ = [
    "AttackKind",
    "AttackReport",
    "CheckpointMismatchError",
    "CoppersmithParams",
    "DomainMismatchError",
    "ExperimentConfig",
    "ExperimentSummary",
    "NonTerminationError",
    "NotAResidueError",
    "ParameterError",
    "ProblemInstance",
    "ProtocolFailureError",
    "QclabError",
    "RankDeficiencyError",
    "Rng",
    "Transcript",
    "Variant",
    "run_experiment",
    "__version__",
]
