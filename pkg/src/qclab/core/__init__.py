"""Number theory, lattice reduction, the blinded protocol, its attacks and the experiment engine."""

from qclab.core.attacks import cf_attack, coppersmith_attack, gcd_pair, gcd_single, recover_n_and_root
from qclab.core.harness import replay_counterexample, run_trial
from qclab.core.protocol import blind, honest_run

__all__ = [
    "blind",
    "cf_attack",
    "coppersmith_attack",
    "gcd_pair",
    "gcd_single",
    "honest_run",
    "recover_n_and_root",
    "replay_counterexample",
    "run_trial",
]
