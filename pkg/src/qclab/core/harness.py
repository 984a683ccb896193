"""Experiment engine: counterexample replay, demo sessions and attack trials.

Every trial is a pure function of ``(config, trial index)``: its random
stream is derived from the experiment seed and the index, so results do
not depend on how trials are scheduled across workers.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from qclab.core.attacks import (
    DEFAULT_MAX_TRIES,
    AttackReport,
    CoppersmithParams,
    cf_attack,
    coppersmith_attack,
    gcd_pair,
    gcd_single,
    recover_n_and_root,
)
from qclab.core.diophantine import DEFAULT_DELTA
from qclab.core.errors import CheckpointMismatchError, NotAResidueError, ParameterError, QclabError
from qclab.core.ntcore import QuadExtElem, Rng, plant_qr
from qclab.core.protocol import (
    DEFAULT_K1_MAX,
    DEFAULT_K_BITS,
    BlindedQuery,
    BlindingOverrides,
    Outcome,
    OutcomeKind,
    ProblemInstance,
    Transcript,
    Variant,
    Verdict,
    blind,
    honest_run,
)

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("trial", "p_bits", "k_bits", "success", "micros")


class ExperimentKind(str, Enum):
    """What a trial runs: one of the attacks, or an honest session."""

    GCD = "gcd"
    GCD2 = "gcd2"
    CF = "cf"
    COPPERSMITH = "coppersmith"
    HONEST = "honest"


class ReportFormat(str, Enum):
    """Machine-readable experiment output."""

    JSON = "json"  # JSON-lines, one object per trial plus a summary
    CSV = "csv"


def default_k_bits(p_bits: int) -> int:
    """Size of the blinding exponent ``k`` when none is given."""
    return min(DEFAULT_K_BITS, p_bits - 2)


def _parse_rational(value: Any) -> Any:
    if value is None or isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"Not a rational number: {value!r}") from e
    if isinstance(value, float):
        return Fraction(value).limit_denominator(1 << 32)
    return value


class ExperimentConfig(BaseModel):
    """Validated description of one experiment.

    ``variant`` defaults to K_OFFSET for the cf attack, CORRECTED for
    honest sessions and ORIGINAL otherwise. ``k_bits`` defaults to 80,
    clamped to ``p_bits - 2`` for small moduli.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    attack: ExperimentKind = ExperimentKind.GCD
    variant: Variant | None = None
    p_bits: int = Field(default=512, ge=8)
    q_bits: int | None = Field(default=None, ge=8)
    k_bits: int | None = Field(default=None, ge=0)
    k1_max: int = Field(default=DEFAULT_K1_MAX, ge=0)
    trials: int = Field(default=100, ge=1)
    seed: int = Field(default=0, ge=0, le=(1 << 64) - 1)
    beta: Fraction | None = None
    m: int = Field(default=3, ge=1)
    t: int = Field(default=1, ge=0)
    c: int = Field(default=1, ge=1)
    delta: Fraction = DEFAULT_DELTA
    sweep: bool = False
    max_tries: int = Field(default=DEFAULT_MAX_TRIES, ge=1)
    workers: int = Field(default=1, ge=1)

    @field_validator("beta", "delta", mode="before")
    @classmethod
    def parse_rationals(cls, value: Any) -> Any:
        """Accept ``"3/4"``-style strings for rational parameters."""
        return _parse_rational(value)

    @model_validator(mode="after")
    def resolve_defaults(self) -> ExperimentConfig:
        """Fill variant and k_bits, and reject combinations no trial can run."""
        if self.variant is None:
            if self.attack == ExperimentKind.CF:
                self.variant = Variant.K_OFFSET
            elif self.attack in (ExperimentKind.HONEST, ExperimentKind.GCD2):
                self.variant = Variant.CORRECTED
            else:
                self.variant = Variant.ORIGINAL
        if self.attack == ExperimentKind.CF and self.variant != Variant.K_OFFSET:
            raise ValueError("The cf attack needs the koffset variant")

        if self.k_bits is None:
            self.k_bits = default_k_bits(self.p_bits)
            if self.k_bits < DEFAULT_K_BITS:
                logger.warning(f"k_bits clamped to {self.k_bits} for {self.p_bits}-bit p")
        elif self.k_bits > self.p_bits - 2:
            raise ValueError(f"k_bits must be at most p_bits - 2 = {self.p_bits - 2}, got {self.k_bits}")

        if self.q_bits is None:
            self.q_bits = self.p_bits
        elif self.q_bits != self.p_bits and self.attack != ExperimentKind.HONEST:
            raise ValueError("Attack experiments need q_bits equal to p_bits")

        if not Fraction(1, 4) < self.delta < 1:
            raise ValueError(f"delta must lie in (1/4, 1), got {self.delta}")
        if self.attack == ExperimentKind.COPPERSMITH:
            self.coppersmith_params  # noqa: B018
        return self

    @property
    def coppersmith_params(self) -> CoppersmithParams:
        return CoppersmithParams(beta=self.beta, m=self.m, t=self.t, c=self.c, delta=self.delta)

    def to_dict(self) -> dict[str, Any]:
        """Canonical echo of the configuration.

        ``workers`` is left out so output does not depend on parallelism.
        """
        return {
            "attack": self.attack.value,
            "variant": self.variant.value if self.variant else None,
            "p_bits": self.p_bits,
            "q_bits": self.q_bits,
            "k_bits": self.k_bits,
            "k1_max": self.k1_max,
            "trials": self.trials,
            "seed": str(self.seed),
            "beta": str(self.beta) if self.beta is not None else None,
            "m": self.m,
            "t": self.t,
            "c": self.c,
            "delta": str(self.delta),
            "sweep": self.sweep,
            "max_tries": self.max_tries,
        }


@dataclass
class TrialRecord:
    """Result of one trial, checked against the planted instance.

    ``success`` is only set when the attack's own verdict agrees with the
    ground truth: recovered ``p`` equals the planted prime and the
    recovered root squares to ``n``. For honest sessions it means the
    client obtained a ROOT outcome.
    """

    trial: int
    p_bits: int
    k_bits: int
    success: bool = False
    report: AttackReport | None = None
    outcome: Outcome | None = None
    rounds: int | None = None
    p_matches: bool | None = None
    root_ok: bool | None = None
    coprime_odd_parts: bool | None = None
    error: str | None = None
    micros: int = 0

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        data: dict[str, Any] = {
            "type": "trial",
            "trial": self.trial,
            "p_bits": self.p_bits,
            "k_bits": self.k_bits,
            "success": self.success,
        }
        if self.report is not None:
            data["report"] = self.report.to_dict(include_timing=include_timing)
        if self.outcome is not None:
            data["outcome"] = self.outcome.to_dict()
        for name in ("rounds", "p_matches", "root_ok", "coprime_odd_parts", "error"):
            value = getattr(self, name)
            if value is not None:
                data[name] = value
        if include_timing:
            data["micros"] = self.micros
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TrialRecord:
        return cls(
            trial=int(data["trial"]),
            p_bits=int(data["p_bits"]),
            k_bits=int(data["k_bits"]),
            success=bool(data["success"]),
            report=AttackReport.from_dict(data["report"]) if "report" in data else None,
            outcome=Outcome.from_dict(data["outcome"]) if "outcome" in data else None,
            rounds=data.get("rounds"),
            p_matches=data.get("p_matches"),
            root_ok=data.get("root_ok"),
            coprime_odd_parts=data.get("coprime_odd_parts"),
            error=data.get("error"),
            micros=int(data.get("micros", 0)),
        )


def _percentile(values: list[int], fraction: float) -> float | None:
    """Nearest-rank percentile."""
    if not values:
        return None
    ordered = sorted(values)
    rank = max(math.ceil(fraction * len(ordered)), 1)
    return float(ordered[rank - 1])


@dataclass
class ExperimentSummary:
    """Aggregate of all trial records, ordered by trial index."""

    config: dict[str, Any]
    trials: int
    successes: int
    records: list[TrialRecord] = field(default_factory=list)

    @classmethod
    def from_records(cls, config: dict[str, Any], records: list[TrialRecord]) -> ExperimentSummary:
        ordered = sorted(records, key=lambda r: r.trial)
        return cls(
            config=config,
            trials=len(ordered),
            successes=sum(1 for r in ordered if r.success),
            records=ordered,
        )

    @property
    def rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def mean_micros(self) -> float | None:
        values = [r.micros for r in self.records]
        return sum(values) / len(values) if values else None

    @property
    def p50_micros(self) -> float | None:
        return _percentile([r.micros for r in self.records], 0.5)

    @property
    def p90_micros(self) -> float | None:
        return _percentile([r.micros for r in self.records], 0.9)

    def summary_dict(self, include_timing: bool = False) -> dict[str, Any]:
        data: dict[str, Any] = {
            "type": "summary",
            "config": self.config,
            "trials": self.trials,
            "successes": self.successes,
            "rate": self.rate,
        }
        if include_timing:
            data["mean_micros"] = self.mean_micros
            data["p50_micros"] = self.p50_micros
            data["p90_micros"] = self.p90_micros
        return data

    def to_jsonl(self, include_timing: bool = False) -> str:
        """One JSON object per trial followed by the summary object."""
        lines = [json.dumps(r.to_dict(include_timing), sort_keys=True) for r in self.records]
        lines.append(json.dumps(self.summary_dict(include_timing), sort_keys=True))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> ExperimentSummary:
        """Parse :meth:`to_jsonl` output.

        Raises:
            ParameterError: If the summary line is missing or disagrees with the records
        """
        records: list[TrialRecord] = []
        summary: dict[str, Any] | None = None
        for line in text.splitlines():
            if not line.strip():
                continue
            data = json.loads(line)
            if data.get("type") == "summary":
                summary = data
            else:
                records.append(TrialRecord.from_dict(data))
        if summary is None:
            raise ParameterError("Experiment output has no summary line", operation="PARSE")

        parsed = cls.from_records(summary.get("config", {}), records)
        if (parsed.trials, parsed.successes) != (summary["trials"], summary["successes"]):
            raise ParameterError(
                "Summary line disagrees with the trial records",
                operation="PARSE",
                details=f"summary {summary['successes']}/{summary['trials']}, "
                f"records {parsed.successes}/{parsed.trials}",
            )
        return parsed

    def to_csv(self, include_timing: bool = False) -> str:
        """CSV with columns trial, p_bits, k_bits, success, micros.

        ``micros`` is left empty unless timing is requested.
        """
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.records:
            writer.writerow([r.trial, r.p_bits, r.k_bits, int(r.success), r.micros if include_timing else ""])
        return buffer.getvalue()

    @classmethod
    def from_csv(cls, text: str, config: dict[str, Any] | None = None) -> ExperimentSummary:
        """Rebuild a summary (records without attack reports) from :meth:`to_csv` output."""
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ParameterError(f"Unexpected CSV header {reader.fieldnames}", operation="PARSE")
        records = [
            TrialRecord(
                trial=int(row["trial"]),
                p_bits=int(row["p_bits"]),
                k_bits=int(row["k_bits"]),
                success=row["success"] == "1",
                micros=int(row["micros"]) if row["micros"] else 0,
            )
            for row in reader
        ]
        return cls.from_records(config or {}, records)


def _verify_recovery(
    record: TrialRecord,
    inst: ProblemInstance,
    query: BlindedQuery,
    report: AttackReport,
    rng: Rng,
    expected_k: int | None = None,
) -> TrialRecord:
    """Cross-check a report against the planted instance and finish the record."""
    record.report = report
    if not report.success or report.recovered_p is None:
        return record

    record.p_matches = report.recovered_p == inst.p
    if expected_k is not None:
        record.p_matches = record.p_matches and report.recovered_k == expected_k
    try:
        n, x = recover_n_and_root(report.recovered_p, query, rng)
    except NotAResidueError as e:
        logger.warning(f"Trial {record.trial}: recovered modulus does not unblind n: {e}")
        record.root_ok = False
    else:
        report.recovered_n, report.recovered_x = n, x
        record.root_ok = n == inst.n and x * x % inst.p == inst.n
    record.success = bool(record.p_matches and record.root_ok)
    return record


def _odd_parts_coprime(d2_a: int, d2_b2: int, p: int) -> bool | None:
    """Whether ``(2*d2 - 2) / (p - 1)`` and its twin are coprime, when both divide exactly."""
    first, second = 2 * d2_a - 2, 2 * d2_b2 - 2
    if first % (p - 1) or second % (p - 1):
        return None
    return math.gcd(first // (p - 1), second // (p - 1)) == 1


def _twin_queries(
    config: ExperimentConfig, inst: ProblemInstance, rng: Rng
) -> tuple[BlindedQuery, BlindedQuery]:
    """Two queries for the same ``p`` and ``q`` but independent tasks."""
    secrets, first = blind(inst, rng, config.variant, config.k_bits, config.k1_max, q_bits=config.q_bits)
    n2, x2 = plant_qr(inst.p, rng)
    twin = ProblemInstance(p=inst.p, n=n2, known_root=x2)
    _, second = blind(twin, rng, config.variant, config.k_bits, config.k1_max, BlindingOverrides(q=secrets.q))
    return first, second


def _trial_gcd(config: ExperimentConfig, record: TrialRecord, inst: ProblemInstance, rng: Rng) -> TrialRecord:
    _, query = blind(inst, rng, config.variant, config.k_bits, config.k1_max, q_bits=config.q_bits)
    report = gcd_single(query, rng, config.max_tries)
    return _verify_recovery(record, inst, query, report, rng)


def _trial_gcd2(config: ExperimentConfig, record: TrialRecord, inst: ProblemInstance, rng: Rng) -> TrialRecord:
    first, second = _twin_queries(config, inst, rng)
    record.coprime_odd_parts = _odd_parts_coprime(first.d2_b, second.d2_b, inst.p)
    report = gcd_pair(first.d2_b, second.d2_b, first.p_b, sweep=config.sweep)
    return _verify_recovery(record, inst, first, report, rng)


def _trial_cf(config: ExperimentConfig, record: TrialRecord, inst: ProblemInstance, rng: Rng) -> TrialRecord:
    first, second = _twin_queries(config, inst, rng)
    report = cf_attack(first.d2_b, second.d2_b, first.p_b, config.k1_max)
    return _verify_recovery(record, inst, first, report, rng)


def _trial_coppersmith(
    config: ExperimentConfig, record: TrialRecord, inst: ProblemInstance, rng: Rng
) -> TrialRecord:
    secrets, query = blind(inst, rng, config.variant, config.k_bits, config.k1_max, q_bits=config.q_bits)
    report = coppersmith_attack(query, config.coppersmith_params)
    return _verify_recovery(record, inst, query, report, rng, expected_k=secrets.k)


def _trial_honest(config: ExperimentConfig, record: TrialRecord, inst: ProblemInstance, rng: Rng) -> TrialRecord:
    transcript = honest_run(inst, rng, config.variant, config.k_bits, config.k1_max, q_bits=config.q_bits)
    outcome = transcript.outcome
    record.outcome = outcome
    record.rounds = len(transcript.rounds)
    record.root_ok = outcome is not None and outcome.is_root and outcome.x * outcome.x % inst.p == inst.n
    record.success = bool(record.root_ok)
    return record


_TRIAL_RUNNERS: dict[ExperimentKind, Callable[[ExperimentConfig, TrialRecord, ProblemInstance, Rng], TrialRecord]] = {
    ExperimentKind.GCD: _trial_gcd,
    ExperimentKind.GCD2: _trial_gcd2,
    ExperimentKind.CF: _trial_cf,
    ExperimentKind.COPPERSMITH: _trial_coppersmith,
    ExperimentKind.HONEST: _trial_honest,
}


def run_trial(config: ExperimentConfig, index: int) -> TrialRecord:
    """Run trial ``index``: plant an instance, blind it, attack it, check the result.

    Library errors inside a trial are recorded on the trial rather than
    aborting the experiment.
    """
    rng = Rng(config.seed).derive(index)
    record = TrialRecord(trial=index, p_bits=config.p_bits, k_bits=config.k_bits)
    start = time.perf_counter()
    try:
        inst = ProblemInstance.plant(config.p_bits, rng)
        record = _TRIAL_RUNNERS[config.attack](config, record, inst, rng)
    except QclabError as e:
        logger.warning(f"Trial {index} failed: {e}")
        record.success = False
        record.error = str(e)
    record.micros = round((time.perf_counter() - start) * 1_000_000)
    logger.debug(f"Trial {index}: success={record.success} in {record.micros} us")
    return record


def run_experiment(
    config: ExperimentConfig,
    on_trial: Callable[[TrialRecord], None] | None = None,
) -> ExperimentSummary:
    """Run every trial of ``config`` and aggregate.

    Args:
        config: Validated experiment description
        on_trial: Called once per finished trial (completion order)

    Returns:
        ExperimentSummary with records sorted by trial index
    """
    records: list[TrialRecord] = []
    logger.info(f"Running {config.trials} {config.attack.value} trials with {config.workers} worker(s)")

    if config.workers == 1:
        for index in range(config.trials):
            record = run_trial(config, index)
            records.append(record)
            if on_trial:
                on_trial(record)
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            futures = [executor.submit(run_trial, config, index) for index in range(config.trials)]
            for future in as_completed(futures):
                record = future.result()
                records.append(record)
                if on_trial:
                    on_trial(record)

    summary = ExperimentSummary.from_records(config.to_dict(), records)
    logger.info(f"Experiment finished: {summary.successes}/{summary.trials} successes")
    return summary


# Client task and forced secrets of the worked counterexample: x**2 = 9 mod 83
COUNTEREXAMPLE_INSTANCE = ProblemInstance(p=83, n=9, known_root=3)
COUNTEREXAMPLE_OVERRIDES = BlindingOverrides(q=97, r1=21, r2=73, k=13, a_values=(3345,))

_COUNTEREXAMPLE_D2 = {Variant.ORIGINAL: 6028, Variant.CORRECTED: 502866}


@dataclass(frozen=True)
class Checkpoint:
    """One reference value of the replay and what the replay produced."""

    name: str
    expected: str
    actual: str
    ok: bool

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "expected": self.expected, "actual": self.actual, "ok": self.ok}


def _quad_str(elem: QuadExtElem | None) -> str:
    if elem is None:
        return "none"
    return f"{elem.u} + {elem.v}*sqrt({elem.w})"


def _check(name: str, expected: Any, actual: Any) -> Checkpoint:
    return Checkpoint(name, str(expected), str(actual), str(expected) == str(actual))


@dataclass
class CounterexampleReplay:
    """Replayed session for ``x**2 = 9 mod 83`` with its checkpoints."""

    variant: Variant
    transcript: Transcript
    checkpoints: list[Checkpoint]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checkpoints)

    @property
    def first_divergence(self) -> Checkpoint | None:
        return next((c for c in self.checkpoints if not c.ok), None)

    def verify(self) -> None:
        """Raise CheckpointMismatchError at the first diverging checkpoint."""
        bad = self.first_divergence
        if bad is not None:
            raise CheckpointMismatchError(bad.name, bad.expected, bad.actual)

    def to_dict(self) -> dict[str, Any]:
        return {
            "variant": self.variant.value,
            "ok": self.ok,
            "checkpoints": [c.to_dict() for c in self.checkpoints],
            "transcript": self.transcript.to_dict(),
        }


def replay_counterexample(variant: Variant = Variant.ORIGINAL) -> CounterexampleReplay:
    """Replay the worked session ``x**2 = 9 mod 83`` with forced secrets.

    ORIGINAL must reproduce the reference intermediate values and end
    outside the base field at ``31 + 34*sqrt(35)``, whose square is
    ``4 + 33*sqrt(35)`` rather than 9. CORRECTED shares the first-round
    values and must end with the root 3 or 80.

    Raises:
        ParameterError: For the K_OFFSET variant, which has no reference session
    """
    if variant not in _COUNTEREXAMPLE_D2:
        raise ParameterError(f"No reference session for the {variant.value} variant", operation="REPLAY")

    inst = COUNTEREXAMPLE_INSTANCE
    transcript = honest_run(inst, Rng(0), variant, overrides=COUNTEREXAMPLE_OVERRIDES)
    query = transcript.query
    first = transcript.rounds[0]

    checkpoints = [
        _check("n_b", -1734, query.n_b),
        _check("d_b", 28, query.d_b),
        _check("d2_b", _COUNTEREXAMPLE_D2[variant], query.d2_b),
        _check("p_b", 8051, query.p_b),
        _check("a", 3345, first.a),
        _check("R1_b", 3927, first.r1_b),
        _check("verdict", Verdict.Y.value, first.verdict.value),
    ]

    outcome = transcript.outcome
    if variant == Variant.ORIGINAL:
        checkpoints.append(_check("R2_b", "5592 + 3935*sqrt(7920)", _quad_str(transcript.r2_b)))
        reduced = transcript.r2_b.reduce(inst.p) if transcript.r2_b is not None else None
        checkpoints.append(_check("x", "31 + 34*sqrt(35)", _quad_str(reduced)))
        square = reduced * reduced if reduced is not None else None
        checkpoints.append(_check("x_squared", "4 + 33*sqrt(35)", _quad_str(square)))
        checkpoints.append(_check("outcome", OutcomeKind.NON_INTEGER.value, outcome.kind.value))
    else:
        actual = f"{outcome.kind.value} {outcome.x}" if outcome.is_root else outcome.kind.value
        checkpoints.append(
            Checkpoint("outcome", "root 3 or 80", actual, outcome.is_root and outcome.x in (3, 80))
        )

    for c in checkpoints:
        logger.debug(f"Checkpoint {c.name}: expected {c.expected}, got {c.actual}")
    return CounterexampleReplay(variant=variant, transcript=transcript, checkpoints=checkpoints)


@dataclass
class DemoResult:
    """Single honest session on a freshly planted instance."""

    variant: Variant
    p_bits: int
    seed: int
    instance: ProblemInstance
    transcript: Transcript

    @property
    def expected(self) -> bool:
        """CORRECTED should yield the root; the other variants should not."""
        is_root = self.transcript.outcome is not None and self.transcript.outcome.is_root
        return is_root if self.variant == Variant.CORRECTED else not is_root

    def to_dict(self) -> dict[str, Any]:
        return {
            "variant": self.variant.value,
            "p_bits": self.p_bits,
            "seed": str(self.seed),
            "expected": self.expected,
            "instance": {"p": str(self.instance.p), "n": str(self.instance.n)},
            "transcript": self.transcript.to_dict(),
        }


def demo_run(
    variant: Variant,
    p_bits: int,
    seed: int,
    k_bits: int | None = None,
    k1_max: int = DEFAULT_K1_MAX,
) -> DemoResult:
    """Plant an instance from ``seed`` and run one honest session on it.

    Raises:
        ParameterError: For bad sizes or seed
        ProtocolFailureError: If no round is accepted
    """
    rng = Rng(seed)
    inst = ProblemInstance.plant(p_bits, rng)
    transcript = honest_run(inst, rng, variant, k_bits if k_bits is not None else default_k_bits(p_bits), k1_max)
    return DemoResult(variant=variant, p_bits=p_bits, seed=seed, instance=inst, transcript=transcript)
