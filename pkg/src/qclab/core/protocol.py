"""Outsourced modular square root protocol.

The client hides its task ``x**2 = n mod p`` behind the blinded query
``(n', d', d2', p')`` and lets the server run Cipolla's exponentiations
modulo ``p' = p*q``:

1. blind: ``n' = n - r1*p``, ``d' = (p-1)/2 - k``, ``d2'`` per variant, ``p' = p*q``
2. server round 1: ``R1' = (a**2 - n')**d' mod p'``
3. client check: ``(a**2 - n')**k * R1' = -1 mod p`` (Euler's criterion on ``w``)
4. server round 2: ``R2' = (a + sqrt(a**2 - n'))**d2'`` in ``Z_{p'}[sqrt(w)]``
5. client recovery: reduce ``R2'`` modulo ``p`` and check the square

Three exponent variants are supported. ORIGINAL uses
``d2' = (p+1)/2 + r2*(p-1)``, which is generally wrong because the unit
group of ``F_{p^2}`` has order ``p**2 - 1``. CORRECTED uses
``(p+1)/2 + r2*(p**2-1)``, and K_OFFSET subtracts a small ``k1`` from it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from qclab.core.errors import ParameterError, ProtocolFailureError
from qclab.core.ntcore import (
    QuadExtElem,
    Rng,
    euler_symbol,
    is_prime,
    mod_pow,
    plant_qr,
    quad_pow,
    random_prime,
)

logger = logging.getLogger(__name__)

DEFAULT_K_BITS = 80
DEFAULT_K1_MAX = 100
ROUND_CAP_FACTOR = 64


class Variant(str, Enum):
    """Choice of the second exponent ``d2'``."""

    ORIGINAL = "original"  # (p+1)/2 + r2*(p-1)
    CORRECTED = "corrected"  # (p+1)/2 + r2*(p^2-1)
    K_OFFSET = "koffset"  # (p+1)/2 + r2*(p^2-1) - k1


class Verdict(str, Enum):
    """Client answer to a round-1 value."""

    Y = "Y"
    N = "N"


class OutcomeKind(str, Enum):
    """How the client's final reduction ended."""

    ROOT = "root"
    NON_INTEGER = "non_integer"
    CHECK_FAILED = "check_failed"


@dataclass(frozen=True)
class ProblemInstance:
    """The client's secret task: a square root of ``n`` modulo the prime ``p``."""

    p: int
    n: int
    known_root: int | None = None

    @classmethod
    def plant(cls, p_bits: int, rng: Rng) -> ProblemInstance:
        """Generate an instance from a known root."""
        p = random_prime(p_bits, rng)
        n, x = plant_qr(p, rng)
        return cls(p=p, n=n, known_root=x)

    def validate(self) -> None:
        """Raise ParameterError unless ``p`` is an odd prime and ``n`` a nonzero residue."""
        if self.p < 3 or not is_prime(self.p):
            raise ParameterError(f"Modulus {self.p} is not an odd prime", operation="INSTANCE")
        if euler_symbol(self.n, self.p) != 1:
            raise ParameterError(f"{self.n} is not a quadratic residue modulo {self.p}", operation="INSTANCE")


@dataclass(frozen=True)
class BlindingSecrets:
    """Client-side randomness of one session."""

    q: int
    r1: int
    r2: int
    k: int
    variant: Variant
    k1: int | None = None


@dataclass(frozen=True)
class BlindingOverrides:
    """Forced values replacing sampled randomness, for replaying known sessions."""

    q: int | None = None
    r1: int | None = None
    r2: int | None = None
    k: int | None = None
    k1: int | None = None
    a_values: tuple[int, ...] = ()


@dataclass(frozen=True)
class BlindedQuery:
    """Public tuple ``(n', d', d2', p')`` sent to the server."""

    n_b: int
    d_b: int
    d2_b: int
    p_b: int

    def to_dict(self) -> dict[str, str]:
        return {"n_b": str(self.n_b), "d_b": str(self.d_b), "d2_b": str(self.d2_b), "p_b": str(self.p_b)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> BlindedQuery:
        return cls(n_b=int(data["n_b"]), d_b=int(data["d_b"]), d2_b=int(data["d2_b"]), p_b=int(data["p_b"]))


@dataclass(frozen=True)
class Round:
    """One ``(a, R1')`` exchange and the client's verdict."""

    a: int
    r1_b: int
    verdict: Verdict

    def to_dict(self) -> dict[str, str]:
        return {"a": str(self.a), "R1_b": str(self.r1_b), "verdict": self.verdict.value}


@dataclass(frozen=True)
class Outcome:
    """Result of the client's final reduction modulo ``p``.

    ``x`` is set for ROOT; ``(u, v, w)`` hold the reduced extension
    element for NON_INTEGER.
    """

    kind: OutcomeKind
    x: int | None = None
    u: int | None = None
    v: int | None = None
    w: int | None = None

    @property
    def is_root(self) -> bool:
        return self.kind == OutcomeKind.ROOT

    def to_dict(self) -> dict[str, str]:
        data = {"kind": self.kind.value}
        if self.x is not None:
            data["x"] = str(self.x)
        for name in ("u", "v", "w"):
            value = getattr(self, name)
            if value is not None:
                data[name] = str(value)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Outcome:
        def opt(name: str) -> int | None:
            return int(data[name]) if name in data else None

        return cls(kind=OutcomeKind(data["kind"]), x=opt("x"), u=opt("u"), v=opt("v"), w=opt("w"))


@dataclass
class Transcript:
    """Everything exchanged in one honest session plus the client's outcome."""

    query: BlindedQuery
    rounds: list[Round] = field(default_factory=list)
    r2_b: QuadExtElem | None = None
    outcome: Outcome | None = None

    @property
    def accepted_round(self) -> Round | None:
        return next((r for r in self.rounds if r.verdict == Verdict.Y), None)

    def to_dict(self) -> dict[str, Any]:
        """Canonical JSON-ready form with integers as decimal strings."""
        data: dict[str, Any] = self.query.to_dict()
        data["rounds"] = [r.to_dict() for r in self.rounds]
        data["R2_b"] = (
            {"u": str(self.r2_b.u), "v": str(self.r2_b.v), "w": str(self.r2_b.w)} if self.r2_b is not None else None
        )
        data["outcome"] = self.outcome.to_dict() if self.outcome is not None else None
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Transcript:
        query = BlindedQuery.from_dict(data)
        rounds = [Round(int(r["a"]), int(r["R1_b"]), Verdict(r["verdict"])) for r in data.get("rounds", [])]
        r2 = data.get("R2_b")
        r2_b = QuadExtElem(int(r2["u"]), int(r2["v"]), int(r2["w"]), query.p_b) if r2 else None
        outcome = Outcome.from_dict(data["outcome"]) if data.get("outcome") else None
        return cls(query=query, rounds=rounds, r2_b=r2_b, outcome=outcome)


def second_exponent(p: int, r2: int, variant: Variant, k1: int | None = None) -> int:
    """Compute ``d2'`` for the given variant."""
    half = (p + 1) // 2
    if variant == Variant.ORIGINAL:
        return half + r2 * (p - 1)
    if variant == Variant.CORRECTED:
        return half + r2 * (p * p - 1)
    if k1 is None:
        raise ParameterError("K_OFFSET variant needs k1", operation="BLIND")
    return half + r2 * (p * p - 1) - k1


def blind(
    inst: ProblemInstance,
    rng: Rng,
    variant: Variant = Variant.ORIGINAL,
    k_bits: int = DEFAULT_K_BITS,
    k1_max: int = DEFAULT_K1_MAX,
    overrides: BlindingOverrides | None = None,
    q_bits: int | None = None,
) -> tuple[BlindingSecrets, BlindedQuery]:
    """Draw the client's secrets and build the blinded query.

    Args:
        inst: Secret task
        rng: Randomness for q, r1, r2, k and k1 (drawn in that order)
        variant: Exponent variant for ``d2'``
        k_bits: Exact bit length of ``k``
        k1_max: Upper bound for ``k1`` (K_OFFSET only)
        overrides: Forced values for any of the secrets
        q_bits: Bit length of q (defaults to that of p)

    Returns:
        Tuple of (secrets, query)

    Raises:
        ParameterError: If ``k`` has to be sampled and ``k_bits > bitlen(p) - 2``
    """
    overrides = overrides or BlindingOverrides()
    p = inst.p
    bits = p.bit_length()

    q = overrides.q
    while q is None or q == p:
        q = random_prime(q_bits or bits, rng)
    r1 = overrides.r1 if overrides.r1 is not None else rng.randbelow(p)
    r2 = overrides.r2 if overrides.r2 is not None else rng.randbelow(p)

    k = overrides.k
    if k is None:
        if not 0 <= k_bits <= bits - 2:
            raise ParameterError(
                f"k_bits must be in [0, {bits - 2}] for a {bits}-bit modulus, got {k_bits}", operation="BLIND"
            )
        while k is None or k >= (p - 1) // 2:
            k = rng.randbits(k_bits) | (1 << (k_bits - 1)) if k_bits else 0

    k1 = None
    if variant == Variant.K_OFFSET:
        k1 = overrides.k1 if overrides.k1 is not None else rng.randint(0, min(k1_max, (p + 1) // 2))

    secrets = BlindingSecrets(q=q, r1=r1, r2=r2, k=k, variant=variant, k1=k1)
    query = BlindedQuery(
        n_b=inst.n - r1 * p,
        d_b=(p - 1) // 2 - k,
        d2_b=second_exponent(p, r2, variant, k1),
        p_b=p * q,
    )
    logger.debug(f"Blinded {bits}-bit instance ({variant.value}): p' has {query.p_b.bit_length()} bits")
    return secrets, query


def server_round1(query: BlindedQuery, a: int) -> int:
    """Server: ``R1' = (a**2 - n')**d' mod p'``."""
    return mod_pow(a * a - query.n_b, query.d_b, query.p_b)


def client_check_round1(
    inst: ProblemInstance,
    secrets: BlindingSecrets,
    query: BlindedQuery,
    a: int,
    r1_b: int,
) -> Verdict:
    """Client: accept ``a`` iff ``(a**2 - n')**k * R1' = -1 mod p``."""
    p = inst.p
    check = mod_pow(a * a - query.n_b, secrets.k, p) * (r1_b % p) % p
    return Verdict.Y if check == p - 1 else Verdict.N


def server_round2(query: BlindedQuery, a: int) -> QuadExtElem:
    """Server: ``R2' = (a + sqrt(a**2 - n'))**d2'`` in ``Z_{p'}[sqrt(w)]``."""
    return quad_pow(QuadExtElem(a, 1, a * a - query.n_b, query.p_b), query.d2_b)


def client_recover(inst: ProblemInstance, secrets: BlindingSecrets, r2_b: QuadExtElem) -> Outcome:
    """Client: reduce ``R2'`` modulo ``p`` and verify the candidate root.

    A nonzero ``sqrt(w)`` coefficient means the value never left the
    extension field, which is the failure mode of the ORIGINAL variant.
    """
    reduced = r2_b.reduce(inst.p)
    if not reduced.is_scalar:
        return Outcome(OutcomeKind.NON_INTEGER, u=reduced.u, v=reduced.v, w=reduced.w)
    x = reduced.u
    if x * x % inst.p == inst.n % inst.p:
        return Outcome(OutcomeKind.ROOT, x=x)
    return Outcome(OutcomeKind.CHECK_FAILED)


def honest_run(
    inst: ProblemInstance,
    rng: Rng,
    variant: Variant = Variant.ORIGINAL,
    k_bits: int = DEFAULT_K_BITS,
    k1_max: int = DEFAULT_K1_MAX,
    overrides: BlindingOverrides | None = None,
    q_bits: int | None = None,
) -> Transcript:
    """Run a full session with an honest server.

    The server draws ``a`` uniformly from ``[0, p')`` (or takes the forced
    ``a_values`` first) until the client answers Y.

    Raises:
        ProtocolFailureError: If no round is accepted within ``64 * bitlen(p)`` tries
    """
    overrides = overrides or BlindingOverrides()
    secrets, query = blind(inst, rng, variant, k_bits, k1_max, overrides, q_bits)
    transcript = Transcript(query=query)

    forced = list(overrides.a_values)
    cap = ROUND_CAP_FACTOR * inst.p.bit_length()
    for _ in range(cap):
        a = forced.pop(0) if forced else rng.randbelow(query.p_b)
        r1_b = server_round1(query, a)
        verdict = client_check_round1(inst, secrets, query, a, r1_b)
        transcript.rounds.append(Round(a, r1_b, verdict))
        if verdict == Verdict.Y:
            break
    else:
        raise ProtocolFailureError(cap)

    transcript.r2_b = server_round2(query, a)
    transcript.outcome = client_recover(inst, secrets, transcript.r2_b)
    logger.debug(f"Session finished after {len(transcript.rounds)} rounds: {transcript.outcome.kind.value}")
    return transcript
