"""Passive key-recovery attacks on the blinded square-root protocol.

All attacks see only public queries. Recovering the secret prime ``p``
is enough: ``n = n' mod p`` follows immediately and ``x`` is one
Cipolla run away (:func:`recover_n_and_root`).

- gcd_single: ``2*d2' - 2`` is a multiple of ``p - 1``, so
  ``gcd(b**(2*d2'-2) - 1, p')`` leaks ``p`` for almost every ``b``.
- gcd_pair: two queries against the same ``p`` share the factor ``p - 1``.
- cf_attack: with the ``k1`` offset, ``r2/r2_bar`` is a convergent of
  ``d2'/d2_bar'`` and each ``r2`` pins down ``p`` through a quadratic.
- coppersmith_attack: ``k`` is a small root of ``x + d' + (1 - p')/2``
  modulo the unknown divisor ``p`` of ``p'``.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any

from qclab.core.diophantine import (
    DEFAULT_DELTA,
    LatticeBasis,
    cf_convergents,
    dot,
    lll_reduce,
    poly_mul,
    poly_trim,
    small_integer_roots,
)
from qclab.core.errors import NotAResidueError, ParameterError
from qclab.core.ntcore import Rng, cipolla_sqrt, euler_symbol, ext_gcd, is_prime, mod_pow
from qclab.core.protocol import BlindedQuery

logger = logging.getLogger(__name__)

DEFAULT_MAX_TRIES = 64
SWEEP_BOUND = 1 << 16
MAX_LATTICE_DIM = 16


class AttackKind(str, Enum):
    """Available attacks, named as on the command line."""

    GCD_SINGLE = "gcd"
    GCD_PAIR = "gcd2"
    CF = "cf"
    COPPERSMITH = "coppersmith"


@dataclass
class AttackReport:
    """Outcome of one attack run.

    ``details`` carries attack-specific extras (leaking base, convergent
    index, lattice dimension, ...) as strings.
    """

    kind: AttackKind
    success: bool = False
    recovered_p: int | None = None
    recovered_k: int | None = None
    recovered_r2: int | None = None
    recovered_r2_bar: int | None = None
    recovered_k1: int | None = None
    recovered_k1_bar: int | None = None
    recovered_n: int | None = None
    recovered_x: int | None = None
    tries: int = 0
    wall_time: float = 0.0
    details: dict[str, str] = field(default_factory=dict)

    _INT_FIELDS = (
        "recovered_p",
        "recovered_k",
        "recovered_r2",
        "recovered_r2_bar",
        "recovered_k1",
        "recovered_k1_bar",
        "recovered_n",
        "recovered_x",
    )

    def to_dict(self, include_timing: bool = True) -> dict[str, Any]:
        """JSON-ready form with integers as decimal strings; unset fields are omitted."""
        data: dict[str, Any] = {"kind": self.kind.value, "success": self.success, "tries": self.tries}
        for name in self._INT_FIELDS:
            value = getattr(self, name)
            if value is not None:
                data[name] = str(value)
        if self.details:
            data["details"] = dict(self.details)
        if include_timing:
            data["micros"] = round(self.wall_time * 1_000_000)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> AttackReport:
        report = cls(
            kind=AttackKind(data["kind"]),
            success=bool(data["success"]),
            tries=int(data.get("tries", 0)),
            wall_time=int(data.get("micros", 0)) / 1_000_000,
            details=dict(data.get("details", {})),
        )
        for name in cls._INT_FIELDS:
            if name in data:
                setattr(report, name, int(data[name]))
        return report


@dataclass(frozen=True)
class CoppersmithParams:
    """Lattice parameters for the small-root attack.

    Args:
        beta: Exponent with ``p >= p'**beta``; None derives
            ``(bitlen/2 - 1) / bitlen`` from the modulus
        m: Shift depth (powers of ``f`` up to ``f**m``)
        t: Extra shifts ``x**j * f**m``
        c: Multiplier of the root bound; ignored when the bound is capped
            at the provable limit for (m, t, delta)
        x_bound: Explicit root bound overriding the computed one
        delta: Lovasz parameter for the reduction
    """

    beta: Fraction | None = None
    m: int = 3
    t: int = 1
    c: int = 1
    x_bound: int | None = None
    delta: Fraction = DEFAULT_DELTA

    def __post_init__(self) -> None:
        if self.beta is not None and not 0 < self.beta <= 1:
            raise ParameterError(f"beta must lie in (0, 1], got {self.beta}", operation="COPPERSMITH")
        if self.m < 1 or self.t < 0 or self.c < 1:
            raise ParameterError(
                f"Need m >= 1, t >= 0, c >= 1; got m={self.m}, t={self.t}, c={self.c}", operation="COPPERSMITH"
            )
        if self.dim > MAX_LATTICE_DIM:
            raise ParameterError(
                f"Lattice dimension {self.dim} exceeds {MAX_LATTICE_DIM}", operation="COPPERSMITH"
            )

    @property
    def dim(self) -> int:
        return self.m + self.t + 1

    def beta_for(self, modulus: int) -> Fraction:
        """Resolve ``beta`` for a concrete modulus."""
        if self.beta is not None:
            return Fraction(self.beta)
        bits = modulus.bit_length()
        return Fraction(bits - 2, 2 * bits)


def is_valid_factor(candidate: int, p_b: int | None) -> bool:
    """Check that a recovered ``p`` is a prime half-size divisor of ``p'``.

    Without ``p_b`` only primality is checked.
    """
    if candidate < 3 or not is_prime(candidate):
        return False
    if p_b is None:
        return True
    return p_b % candidate == 0 and candidate.bit_length() == (p_b.bit_length() + 1) // 2


def gcd_single(
    query: BlindedQuery,
    rng: Rng,
    max_tries: int = DEFAULT_MAX_TRIES,
    bases: Sequence[int] = (),
) -> AttackReport:
    """Recover ``p`` from one query whose ``2*d2' - 2`` is a multiple of ``p - 1``.

    Args:
        query: Public query (ORIGINAL or CORRECTED variant)
        rng: Source of the bases ``b``
        max_tries: Number of bases to try
        bases: Bases tried before sampling

    Returns:
        AttackReport (success False when every base failed)
    """
    start = time.perf_counter()
    report = AttackReport(kind=AttackKind.GCD_SINGLE)
    p_b = query.p_b
    exponent = 2 * query.d2_b - 2
    forced = list(bases)

    for _ in range(max_tries):
        b = forced.pop(0) if forced else rng.randint(2, p_b - 2)
        report.tries += 1
        t = (mod_pow(b, exponent, p_b) - 1) % p_b
        if t == 0:
            continue
        g, _, _ = ext_gcd(t, p_b)
        if 1 < g < p_b and is_valid_factor(g, p_b):
            report.success = True
            report.recovered_p = g
            report.details["base"] = str(b)
            break

    report.wall_time = time.perf_counter() - start
    logger.debug(f"gcd_single: success={report.success} after {report.tries} bases")
    return report


def gcd_pair(d2_a: int, d2_b2: int, p_b: int, sweep: bool = False, sweep_bound: int = SWEEP_BOUND) -> AttackReport:
    """Recover ``p`` from two second exponents issued for the same ``p``.

    ``gcd(2*d2 - 2, 2*d2_bar - 2) = (p - 1) * gcd(1 + 2*r2, 1 + 2*r2_bar)``
    for the ORIGINAL variant and ``(p - 1) * gcd(1 + 2*r2*(p+1), 1 + 2*r2_bar*(p+1))``
    for CORRECTED, so ``g + 1`` is ``p`` whenever the odd parts are coprime.
    With ``sweep`` the small cofactors ``e <= sweep_bound`` of ``g`` are
    also stripped.
    """
    start = time.perf_counter()
    report = AttackReport(kind=AttackKind.GCD_PAIR)
    g, _, _ = ext_gcd(2 * d2_a - 2, 2 * d2_b2 - 2)
    report.details["gcd"] = str(g)

    cofactors = [1]
    if sweep:
        cofactors += [e for e in range(2, min(sweep_bound, g) + 1) if g % e == 0]
    for e in cofactors:
        if g == 0:
            break
        report.tries += 1
        candidate = g // e + 1
        if is_valid_factor(candidate, p_b):
            report.success = True
            report.recovered_p = candidate
            report.details["cofactor"] = str(e)
            break

    report.wall_time = time.perf_counter() - start
    return report


def recover_p_given_r2(d2: int, r2: int, k1_max: int) -> tuple[int, int] | None:
    """Solve ``d2 = (p+1)/2 + r2*(p**2-1) - k1`` for ``p`` with ``0 <= k1 <= k1_max``.

    Rearranged: ``2*r2*p**2 + p + (1 - 2*r2 - 2*k1 - 2*d2) = 0``. Roots
    with ``p <= r2`` are rejected, as ``r2`` lies in ``[0, p)``.

    Returns:
        ``(p, k1)`` for the first ``k1`` giving an odd prime root above ``r2``, else None

    Raises:
        ParameterError: If ``r2 < 1``
    """
    if r2 < 1:
        raise ParameterError(f"r2 must be positive, got {r2}", operation="CF_ATTACK")
    for k1 in range(k1_max + 1):
        constant = 1 - 2 * r2 - 2 * k1 - 2 * d2
        disc = 1 - 8 * r2 * constant
        if disc < 0:
            continue
        root = math.isqrt(disc)
        if root * root != disc or (root - 1) % (4 * r2):
            continue
        p = (root - 1) // (4 * r2)
        if p > max(r2, 2) and p % 2 == 1 and is_prime(p):
            return p, k1
    return None


def cf_attack(d2_a: int, d2_b2: int, p_b: int | None, k1_max: int) -> AttackReport:
    """Recover ``(r2, r2_bar, p, k1)`` from two K_OFFSET exponents.

    Each convergent ``h/l`` of ``d2_a/d2_b2`` is tried as ``r2/r2_bar``;
    the first one whose quadratic yields a valid ``p`` wins. When both
    exponents yield a root the two must agree.

    Args:
        d2_a: First exponent
        d2_b2: Second exponent, same ``p``
        p_b: Public modulus, or None to skip the divisibility check
        k1_max: Largest offset to sweep
    """
    start = time.perf_counter()
    report = AttackReport(kind=AttackKind.CF)
    if d2_b2 < 1 or d2_a < 0:
        report.wall_time = time.perf_counter() - start
        return report

    for index, conv in enumerate(cf_convergents(d2_a, d2_b2)):
        report.tries += 1
        first = recover_p_given_r2(d2_a, conv.h, k1_max) if conv.h >= 1 else None
        second = recover_p_given_r2(d2_b2, conv.l, k1_max)
        if first is not None and not is_valid_factor(first[0], p_b):
            first = None
        if second is not None and not is_valid_factor(second[0], p_b):
            second = None
        if first is None and second is None:
            continue
        if first is not None and second is not None and first[0] != second[0]:
            continue

        report.success = True
        report.recovered_p = first[0] if first is not None else second[0]
        report.recovered_r2, report.recovered_r2_bar = conv.h, conv.l
        if first is not None:
            report.recovered_k1 = first[1]
        if second is not None:
            report.recovered_k1_bar = second[1]
        report.details["convergent_index"] = str(index)
        break

    report.wall_time = time.perf_counter() - start
    logger.debug(f"cf_attack: success={report.success} after {report.tries} convergents")
    return report


def offset_polynomial(query: BlindedQuery) -> list[int]:
    """Monic ``f(x) = x + d' + (1 - p')/2 mod p'``, whose root mod ``p`` is ``k``."""
    inverse_two = pow(2, -1, query.p_b)
    return [(query.d_b + (1 - query.p_b) * inverse_two) % query.p_b, 1]


def root_bound(modulus: int, params: CoppersmithParams) -> int:
    """Root bound X used to scale the lattice.

    Starts from ``c * N**(beta**2)`` and caps it at the largest X for which
    LLL at this (m, t, delta) provably returns a polynomial vanishing at
    the root over the integers.
    """
    if params.x_bound is not None:
        return params.x_bound

    beta = float(params.beta_for(modulus))
    log_n = math.log2(modulus)
    m, dim = params.m, params.dim
    theorem_bits = math.floor(beta * beta * log_n)

    approximation = 1 / (float(params.delta) - 0.25)
    slack = 0.5 * math.log2(dim) + (dim - 1) / 4 * math.log2(approximation)
    provable_bits = 2 / (dim - 1) * (beta * m * log_n - m * (m + 1) / (2 * dim) * log_n - slack) - 1

    bound = params.c << max(theorem_bits, 0)
    if provable_bits < theorem_bits:
        bound = min(bound, 1 << max(math.floor(provable_bits), 0))
    return max(bound, 1)


def build_coppersmith_lattice(query: BlindedQuery, params: CoppersmithParams) -> tuple[LatticeBasis, int]:
    """Shift-polynomial lattice for the offset polynomial.

    Rows are ``N**(m-i) * f**i`` for ``0 <= i <= m`` and ``x**j * f**m`` for
    ``1 <= j <= t``, with the coefficient of ``x**i`` scaled by ``X**i``.

    Returns:
        Tuple of (basis, X)
    """
    modulus = query.p_b
    bound = root_bound(modulus, params)
    f = offset_polynomial(query)
    dim = params.dim

    shifts: list[list[int]] = []
    power = [1]
    for i in range(params.m + 1):
        shifts.append([modulus ** (params.m - i) * coeff for coeff in power])
        if i < params.m:
            power = poly_mul(power, f)
    for j in range(1, params.t + 1):
        shifts.append([0] * j + power)

    rows = []
    for poly in shifts:
        padded = poly + [0] * (dim - len(poly))
        rows.append([coeff * bound**i for i, coeff in enumerate(padded)])
    return LatticeBasis.from_rows(rows), bound


def coppersmith_attack(query: BlindedQuery, params: CoppersmithParams | None = None) -> AttackReport:
    """Recover ``k`` and ``p`` from ``d'`` by finding a small root modulo ``p``.

    Reduced rows are read back as polynomials (shortest first); an integer
    root ``k`` counts when ``2*(d' + k) + 1`` is a valid factor of ``p'``.
    """
    params = params or CoppersmithParams()
    start = time.perf_counter()
    report = AttackReport(kind=AttackKind.COPPERSMITH)
    if query.p_b % 2 == 0:
        report.wall_time = time.perf_counter() - start
        return report

    basis, bound = build_coppersmith_lattice(query, params)
    report.details["dim"] = str(basis.dim)
    report.details["x_bits"] = str(bound.bit_length())
    reduced = lll_reduce(basis, params.delta)

    for row in sorted(reduced.rows, key=lambda r: dot(r, r)):
        report.tries += 1
        poly = poly_trim([coeff // bound**i for i, coeff in enumerate(row)])
        if not poly:
            continue
        for k in small_integer_roots(poly, bound):
            if k < 0:
                continue
            candidate = 2 * (query.d_b + k) + 1
            if is_valid_factor(candidate, query.p_b):
                report.success = True
                report.recovered_k = k
                report.recovered_p = candidate
                break
        if report.success:
            break

    report.wall_time = time.perf_counter() - start
    logger.debug(f"coppersmith_attack: dim={basis.dim}, X bits={bound.bit_length()}, success={report.success}")
    return report


def recover_n_and_root(p: int, query: BlindedQuery, rng: Rng) -> tuple[int, int]:
    """Undo the blinding once ``p`` is known.

    Returns:
        ``(n, x)`` with ``n = n' mod p`` and ``x**2 = n mod p``

    Raises:
        NotAResidueError: If ``n' mod p`` is a nonresidue, i.e. ``p`` is the wrong factor
    """
    n = query.n_b % p
    if n and euler_symbol(n, p) != 1:
        raise NotAResidueError(n, p, details="the candidate factor is probably not the secret modulus")
    return n, cipolla_sqrt(n, p, rng)
