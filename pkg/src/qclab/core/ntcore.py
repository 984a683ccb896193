"""Number-theoretic primitives and quadratic-extension arithmetic.

Everything here works on Python's arbitrary-precision integers. The only
stateful object is :class:`Rng`, which is always passed explicitly so a
seed fully determines every random choice made by the protocol, the
attacks and the experiment harness.
"""

from __future__ import annotations

import hashlib
import logging
import random
from dataclasses import dataclass, field

from qclab.core.errors import (
    DomainMismatchError,
    NonTerminationError,
    NotAResidueError,
    ParameterError,
)

logger = logging.getLogger(__name__)

# Miller-Rabin rounds used when generating primes vs. validating attack candidates
GENERATION_ROUNDS = 32
VALIDATION_ROUNDS = 16

# First twelve primes: a complete witness set for every n < 3.3 * 10**24
_DETERMINISTIC_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_SMALL_PRIMES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
)  # fmt: skip

_U64_MASK = (1 << 64) - 1


@dataclass
class Rng:
    """Seeded random stream.

    Identical seeds produce identical sequences on every platform. The
    ``position`` counter tracks how many draws have been taken, which is
    useful when two runs need to be compared.

    Example:
        >>> rng = Rng(42)
        >>> trial_rng = rng.derive(7)  # independent stream for trial 7
    """

    seed: int
    position: int = 0
    _random: random.Random = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 0 <= self.seed <= _U64_MASK:
            raise ParameterError(f"Seed must be a 64-bit unsigned integer, got {self.seed}", operation="RNG")
        self._random = random.Random(self.seed)

    def randbits(self, bits: int) -> int:
        """Return a uniform integer with at most ``bits`` bits."""
        self.position += 1
        return self._random.getrandbits(bits)

    def randbelow(self, upper: int) -> int:
        """Return a uniform integer in ``[0, upper)``."""
        if upper < 1:
            raise ParameterError(f"Upper bound must be positive, got {upper}", operation="RNG")
        self.position += 1
        return self._random.randrange(upper)

    def randint(self, low: int, high: int) -> int:
        """Return a uniform integer in ``[low, high]``."""
        if high < low:
            raise ParameterError(f"Empty range [{low}, {high}]", operation="RNG")
        return low + self.randbelow(high - low + 1)

    def derive(self, index: int) -> Rng:
        """Return an independent stream keyed by ``(seed, index)``.

        The derived seed does not depend on how far this stream has
        advanced, so trial ``i`` always gets the same randomness.
        """
        digest = hashlib.blake2b(f"{self.seed}:{index}".encode(), digest_size=8).digest()
        return Rng(int.from_bytes(digest, "big"))


def mod_pow(base: int, exp: int, m: int) -> int:
    """Compute ``base**exp mod m`` with the result in ``[0, m)``.

    Negative bases are floor-reduced first, so ``mod_pow(-1734, 1, 83)``
    is 9.

    Raises:
        ParameterError: If ``m < 1`` or ``exp < 0``
    """
    if m < 1:
        raise ParameterError(f"Invalid modulus {m}", operation="MOD_POW")
    if exp < 0:
        raise ParameterError(f"Exponent must be non-negative, got {exp}", operation="MOD_POW")
    return pow(base % m, exp, m)


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Extended Euclid: return ``(g, x, y)`` with ``g = a*x + b*y = gcd(a, b) >= 0``."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        quotient = old_r // r
        old_r, r = r, old_r - quotient * r
        old_x, x = x, old_x - quotient * x
        old_y, y = y, old_y - quotient * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    if old_r == 0:
        return 0, 0, 0
    return old_r, old_x, old_y


def _miller_rabin_witness(n: int, a: int, d: int, s: int) -> bool:
    """Return True when ``a`` proves ``n`` composite."""
    x = pow(a, d, n)
    if x in (1, n - 1):
        return False
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return False
    return True


def is_prime(n: int, rounds: int = VALIDATION_ROUNDS) -> bool:
    """Miller-Rabin primality test.

    Deterministic for ``n < 2**64`` (fixed witness set). Above that the
    first twelve primes are tried and the remaining rounds use bases drawn
    from a stream seeded by ``n`` itself, so the verdict never changes
    between runs.

    Args:
        n: Candidate
        rounds: Number of witnesses for large candidates

    Returns:
        True if ``n`` is (probably) prime
    """
    if n < 2:
        return False
    for small in _SMALL_PRIMES:
        if n == small:
            return True
        if n % small == 0:
            return False

    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1

    if any(_miller_rabin_witness(n, a, d, s) for a in _DETERMINISTIC_WITNESSES):
        return False
    if n.bit_length() <= 64:
        return True

    extra = random.Random(n)
    for _ in range(max(rounds - len(_DETERMINISTIC_WITNESSES), 0)):
        if _miller_rabin_witness(n, extra.randrange(2, n - 1), d, s):
            return False
    return True


def random_prime(bits: int, rng: Rng) -> int:
    """Return a random prime with exactly ``bits`` bits.

    Raises:
        ParameterError: If ``bits < 8``
    """
    if bits < 8:
        raise ParameterError(f"Prime size must be at least 8 bits, got {bits}", operation="RANDOM_PRIME")
    top = 1 << (bits - 1)
    while True:
        candidate = rng.randbits(bits) | top | 1
        if is_prime(candidate, GENERATION_ROUNDS):
            return candidate


def euler_symbol(a: int, p: int, check: bool = False) -> int:
    """Euler's criterion ``a**((p-1)/2) mod p``.

    Returns 1 for a nonzero residue, ``p - 1`` for a nonresidue and 0 when
    ``p`` divides ``a``.

    Args:
        a: Value to classify (negative values are floor-reduced)
        p: Odd prime modulus
        check: Also verify that ``p`` is prime (costly for large ``p``)

    Raises:
        ParameterError: If ``p`` is even, or composite when ``check`` is set
    """
    if p < 3 or p % 2 == 0:
        raise ParameterError(f"Modulus {p} is not an odd prime", operation="EULER")
    if check and not is_prime(p):
        raise ParameterError(f"Modulus {p} is composite", operation="EULER")
    return pow(a % p, (p - 1) // 2, p)


@dataclass(frozen=True)
class QuadExtElem:
    """Element ``u + v*sqrt(w)`` of the ring ``Z_m[sqrt(w)]``.

    Coefficients and radicand are stored reduced into ``[0, m)``. When
    ``m`` is prime and ``w`` a nonresidue this is the field ``F_{m^2}``.
    """

    u: int
    v: int
    w: int
    m: int

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ParameterError(f"Modulus must be at least 2, got {self.m}", operation="QUAD_ARITH")
        object.__setattr__(self, "u", self.u % self.m)
        object.__setattr__(self, "v", self.v % self.m)
        object.__setattr__(self, "w", self.w % self.m)

    @classmethod
    def one(cls, w: int, m: int) -> QuadExtElem:
        """Multiplicative identity of ``Z_m[sqrt(w)]``."""
        return cls(1, 0, w, m)

    @property
    def is_scalar(self) -> bool:
        """True when the sqrt(w) coefficient vanishes."""
        return self.v == 0

    def reduce(self, modulus: int) -> QuadExtElem:
        """Reduce coefficients and radicand modulo a divisor of ``m``."""
        return QuadExtElem(self.u, self.v, self.w, modulus)

    def __mul__(self, other: QuadExtElem) -> QuadExtElem:
        return quad_mul(self, other)

    def __pow__(self, exponent: int) -> QuadExtElem:
        return quad_pow(self, exponent)

    def __str__(self) -> str:
        return f"{self.u} + {self.v}*sqrt({self.w}) (mod {self.m})"


def quad_mul(x: QuadExtElem, y: QuadExtElem) -> QuadExtElem:
    """Multiply two elements of the same ring ``Z_m[sqrt(w)]``.

    Raises:
        DomainMismatchError: If ``(w, m)`` differ
    """
    if (x.w, x.m) != (y.w, y.m):
        raise DomainMismatchError((x.w, x.m), (y.w, y.m))
    m = x.m
    return QuadExtElem(
        (x.u * y.u + x.v * y.v * x.w) % m,
        (x.u * y.v + x.v * y.u) % m,
        x.w,
        m,
    )


def quad_pow(x: QuadExtElem, exponent: int) -> QuadExtElem:
    """Square-and-multiply exponentiation in ``Z_m[sqrt(w)]``."""
    if exponent < 0:
        raise ParameterError(f"Exponent must be non-negative, got {exponent}", operation="QUAD_POW")
    result = QuadExtElem.one(x.w, x.m)
    base = x
    while exponent:
        if exponent & 1:
            result = quad_mul(result, base)
        base = quad_mul(base, base)
        exponent >>= 1
    return result


def cipolla_sqrt(n: int, p: int, rng: Rng) -> int:
    """Square root modulo an odd prime by Cipolla's algorithm.

    Samples ``a`` until ``a**2 - n`` is a nonresidue, then raises
    ``a + sqrt(a**2 - n)`` to ``(p + 1) / 2`` in ``F_p(sqrt(w))``.

    Args:
        n: Quadratic residue (or 0) modulo ``p``
        p: Odd prime
        rng: Source of the ``a`` samples

    Returns:
        The smaller of the two roots ``{x, p - x}``

    Raises:
        NotAResidueError: If ``n`` is a nonresidue modulo ``p``
        NonTerminationError: If no nonresidue turns up (composite ``p``)
    """
    n %= p
    if n == 0:
        return 0
    if euler_symbol(n, p) != 1:
        raise NotAResidueError(n, p)

    max_samples = 10 * p.bit_length()
    for attempt in range(1, max_samples + 1):
        a = rng.randbelow(p)
        w = (a * a - n) % p
        if w == 0:
            continue
        if euler_symbol(w, p) == p - 1:
            logger.debug(f"Cipolla nonresidue found after {attempt} samples")
            break
    else:
        raise NonTerminationError(p, max_samples)

    root = quad_pow(QuadExtElem(a, 1, w, p), (p + 1) // 2)
    if not root.is_scalar:
        raise NotAResidueError(n, p, details="Cipolla result left the base field; the modulus is probably composite")
    return min(root.u, p - root.u)


def plant_qr(p: int, rng: Rng) -> tuple[int, int]:
    """Return ``(n, x)`` with ``x`` uniform in ``[1, p-1]`` and ``n = x**2 mod p``."""
    x = rng.randint(1, p - 1)
    return x * x % p, x
