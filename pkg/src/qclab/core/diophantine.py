"""Exact lattice reduction, continued fractions and integer root finding.

LLL here is the fraction-free integral variant: the Gram-Schmidt data is
kept as integer subdeterminants ``D[i]`` and scaled coefficients
``lam[i][j] = D[j+1] * mu[i][j]``, so entries of thousands of bits are
reduced with no rounding error at all.

Polynomials are plain coefficient lists, lowest degree first.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

from qclab.core.errors import ParameterError, RankDeficiencyError

logger = logging.getLogger(__name__)

DEFAULT_DELTA = Fraction(3, 4)


@dataclass(frozen=True)
class Convergent:
    """Continued-fraction convergent ``h / l`` in lowest terms."""

    h: int
    l: int  # noqa: E741

    @property
    def value(self) -> Fraction:
        return Fraction(self.h, self.l)

    def __str__(self) -> str:
        return str(self.h) if self.l == 1 else f"{self.h}/{self.l}"


@dataclass(frozen=True)
class LatticeBasis:
    """Integer lattice basis stored row-wise."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(tuple(int(v) for v in row) for row in self.rows))
        if not self.rows:
            raise ParameterError("Lattice basis needs at least one row", operation="LLL")
        if len({len(row) for row in self.rows}) != 1:
            raise ParameterError("Lattice basis rows must have equal length", operation="LLL")

    @classmethod
    def from_rows(cls, rows: list[list[int]]) -> LatticeBasis:
        return cls(tuple(tuple(row) for row in rows))

    @property
    def dim(self) -> int:
        """Number of basis vectors."""
        return len(self.rows)

    @property
    def length(self) -> int:
        """Length of each basis vector."""
        return len(self.rows[0])

    def to_lists(self) -> list[list[int]]:
        return [list(row) for row in self.rows]


def cf_convergents(num: int, den: int) -> list[Convergent]:
    """Full convergent sequence of ``num / den``.

    Example:
        >>> [str(c) for c in cf_convergents(355, 113)]
        ['3', '22/7', '355/113']

    Raises:
        ParameterError: If ``den < 1`` or ``num < 0``
    """
    if den < 1:
        raise ParameterError(f"Denominator must be positive, got {den}", operation="CONTINUED_FRACTION")
    if num < 0:
        raise ParameterError(f"Numerator must be non-negative, got {num}", operation="CONTINUED_FRACTION")

    convergents: list[Convergent] = []
    h_prev, h = 0, 1
    l_prev, l = 1, 0  # noqa: E741
    while den:
        quotient, remainder = divmod(num, den)
        h_prev, h = h, quotient * h + h_prev
        l_prev, l = l, quotient * l + l_prev  # noqa: E741
        convergents.append(Convergent(h, l))
        num, den = den, remainder
    return convergents


def dot(a: tuple[int, ...] | list[int], b: tuple[int, ...] | list[int]) -> int:
    return sum(x * y for x, y in zip(a, b, strict=True))


def lll_reduce(basis: LatticeBasis, delta: Fraction = DEFAULT_DELTA) -> LatticeBasis:
    """LLL-reduce a basis with exact integer arithmetic.

    Args:
        basis: Linearly independent rows
        delta: Lovasz parameter in (1/4, 1)

    Returns:
        A size-reduced basis of the same lattice satisfying the Lovasz
        condition for ``delta``

    Raises:
        ParameterError: If ``delta`` is out of range
        RankDeficiencyError: If the rows are linearly dependent
    """
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta < 1:
        raise ParameterError(f"delta must lie in (1/4, 1), got {delta}", operation="LLL")
    a, b = delta.numerator, delta.denominator

    rows = basis.to_lists()
    n = len(rows)
    # d[i] = Gram determinant of rows[0..i-1]; lam[i][j] = d[j+1] * mu[i][j]
    d = [0] * (n + 1)
    d[0] = 1
    d[1] = dot(rows[0], rows[0])
    if d[1] == 0:
        raise RankDeficiencyError(0, details="zero vector")
    lam = [[0] * n for _ in range(n)]

    def reduce_pair(k: int, j: int) -> None:
        if 2 * abs(lam[k][j]) > d[j + 1]:
            q = (2 * lam[k][j] + d[j + 1]) // (2 * d[j + 1])
            rows[k] = [x - q * y for x, y in zip(rows[k], rows[j], strict=True)]
            lam[k][j] -= q * d[j + 1]
            for i in range(j):
                lam[k][i] -= q * lam[j][i]

    def swap(k: int, kmax: int) -> None:
        rows[k], rows[k - 1] = rows[k - 1], rows[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        mu = lam[k][k - 1]
        new_d = (d[k - 1] * d[k + 1] + mu * mu) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - mu * t) // d[k]
            lam[i][k - 1] = (new_d * t + mu * lam[i][k]) // d[k + 1]
        d[k] = new_d

    k, kmax, swaps = 1, 0, 0
    while k < n:
        if k > kmax:
            kmax = k
            for j in range(k + 1):
                u = dot(rows[k], rows[j])
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                else:
                    d[k + 1] = u
            if d[k + 1] == 0:
                raise RankDeficiencyError(k)

        reduce_pair(k, k - 1)
        if b * (d[k + 1] * d[k - 1] + lam[k][k - 1] ** 2) < a * d[k] ** 2:
            swap(k, kmax)
            swaps += 1
            k = max(1, k - 1)
        else:
            for j in range(k - 2, -1, -1):
                reduce_pair(k, j)
            k += 1

    logger.debug(f"LLL finished: dim={n}, swaps={swaps}")
    return LatticeBasis.from_rows(rows)


def gram_schmidt(basis: LatticeBasis) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Exact rational Gram-Schmidt data.

    Returns:
        Tuple of (mu, squared norms of the orthogonalized vectors)
    """
    n = basis.dim
    ortho: list[list[Fraction]] = []
    norms: list[Fraction] = []
    mu = [[Fraction(0)] * n for _ in range(n)]
    for i, row in enumerate(basis.rows):
        v = [Fraction(x) for x in row]
        for j in range(i):
            if norms[j] == 0:
                raise RankDeficiencyError(j)
            mu[i][j] = sum((x * y for x, y in zip(row, ortho[j], strict=True)), Fraction(0)) / norms[j]
            v = [x - mu[i][j] * y for x, y in zip(v, ortho[j], strict=True)]
        ortho.append(v)
        norms.append(sum((x * x for x in v), Fraction(0)))
    return mu, norms


def is_lll_reduced(basis: LatticeBasis, delta: Fraction = DEFAULT_DELTA) -> bool:
    """Check size reduction and the Lovasz condition exactly."""
    mu, norms = gram_schmidt(basis)
    for i in range(basis.dim):
        if any(abs(mu[i][j]) > Fraction(1, 2) for j in range(i)):
            return False
        if i and (Fraction(delta) - mu[i][i - 1] ** 2) * norms[i - 1] > norms[i]:
            return False
    return True


def poly_trim(poly: list[int]) -> list[int]:
    """Drop vanishing leading coefficients."""
    trimmed = list(poly)
    while trimmed and trimmed[-1] == 0:
        trimmed.pop()
    return trimmed


def poly_mul(f: list[int], g: list[int]) -> list[int]:
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, x in enumerate(f):
        if x:
            for j, y in enumerate(g):
                out[i + j] += x * y
    return out


def poly_eval(poly: list[int], x: int) -> int:
    """Horner evaluation."""
    acc = 0
    for coeff in reversed(poly):
        acc = acc * x + coeff
    return acc


def poly_derivative(poly: list[int]) -> list[int]:
    return [i * c for i, c in enumerate(poly)][1:]


def _sign(value: int) -> int:
    return (value > 0) - (value < 0)


def _root_brackets(poly: list[int], lo: int, hi: int) -> set[int]:
    """Integers ``c`` such that every real root in ``[lo, hi]`` lies in some ``[c, c+1]``.

    Recurses on the derivative: between the derivative's brackets the
    polynomial is strictly monotone, so a single sign-change bisection
    per piece finds its only root.
    """
    if len(poly) <= 1:
        return set()

    critical = _root_brackets(poly_derivative(poly), lo, hi)
    brackets = {c for c in critical if lo - 1 <= c <= hi}
    points = {lo, hi}
    for c in critical:
        points.update(x for x in (c, c + 1) if lo <= x <= hi)
    ordered = sorted(points)

    for left, right in zip(ordered, ordered[1:], strict=False):
        if right - left == 1 and left in critical:
            continue
        f_left, f_right = poly_eval(poly, left), poly_eval(poly, right)
        if f_left == 0:
            brackets.add(left)
        elif f_right == 0:
            brackets.add(right)
        elif _sign(f_left) != _sign(f_right):
            while right - left > 1:
                mid = (left + right) // 2
                if _sign(poly_eval(poly, mid)) == _sign(f_left):
                    left = mid
                else:
                    right = mid
            brackets.add(left)
    return brackets


def small_integer_roots(poly: list[int], bound: int) -> list[int]:
    """All integers ``r`` with ``|r| <= bound`` and ``poly(r) = 0``.

    Args:
        poly: Integer coefficients, lowest degree first
        bound: Search radius X

    Returns:
        Sorted, deduplicated list of roots

    Raises:
        ParameterError: If ``poly`` is identically zero or ``bound < 1``
    """
    poly = poly_trim(poly)
    if not poly:
        raise ParameterError("Cannot search roots of the zero polynomial", operation="ROOTS")
    if bound < 1:
        raise ParameterError(f"Root bound must be positive, got {bound}", operation="ROOTS")

    roots = set()
    for c in _root_brackets(poly, -bound, bound):
        roots.update(x for x in (c, c + 1) if -bound <= x <= bound and poly_eval(poly, x) == 0)
    return sorted(roots)
