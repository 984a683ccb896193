"""Tests for qclab.core.diophantine."""

from fractions import Fraction

import pytest

from qclab.core.diophantine import (
    Convergent,
    LatticeBasis,
    cf_convergents,
    dot,
    gram_schmidt,
    is_lll_reduced,
    lll_reduce,
    poly_derivative,
    poly_eval,
    poly_mul,
    poly_trim,
    small_integer_roots,
)
from qclab.core.errors import ParameterError, RankDeficiencyError
from qclab.core.ntcore import Rng

# Convergents of 325641678/313704683 (two K_OFFSET exponents for p = 691)
PUBLISHED_CONVERGENTS = [
    (1, 1),
    (27, 26),
    (82, 79),
    (109, 105),
    (191, 184),
    (682, 657),
    (28153, 27121),
    (28835, 27778),
    (114658, 110455),
    (4271181, 4114613),
    (34284106, 33027359),
    (72839393, 70169331),
    (325641678, 313704683),
]


def _gram_det(basis: LatticeBasis) -> Fraction:
    _, norms = gram_schmidt(basis)
    det = Fraction(1)
    for n in norms:
        det *= n
    return det


def _random_basis(rng: Rng, dim: int, bits: int) -> LatticeBasis:
    return LatticeBasis.from_rows(
        [[rng.randbits(bits) - (1 << (bits - 1)) for _ in range(dim)] for _ in range(dim)]
    )


class TestContinuedFractions:
    """Tests for cf_convergents."""

    def test_known_sequence(self):
        """The full 13-term convergent sequence, including 682/657."""
        result = cf_convergents(325641678, 313704683)
        assert [(c.h, c.l) for c in result] == PUBLISHED_CONVERGENTS

    def test_integer_input(self):
        assert cf_convergents(42, 1) == [Convergent(42, 1)]

    def test_pi_approximation(self):
        """355/113 = [3; 7, 16]."""
        assert [str(c) for c in cf_convergents(355, 113)] == ["3", "22/7", "355/113"]

    def test_zero_numerator(self):
        assert cf_convergents(0, 5) == [Convergent(0, 1)]

    def test_last_convergent_is_the_fraction(self):
        result = cf_convergents(1234567, 7654321)
        assert result[-1].value == Fraction(1234567, 7654321)

    def test_convergents_in_lowest_terms(self):
        for c in cf_convergents(325641678, 313704683):
            assert Fraction(c.h, c.l).denominator == c.l

    def test_zero_denominator(self):
        with pytest.raises(ParameterError):
            cf_convergents(5, 0)

    def test_negative_numerator(self):
        with pytest.raises(ParameterError):
            cf_convergents(-5, 3)


class TestLatticeBasis:
    """Tests for LatticeBasis validation."""

    def test_dimensions(self):
        basis = LatticeBasis.from_rows([[1, 2, 3], [4, 5, 6]])
        assert basis.dim == 2
        assert basis.length == 3
        assert basis.to_lists() == [[1, 2, 3], [4, 5, 6]]

    def test_empty(self):
        with pytest.raises(ParameterError):
            LatticeBasis(())

    def test_ragged(self):
        with pytest.raises(ParameterError):
            LatticeBasis.from_rows([[1, 2], [3]])


class TestLLL:
    """Tests for exact LLL reduction."""

    def test_identity_unchanged(self):
        identity = LatticeBasis.from_rows([[1 if i == j else 0 for j in range(4)] for i in range(4)])
        assert lll_reduce(identity) == identity

    def test_two_dimensional(self):
        """{(4, 1), (5, 1)} spans Z^2, so a vector of norm^2 <= 2 appears."""
        reduced = lll_reduce(LatticeBasis.from_rows([[4, 1], [5, 1]]))
        assert min(dot(r, r) for r in reduced.rows) <= 2
        assert is_lll_reduced(reduced)

    def test_hermite_bound(self):
        """||b1||^(2n) <= 2^(n(n-1)/2) * det(L)^2 for a Coppersmith-shaped basis."""
        basis = LatticeBasis.from_rows([[1, 0, 2**100], [0, 1, 2**100 + 3]])
        reduced = lll_reduce(basis)
        n = reduced.dim
        first = dot(reduced.rows[0], reduced.rows[0])
        assert first**n <= 2 ** (n * (n - 1) // 2) * _gram_det(basis)

    def test_preserves_lattice_volume(self, rng):
        basis = _random_basis(rng, 5, 64)
        assert _gram_det(lll_reduce(basis)) == _gram_det(basis)

    def test_dependent_rows(self):
        with pytest.raises(RankDeficiencyError):
            lll_reduce(LatticeBasis.from_rows([[1, 2, 3], [2, 4, 6], [0, 0, 1]]))

    def test_zero_first_row(self):
        with pytest.raises(RankDeficiencyError):
            lll_reduce(LatticeBasis.from_rows([[0, 0], [1, 1]]))

    @pytest.mark.parametrize("delta", [Fraction(1, 4), Fraction(1), Fraction(3, 2)])
    def test_delta_out_of_range(self, delta):
        with pytest.raises(ParameterError):
            lll_reduce(LatticeBasis.from_rows([[1, 0], [0, 1]]), delta)

    def test_high_delta(self, rng):
        reduced = lll_reduce(_random_basis(rng, 6, 40), Fraction(99, 100))
        assert is_lll_reduced(reduced, Fraction(99, 100))

    def test_random_bases(self, rng):
        """Size reduction and the Lovasz condition hold on random bases."""
        for i in range(40):
            basis = _random_basis(rng, 2 + i % 5, 32 + 8 * (i % 4))
            assert is_lll_reduced(lll_reduce(basis))

    @pytest.mark.slow
    def test_five_hundred_random_bases(self):
        """500 random bases, dim <= 8, entries up to 2^256."""
        rng = Rng(500)
        for i in range(500):
            basis = _random_basis(rng, 2 + i % 7, 16 + (i * 37) % 241)
            try:
                reduced = lll_reduce(basis)
            except RankDeficiencyError:
                continue
            assert is_lll_reduced(reduced)


class TestIsLLLReduced:
    """Tests for the exact reducedness check."""

    def test_unreduced_basis(self):
        assert not is_lll_reduced(LatticeBasis.from_rows([[4, 1], [5, 1]]))

    def test_reduced_basis(self):
        assert is_lll_reduced(LatticeBasis.from_rows([[1, 0], [0, 1]]))


class TestPolynomials:
    """Tests for the coefficient-list helpers."""

    def test_trim(self):
        assert poly_trim([1, 2, 0, 0]) == [1, 2]
        assert poly_trim([0, 0]) == []

    def test_mul(self):
        """(x - 1)(x + 1) = x^2 - 1."""
        assert poly_mul([-1, 1], [1, 1]) == [-1, 0, 1]
        assert poly_mul([], [1, 1]) == []

    def test_eval(self):
        assert poly_eval([1, -3, 2], 5) == 1 - 15 + 50

    def test_derivative(self):
        assert poly_derivative([7, 1, 3, 2]) == [1, 6, 6]
        assert poly_derivative([7]) == []


class TestSmallIntegerRoots:
    """Tests for exact integer root finding."""

    def test_linear_offset_polynomial(self):
        """x + d' + (1 - p')/2 with d' = 28, p' = 8051 is x - 3997."""
        assert small_integer_roots([-3997, 1], 10**6) == [3997]

    def test_monomial(self):
        assert small_integer_roots([0, 1], 5) == [0]

    def test_no_real_roots(self):
        assert small_integer_roots([1, 0, 1], 10**9) == []

    def test_cubic(self):
        """(x - 3)(x + 5)(x - 7)."""
        poly = poly_mul(poly_mul([-3, 1], [5, 1]), [-7, 1])
        assert small_integer_roots(poly, 10) == [-5, 3, 7]
        assert small_integer_roots(poly, 6) == [-5, 3]

    def test_double_root(self):
        assert small_integer_roots(poly_mul([-2, 1], [-2, 1]), 100) == [2]

    def test_rational_root_skipped(self):
        """2x - 1 has no integer root."""
        assert small_integer_roots([-1, 2], 100) == []

    def test_huge_roots(self):
        poly = poly_mul([-(2**80), 1], [12345, 1])
        assert small_integer_roots(poly, 2**81) == [-12345, 2**80]

    def test_close_roots(self):
        """Adjacent integer roots are both reported."""
        poly = poly_mul(poly_mul([-10, 1], [-11, 1]), [1, 0, 1])
        assert small_integer_roots(poly, 1000) == [10, 11]

    def test_zero_polynomial(self):
        with pytest.raises(ParameterError):
            small_integer_roots([0, 0], 10)

    def test_bound_must_be_positive(self):
        with pytest.raises(ParameterError):
            small_integer_roots([1, 1], 0)
