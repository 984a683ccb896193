"""Tests for qclab.core.ntcore."""

import pytest

from qclab.core.errors import DomainMismatchError, NonTerminationError, NotAResidueError, ParameterError
from qclab.core.ntcore import (
    QuadExtElem,
    Rng,
    cipolla_sqrt,
    euler_symbol,
    ext_gcd,
    is_prime,
    mod_pow,
    plant_qr,
    quad_mul,
    quad_pow,
    random_prime,
)


def _small_primes(limit: int) -> list[int]:
    sieve = [True] * limit
    sieve[0] = sieve[1] = False
    for i in range(2, int(limit**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = [False] * len(sieve[i * i :: i])
    return [i for i, flag in enumerate(sieve) if flag]


class TestRng:
    """Tests for the seeded random stream."""

    def test_same_seed_same_sequence(self):
        """Two streams with one seed agree draw for draw."""
        a, b = Rng(5), Rng(5)
        assert [a.randbits(64) for _ in range(10)] == [b.randbits(64) for _ in range(10)]

    def test_position_counts_draws(self):
        """Every draw advances the position counter."""
        rng = Rng(1)
        rng.randbits(8)
        rng.randbelow(10)
        rng.randint(3, 4)
        assert rng.position == 3

    def test_randint_is_inclusive(self):
        """randint covers both endpoints."""
        rng = Rng(2)
        values = {rng.randint(0, 1) for _ in range(200)}
        assert values == {0, 1}

    def test_derive_ignores_parent_position(self):
        """A derived stream depends only on (seed, index)."""
        fresh = Rng(9)
        used = Rng(9)
        used.randbits(128)
        assert fresh.derive(3).randbits(64) == used.derive(3).randbits(64)

    def test_derived_streams_differ(self):
        """Different indices give different streams."""
        rng = Rng(9)
        assert rng.derive(0).randbits(64) != rng.derive(1).randbits(64)

    @pytest.mark.parametrize("seed", [-1, 1 << 64])
    def test_seed_must_fit_64_bits(self, seed):
        """Seeds outside the unsigned 64-bit range are rejected."""
        with pytest.raises(ParameterError):
            Rng(seed)

    def test_randbelow_rejects_empty_range(self):
        with pytest.raises(ParameterError):
            Rng(0).randbelow(0)


class TestModPow:
    """Tests for mod_pow."""

    def test_zero_exponent(self):
        """Empty product is 1."""
        assert mod_pow(12345, 0, 97) == 1

    def test_worked_example_round_one(self):
        """(a^2 - n')^d' mod p' of the worked example."""
        assert mod_pow(11190759, 28, 8051) == 3927

    def test_negative_base_is_floor_reduced(self):
        """-1734 mod 83 is 9."""
        assert mod_pow(-1734, 1, 83) == 9

    def test_gcd_oracle(self):
        """2^12054 - 1 shares exactly the factor 83 with 8051."""
        value = mod_pow(2, 12054, 8051)
        assert ext_gcd(value - 1, 8051)[0] == 83

    def test_modulus_one(self):
        assert mod_pow(5, 3, 1) == 0

    def test_exponent_additivity(self):
        """b^(e1+e2) = b^e1 * b^e2 mod m."""
        rng = Rng(88)
        for _ in range(500):
            m = rng.randint(2, 1 << 128)
            b = rng.randbelow(m)
            e1, e2 = rng.randbits(96), rng.randbits(96)
            assert mod_pow(b, e1 + e2, m) == mod_pow(b, e1, m) * mod_pow(b, e2, m) % m

    def test_invalid_modulus(self):
        """m = 0 is an invalid modulus."""
        with pytest.raises(ParameterError):
            mod_pow(2, 3, 0)

    def test_negative_exponent(self):
        with pytest.raises(ParameterError):
            mod_pow(2, -1, 7)


class TestExtGcd:
    """Tests for the extended Euclidean algorithm."""

    def test_degenerate(self):
        assert ext_gcd(0, 0) == (0, 0, 0)

    def test_shared_factor(self):
        """12054 = 82*147 and 1722 = 82*21 share 1722."""
        g, x, y = ext_gcd(12054, 1722)
        assert g == 1722
        assert 12054 * x + 1722 * y == g

    @pytest.mark.parametrize("a", [17, -17])
    def test_identity(self, a):
        """gcd(a, a) = |a|."""
        g, x, y = ext_gcd(a, a)
        assert g == 17
        assert a * x + a * y == g

    @pytest.mark.parametrize("a,b", [(240, 46), (-240, 46), (0, 9), (9, 0), (2**127 - 1, 2**89 - 1)])
    def test_bezout(self, a, b):
        """The returned coefficients satisfy Bezout's identity with g >= 0."""
        g, x, y = ext_gcd(a, b)
        assert g >= 0
        assert a * x + b * y == g


class TestIsPrime:
    """Tests for Miller-Rabin."""

    @pytest.mark.parametrize("n,expected", [(83, True), (8051, False), (1, False), (0, False), (2, True), (97, True)])
    def test_known_values(self, n, expected):
        assert is_prime(n) is expected

    def test_agrees_with_sieve(self):
        """Exact below 10^4."""
        primes = set(_small_primes(10_000))
        assert all(is_prime(n) == (n in primes) for n in range(10_000))

    def test_strong_pseudoprimes(self):
        """Carmichael numbers and base-2 strong pseudoprimes are rejected."""
        for n in (561, 2047, 3215031751, 3825123056546413051):
            assert not is_prime(n)

    def test_large_prime(self):
        """The Mersenne prime 2^127 - 1."""
        assert is_prime(2**127 - 1)
        assert not is_prime((2**127 - 1) * (2**61 - 1))


class TestRandomPrime:
    """Tests for prime generation."""

    def test_eight_bits(self):
        """The top bit is forced, so an 8-bit prime lies in [128, 255]."""
        p = random_prime(8, Rng(3))
        assert 128 <= p <= 255
        assert is_prime(p)

    def test_exact_bit_length(self):
        p = random_prime(512, Rng(4))
        assert p.bit_length() == 512
        assert is_prime(p)

    def test_deterministic(self):
        assert random_prime(64, Rng(11)) == random_prime(64, Rng(11))

    def test_too_small(self):
        """bits < 8 is a parameter error."""
        with pytest.raises(ParameterError):
            random_prime(7, Rng(0))


class TestEulerSymbol:
    """Tests for Euler's criterion."""

    def test_square(self):
        assert euler_symbol(9, 83) == 1

    def test_nonresidue(self):
        """35 is a nonresidue modulo 83."""
        assert euler_symbol(35, 83) == 82

    def test_zero(self):
        assert euler_symbol(0, 83) == 0
        assert euler_symbol(166, 83) == 0

    def test_even_modulus(self):
        with pytest.raises(ParameterError):
            euler_symbol(3, 8)

    def test_composite_modulus_checked(self):
        with pytest.raises(ParameterError):
            euler_symbol(3, 8051, check=True)

    def test_brute_force_small_primes(self):
        """Matches the set of squares for every odd prime below 2^10."""
        for p in _small_primes(1 << 10)[1:]:
            squares = {x * x % p for x in range(1, p)}
            for a in range(p):
                expected = 0 if a == 0 else (1 if a in squares else p - 1)
                assert euler_symbol(a, p) == expected, (a, p)


class TestQuadExtElem:
    """Tests for arithmetic in Z_m[sqrt(w)]."""

    def test_normalizes_on_construction(self):
        elem = QuadExtElem(-1, 84, 118, 83)
        assert (elem.u, elem.v, elem.w) == (82, 1, 35)

    def test_identity(self, toy_x):
        """x * 1 = x."""
        assert quad_mul(toy_x, QuadExtElem.one(35, 83)) == toy_x

    def test_worked_example_square(self, toy_x):
        """(31 + 34*sqrt(35))^2 = 4 + 33*sqrt(35) mod 83."""
        assert toy_x * toy_x == QuadExtElem(4, 33, 35, 83)

    def test_defining_relation(self):
        """(sqrt(w))^2 = w."""
        root = QuadExtElem(0, 1, 35, 83)
        assert quad_mul(root, root) == QuadExtElem(35, 0, 35, 83)

    def test_domain_mismatch(self):
        with pytest.raises(DomainMismatchError):
            quad_mul(QuadExtElem(1, 1, 35, 83), QuadExtElem(1, 1, 3, 83))
        with pytest.raises(DomainMismatchError):
            quad_mul(QuadExtElem(1, 1, 35, 83), QuadExtElem(1, 1, 35, 97))

    def test_commutative(self):
        x, y = QuadExtElem(5, 7, 35, 83), QuadExtElem(11, 2, 35, 83)
        assert x * y == y * x

    @pytest.mark.parametrize("m", [83, 8051, (1 << 61) - 1])
    def test_commutative_and_associative(self, m):
        """10^4 random triples sharing w."""
        rng = Rng(m)
        for _ in range(10_000):
            w = rng.randbelow(m)
            x, y, z = (QuadExtElem(rng.randbelow(m), rng.randbelow(m), w, m) for _ in range(3))
            assert quad_mul(x, y) == quad_mul(y, x)
            assert quad_mul(quad_mul(x, y), z) == quad_mul(x, quad_mul(y, z))

    def test_reduce(self):
        """Reducing the round-two value of the worked example modulo 83."""
        assert QuadExtElem(5592, 3935, 7920, 8051).reduce(83) == QuadExtElem(31, 34, 35, 83)

    def test_modulus_too_small(self):
        with pytest.raises(ParameterError):
            QuadExtElem(1, 1, 1, 1)


class TestQuadPow:
    """Tests for square-and-multiply in Z_m[sqrt(w)]."""

    def test_worked_example_round_two(self):
        """(3345 + sqrt(11190759))^6028 mod 8051."""
        base = QuadExtElem(3345, 1, 11190759, 8051)
        assert quad_pow(base, 6028) == QuadExtElem(5592, 3935, 7920, 8051)

    def test_zero_exponent(self, toy_x):
        assert quad_pow(toy_x, 0) == QuadExtElem.one(35, 83)

    def test_first_power(self, toy_x):
        assert quad_pow(toy_x, 1) == toy_x

    def test_matches_repeated_multiplication(self, toy_x):
        acc = QuadExtElem.one(35, 83)
        for e in range(20):
            assert quad_pow(toy_x, e) == acc
            acc = acc * toy_x

    def test_field_order(self):
        """In F_{83^2} every unit raised to 83^2 - 1 is 1."""
        assert quad_pow(QuadExtElem(31, 34, 35, 83), 83 * 83 - 1) == QuadExtElem.one(35, 83)

    def test_negative_exponent(self, toy_x):
        with pytest.raises(ParameterError):
            quad_pow(toy_x, -1)


class TestCipollaSqrt:
    """Tests for Cipolla's square root."""

    def test_smaller_root(self, rng):
        assert cipolla_sqrt(9, 83, rng) == 3

    def test_brute_force_oracle(self, rng):
        """Roots of 2 mod 7 are {3, 4}."""
        assert cipolla_sqrt(2, 7, rng) == 3

    def test_zero(self, rng):
        assert cipolla_sqrt(0, 83, rng) == 0
        assert cipolla_sqrt(83, 83, rng) == 0

    def test_nonresidue(self, rng):
        with pytest.raises(NotAResidueError):
            cipolla_sqrt(35, 83, rng)

    def test_composite_modulus_guard(self, rng):
        """A composite modulus is reported instead of returning a bogus root."""
        with pytest.raises((NonTerminationError, NotAResidueError)):
            cipolla_sqrt(4, 8051, rng)

    def test_planted_instances(self, rng):
        """Roots of planted 64-bit instances square back."""
        for _ in range(300):
            p = random_prime(64, rng)
            n, _ = plant_qr(p, rng)
            x = cipolla_sqrt(n, p, rng)
            assert x * x % p == n
            assert x <= p - x

    @pytest.mark.slow
    def test_ten_thousand_planted_instances(self):
        """Root validity on 10^4 planted instances."""
        rng = Rng(77)
        p = random_prime(128, rng)
        for i in range(10_000):
            if i % 100 == 0:
                p = random_prime(128, rng)
            n, _ = plant_qr(p, rng)
            x = cipolla_sqrt(n, p, rng)
            assert x * x % p == n


class TestPlantQr:
    """Tests for planted residues."""

    def test_contract(self, rng):
        n, x = plant_qr(83, rng)
        assert 1 <= x <= 82
        assert x * x % 83 == n

    def test_deterministic(self):
        assert plant_qr(83, Rng(8)) == plant_qr(83, Rng(8))
