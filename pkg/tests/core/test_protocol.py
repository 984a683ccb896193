"""Tests for qclab.core.protocol."""

import pytest

from qclab.core.errors import ParameterError, ProtocolFailureError
from qclab.core.ntcore import QuadExtElem, Rng, mod_pow
from qclab.core.protocol import (
    BlindedQuery,
    BlindingOverrides,
    BlindingSecrets,
    Outcome,
    OutcomeKind,
    ProblemInstance,
    Transcript,
    Variant,
    Verdict,
    blind,
    client_check_round1,
    client_recover,
    honest_run,
    second_exponent,
    server_round1,
    server_round2,
)


class TestProblemInstance:
    """Tests for planted instances."""

    def test_plant(self, rng):
        inst = ProblemInstance.plant(64, rng)
        assert inst.p.bit_length() == 64
        assert inst.known_root * inst.known_root % inst.p == inst.n
        inst.validate()

    def test_validate_composite(self):
        with pytest.raises(ParameterError):
            ProblemInstance(p=8051, n=4).validate()

    def test_validate_nonresidue(self):
        with pytest.raises(ParameterError):
            ProblemInstance(p=83, n=35).validate()


class TestBlind:
    """Tests for building the blinded query."""

    def test_worked_example(self, toy_query):
        assert toy_query == BlindedQuery(n_b=-1734, d_b=28, d2_b=6028, p_b=8051)

    def test_corrected_exponent(self, toy_instance, toy_overrides, rng):
        """42 + 73 * (83^2 - 1)."""
        _, query = blind(toy_instance, rng, Variant.CORRECTED, overrides=toy_overrides)
        assert query.d2_b == 502866

    def test_offset_exponent(self):
        """p = 691, r2 = 682, k1 = 28."""
        assert second_exponent(691, 682, Variant.K_OFFSET, 28) == 325641678
        assert second_exponent(691, 657, Variant.K_OFFSET, 23) == 313704683

    def test_offset_needs_k1(self):
        with pytest.raises(ParameterError):
            second_exponent(691, 682, Variant.K_OFFSET)

    def test_sampled_secrets_in_range(self, planted_64, rng):
        secrets, query = blind(planted_64, rng, Variant.K_OFFSET, k_bits=40, k1_max=100)
        p = planted_64.p
        assert secrets.q != p
        assert secrets.q.bit_length() == 64
        assert 0 <= secrets.r1 < p
        assert 0 <= secrets.r2 < p
        assert secrets.k.bit_length() == 40
        assert 0 <= secrets.k1 <= 100
        assert query.p_b == p * secrets.q
        assert query.n_b % p == planted_64.n
        assert query.d_b == (p - 1) // 2 - secrets.k

    @pytest.mark.parametrize("variant", [Variant.ORIGINAL, Variant.CORRECTED])
    def test_second_exponent_multiple_of_p_minus_one(self, variant):
        rng = Rng(17)
        for _ in range(50):
            inst = ProblemInstance.plant(64, rng)
            _, query = blind(inst, rng, variant, k_bits=40)
            assert (2 * query.d2_b - 2) % (inst.p - 1) == 0

    def test_q_bits(self, planted_64, rng):
        secrets, _ = blind(planted_64, rng, k_bits=40, q_bits=80)
        assert secrets.q.bit_length() == 80

    def test_k_bits_too_large(self, planted_64, rng):
        """k must stay below (p - 1)/2."""
        with pytest.raises(ParameterError):
            blind(planted_64, rng, k_bits=63)

    def test_k_bits_zero(self, planted_64, rng):
        secrets, query = blind(planted_64, rng, k_bits=0)
        assert secrets.k == 0
        assert query.d_b == (planted_64.p - 1) // 2

    def test_deterministic(self, planted_64):
        assert blind(planted_64, Rng(1), k_bits=40) == blind(planted_64, Rng(1), k_bits=40)


class TestServerRoundOne:
    """Tests for the first server exponentiation."""

    def test_worked_example(self, toy_query):
        assert server_round1(toy_query, 3345) == 3927

    def test_zero_exponent(self):
        query = BlindedQuery(n_b=-1734, d_b=0, d2_b=6028, p_b=8051)
        assert server_round1(query, 3345) == 1

    def test_zero_a(self, toy_query):
        assert server_round1(toy_query, 0) == mod_pow(1734, 28, 8051)


class TestClientCheck:
    """Tests for the client's round-one verdict."""

    def test_worked_example_accepts(self, toy_instance, toy_secrets, toy_query):
        assert client_check_round1(toy_instance, toy_secrets, toy_query, 3345, 3927) == Verdict.Y

    def test_tampered_value_rejected(self, toy_instance, toy_secrets, toy_query):
        assert client_check_round1(toy_instance, toy_secrets, toy_query, 3345, 3928) == Verdict.N

    def test_a_squared_equals_n_rejected(self, toy_instance, toy_secrets, toy_query):
        """w = 0 gives 0, never -1."""
        r1_b = server_round1(toy_query, 3)
        assert client_check_round1(toy_instance, toy_secrets, toy_query, 3, r1_b) == Verdict.N


class TestServerRoundTwo:
    """Tests for the second server exponentiation."""

    def test_worked_example(self, toy_query):
        assert server_round2(toy_query, 3345) == QuadExtElem(5592, 3935, 7920, 8051)

    def test_zero_exponent(self):
        query = BlindedQuery(n_b=-1734, d_b=28, d2_b=0, p_b=8051)
        assert server_round2(query, 3345) == QuadExtElem.one(7920, 8051)

    def test_first_power(self):
        query = BlindedQuery(n_b=-1734, d_b=28, d2_b=1, p_b=8051)
        assert server_round2(query, 3345) == QuadExtElem(3345, 1, 7920, 8051)


class TestClientRecover:
    """Tests for the client's final reduction."""

    def test_worked_example_not_an_integer(self, toy_instance, toy_secrets):
        outcome = client_recover(toy_instance, toy_secrets, QuadExtElem(5592, 3935, 7920, 8051))
        assert outcome == Outcome(OutcomeKind.NON_INTEGER, u=31, v=34, w=35)

    def test_check_failed(self, toy_instance, toy_secrets):
        outcome = client_recover(toy_instance, toy_secrets, QuadExtElem.one(7920, 8051))
        assert outcome.kind == OutcomeKind.CHECK_FAILED

    def test_root(self, toy_instance, toy_secrets):
        outcome = client_recover(toy_instance, toy_secrets, QuadExtElem(80, 0, 7920, 8051))
        assert outcome == Outcome(OutcomeKind.ROOT, x=80)
        assert outcome.is_root


class TestHonestRun:
    """Tests for full sessions."""

    def test_worked_example(self, toy_instance, toy_overrides, rng):
        transcript = honest_run(toy_instance, rng, Variant.ORIGINAL, overrides=toy_overrides)
        assert [r.to_dict() for r in transcript.rounds] == [{"a": "3345", "R1_b": "3927", "verdict": "Y"}]
        assert transcript.r2_b == QuadExtElem(5592, 3935, 7920, 8051)
        assert transcript.outcome.kind == OutcomeKind.NON_INTEGER

    def test_worked_example_corrected(self, toy_instance, toy_overrides, rng):
        """The corrected exponent returns a root of 9 for the same secrets."""
        transcript = honest_run(toy_instance, rng, Variant.CORRECTED, overrides=toy_overrides)
        assert transcript.outcome.is_root
        assert transcript.outcome.x in (3, 80)

    def test_corrected_always_roots(self):
        """100 random 64-bit sessions with the corrected exponent."""
        rng = Rng(64)
        for _ in range(100):
            inst = ProblemInstance.plant(64, rng)
            outcome = honest_run(inst, rng, Variant.CORRECTED, k_bits=40).outcome
            assert outcome.is_root
            assert outcome.x * outcome.x % inst.p == inst.n
            assert outcome.x in (inst.known_root, inst.p - inst.known_root)

    @pytest.mark.parametrize("variant", [Variant.ORIGINAL, Variant.CORRECTED, Variant.K_OFFSET])
    def test_accepted_round_is_a_nonresidue(self, variant):
        """The round-one check is Euler's criterion on w = a^2 - n'."""
        rng = Rng(66)
        for _ in range(30):
            inst = ProblemInstance.plant(64, rng)
            transcript = honest_run(inst, rng, variant, k_bits=40)
            w = transcript.accepted_round.a ** 2 - transcript.query.n_b
            assert mod_pow(w, (inst.p - 1) // 2, inst.p) == inst.p - 1

    def test_original_rarely_roots(self):
        rng = Rng(65)
        roots = 0
        for _ in range(100):
            inst = ProblemInstance.plant(64, rng)
            roots += honest_run(inst, rng, Variant.ORIGINAL, k_bits=40).outcome.is_root
        assert roots < 10

    def test_only_last_round_accepted(self, planted_64, rng):
        transcript = honest_run(planted_64, rng, Variant.CORRECTED, k_bits=40)
        assert transcript.rounds[-1].verdict == Verdict.Y
        assert all(r.verdict == Verdict.N for r in transcript.rounds[:-1])
        assert transcript.accepted_round == transcript.rounds[-1]

    def test_deterministic(self, planted_64):
        first = honest_run(planted_64, Rng(3), Variant.CORRECTED, k_bits=40)
        second = honest_run(planted_64, Rng(3), Variant.CORRECTED, k_bits=40)
        assert first.to_dict() == second.to_dict()

    def test_round_cap(self, toy_instance, rng):
        """A session whose a always has a^2 = n mod p is never accepted."""
        overrides = BlindingOverrides(q=97, r1=21, r2=73, k=13, a_values=(3,) * 1000)
        with pytest.raises(ProtocolFailureError):
            honest_run(toy_instance, rng, Variant.ORIGINAL, overrides=overrides)


class TestTranscriptSerialization:
    """Tests for the JSON form of transcripts."""

    def test_integers_are_strings(self, toy_instance, toy_overrides, rng):
        data = honest_run(toy_instance, rng, Variant.ORIGINAL, overrides=toy_overrides).to_dict()
        assert data["n_b"] == "-1734"
        assert data["R2_b"] == {"u": "5592", "v": "3935", "w": "7920"}
        assert data["outcome"] == {"kind": "non_integer", "u": "31", "v": "34", "w": "35"}

    def test_from_dict(self, toy_instance, toy_overrides, rng):
        transcript = honest_run(toy_instance, rng, Variant.CORRECTED, overrides=toy_overrides)
        assert Transcript.from_dict(transcript.to_dict()) == transcript

    def test_unfinished_transcript(self):
        transcript = Transcript(query=BlindedQuery(1, 2, 3, 4))
        data = transcript.to_dict()
        assert data["R2_b"] is None
        assert data["outcome"] is None
        assert transcript.accepted_round is None


def test_secrets_are_frozen():
    secrets = BlindingSecrets(q=97, r1=21, r2=73, k=13, variant=Variant.ORIGINAL)
    with pytest.raises(AttributeError):
        secrets.q = 5  # type: ignore[misc]
