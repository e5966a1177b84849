"""Entropy accounting: hand-enumerated posteriors, the key/secret identity,
the palette bound, and monotonicity under more data."""

import math
import random
from fractions import Fraction

import pytest

from kexlab import (
    EveRecording,
    Palette,
    PartySecrets,
    SharedSecret,
    Voltage,
    brute_force_posterior,
    posterior_from_x_pairs,
    posterior_trajectory,
    run_round,
)
from kexlab.circuit import Resistance

from conftest import random_palette

PALU = Palette([1, 5])


def _round_segment(r_s, r_a, r_b, u_a=5, u_b=1, round_k=0):
    shared = SharedSecret(r_s=Resistance(r_s), auth_key=b"k" * 16)
    alice = PartySecrets(Resistance(r_a), Voltage(u_a), 0)
    bob = PartySecrets(Resistance(r_b), Voltage(u_b), 0)
    _, segment = run_round(shared, alice, bob, Voltage(1), Voltage(1), round_k=round_k)
    return segment


class TestHandEnumeratedPosteriors:
    def test_both_candidates_survive(self):
        # truth (r_s=1000, r_a=2000, r_b=2000): X_A = X_B = 3000.
        # candidate 1000 -> (2000, 2000); candidate 2000 -> (1000, 1000);
        # both in palette, so one full bit remains.
        p_s = Palette([1000, 2000])
        p_ab = Palette([1000, 2000])
        segment = _round_segment(1000, 2000, 2000)
        report = brute_force_posterior(EveRecording(segment), p_s, p_ab, p_ab)
        assert report.consistent_count == 2
        assert report.h_rs_bits == 1.0
        assert report.h_key_bits == 1.0

    def test_edge_leakage_eliminates_a_candidate(self):
        # same round, but P_A = {2000} only: candidate 2000 implies
        # r_a = 1000 which is not in P_A, so Eve learns r_s outright.
        p_s = Palette([1000, 2000])
        p_a = Palette([2000])
        p_b = Palette([1000, 2000])
        segment = _round_segment(1000, 2000, 2000)
        report = brute_force_posterior(EveRecording(segment), p_s, p_a, p_b)
        assert report.consistent_count == 1
        assert report.h_rs_bits == 0.0
        assert report.h_key_bits == 0.0
        eliminated = [c for c in report.candidates if not c.consistent]
        assert [c.r_s for c in eliminated] == [2000]
        assert eliminated[0].eliminated_at_round == 0

    def test_empty_recording_keeps_the_prior(self):
        p_s = Palette([1000, 2000, 3000, 4000])
        p_ab = Palette([1000, 2000])
        report = brute_force_posterior(EveRecording(), p_s, p_ab, p_ab)
        assert report.rounds_used == 0
        assert report.h_rs_bits == math.log2(4)
        # with no rounds the (empty) key is already certain
        assert report.h_key_bits == 0.0

    def test_singleton_secret_palette_has_no_security(self):
        p_s = Palette([1000])
        p_ab = Palette([1000, 2000, 3000, 4000])
        for k in range(3):
            segment = _round_segment(1000, 2000, 3000, round_k=0)
            report = brute_force_posterior(EveRecording(segment), p_s, p_ab, p_ab)
            assert report.h_rs_bits == 0.0
            assert report.h_key_bits == 0.0

    def test_candidate_cap(self):
        p_s = Palette(range(1, 10))
        p_ab = Palette([1, 2])
        with pytest.raises(ValueError):
            brute_force_posterior(EveRecording(), p_s, p_ab, p_ab, candidate_cap=4)


class TestInvariants:
    def _random_recording(self, rng, rounds=3):
        p_s = random_palette(rng, 4, 5000)
        p_ab = random_palette(rng, 6, 5000)
        r_s = p_s.values[rng.randrange(len(p_s))]
        entries = []
        for k in range(rounds):
            r_a = p_ab.values[rng.randrange(len(p_ab))]
            r_b = p_ab.values[rng.randrange(len(p_ab))]
            entries += _round_segment(r_s, r_a, r_b, round_k=k)
        return p_s, p_ab, r_s, EveRecording(entries)

    def test_identity_h_key_equals_h_rs(self):
        rng = random.Random(31)
        for _ in range(100):
            p_s, p_ab, _, recording = self._random_recording(rng)
            report = brute_force_posterior(recording, p_s, p_ab, p_ab)
            assert report.h_key_bits == report.h_rs_bits

    def test_bound_h_at_most_log_palette(self):
        rng = random.Random(32)
        for _ in range(100):
            p_s, p_ab, _, recording = self._random_recording(rng)
            report = brute_force_posterior(recording, p_s, p_ab, p_ab)
            assert report.h_rs_bits <= math.log2(len(p_s)) + 1e-12

    def test_monotone_in_rounds(self):
        rng = random.Random(33)
        for _ in range(50):
            p_s, p_ab, _, recording = self._random_recording(rng, rounds=5)
            from kexlab.entropy import x_pairs_from_recording

            points = posterior_trajectory(
                x_pairs_from_recording(recording), p_s, p_ab, p_ab
            )
            hs = [p.h_rs_bits for p in points]
            assert all(a >= b - 1e-12 for a, b in zip(hs, hs[1:]))

    def test_truth_is_never_eliminated(self):
        rng = random.Random(34)
        for _ in range(100):
            p_s, p_ab, r_s, recording = self._random_recording(rng)
            report = brute_force_posterior(recording, p_s, p_ab, p_ab)
            survivors = {c.r_s for c in report.candidates if c.consistent}
            assert r_s in survivors

    def test_distinct_consistent_candidates_have_distinct_keys(self):
        rng = random.Random(35)
        for _ in range(100):
            p_s, p_ab, _, recording = self._random_recording(rng, rounds=2)
            report = brute_force_posterior(recording, p_s, p_ab, p_ab)
            keys = [c.key_bits for c in report.candidates if c.consistent]
            assert len(set(keys)) == len(keys)


class TestModularTrajectory:
    def test_constant_four_bits_with_sixteen_candidates(self):
        q = 256
        p_s = Palette(range(16))
        p_ab = Palette(range(q))
        rng = random.Random(8)
        r_s = 11
        x_pairs = []
        for _ in range(10):
            r_a, r_b = rng.randrange(q), rng.randrange(q)
            x_pairs.append((Fraction((r_s + r_a) % q), Fraction((r_s + r_b) % q)))
        points = posterior_trajectory(x_pairs, p_s, p_ab, p_ab, modulus=q)
        assert [p.h_rs_bits for p in points] == [4.0] * 10
        assert [p.h_key_bits for p in points] == [4.0] * 10
        assert [p.key_bit_length for p in points] == [16 * k for k in range(1, 11)]

    def test_plain_interior_stays_flat_edge_rounds_flagged(self):
        # P_S: 16 values step 100; P_A/P_B: same step, 100x the spread.
        p_s = Palette(range(100, 1700, 100))
        p_ab = Palette(range(10_000, 10_000 + 1501 * 100, 100))
        r_s = Fraction(800)
        interior = [Fraction(10_000 + i * 100) for i in range(15, 1486)]
        rng = random.Random(9)
        x_pairs = [
            (r_s + rng.choice(interior), r_s + rng.choice(interior))
            for _ in range(10)
        ]
        points = posterior_trajectory(x_pairs, p_s, p_ab, p_ab)
        assert all(p.h_rs_bits == 4.0 for p in points)
        # an edge draw, by contrast, eliminates candidates and is flagged
        edge_pair = (r_s + Fraction(10_000), r_s + Fraction(10_000))
        report = posterior_from_x_pairs([edge_pair], p_s, p_ab, p_ab)
        assert report.consistent_count < 16
        assert report.h_key_bits == report.h_rs_bits
        assert any(c.eliminated_at_round == 0 for c in report.candidates)
