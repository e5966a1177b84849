"""Brute-force information accounting over the shared-secret palette.

The adversary's entire residual uncertainty is which r_s was drawn: every
candidate either explains the public record (implied secrets are palette
members) or is eliminated. The posterior is uniform over survivors, the
implied key is a deterministic function of the candidate, and the map
candidate -> key is injective once at least one round exists — so the key
posterior carries exactly as many bits as the r_s posterior, no matter how
long the key grows. Entropies are exact Shannon entropies of the
enumerated table; nothing is estimated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .eavesdropper import EveRecording, eve_x_values
from .errors import ValueNotInPalette
from .protocol import Palette, derive_key_from_pairs

# Enumeration stays at desk scale; refuse palettes beyond this by default.
DEFAULT_CANDIDATE_CAP = 2**16


@dataclass(frozen=True)
class Candidate:
    """One enumerated shared-secret hypothesis and the key it would imply."""

    r_s: Fraction
    consistent: bool
    key_bits: str | None
    eliminated_at_round: int | None = None


@dataclass(frozen=True)
class PosteriorReport:
    """Eve's posterior over r_s (and hence over keys) after some rounds."""

    candidates: tuple[Candidate, ...]
    posterior: tuple[tuple[Fraction, float], ...]
    h_rs_bits: float
    h_key_bits: float
    rounds_used: int
    prior_bits: float

    @property
    def consistent_count(self) -> int:
        return sum(1 for c in self.candidates if c.consistent)


@dataclass(frozen=True)
class EntropyPoint:
    """One step of the entropy-versus-key-length trajectory."""

    rounds: int
    h_rs_bits: float
    h_key_bits: float
    key_bit_length: int
    consistent_count: int


def _shannon_bits(probs: Sequence[float]) -> float:
    # the + 0.0 normalizes an all-certain -0.0 to plain 0.0
    return -sum(p * math.log2(p) for p in probs if p > 0) + 0.0


def posterior_from_x_pairs(
    x_pairs: Sequence[tuple[Fraction, Fraction]],
    palette_s: Palette,
    palette_a: Palette,
    palette_b: Palette,
    modulus: int | None = None,
) -> PosteriorReport:
    """Enumerate every r_s candidate against an observed (x_a, x_b) series.

    A candidate is consistent iff every implied (r_a, r_b) is a member of
    the public palettes; the posterior is uniform over consistent
    candidates (uniform prior, deterministic implications). With a modulus
    the implied values are residues (x - r_s) mod q. With zero rounds the
    full prior survives but the (empty) key is already certain, so
    h_key_bits is 0 there; an all-eliminated table signals tampering and
    reports both entropies as 0.
    """
    candidates: list[Candidate] = []
    for r_s_cand in palette_s.values:
        pairs = []
        eliminated_at = None
        for k, (x_a, x_b) in enumerate(x_pairs):
            if modulus is not None:
                r_a = (int(x_a) - int(r_s_cand)) % modulus
                r_b = (int(x_b) - int(r_s_cand)) % modulus
            else:
                r_a = x_a - r_s_cand
                r_b = x_b - r_s_cand
            if r_a not in palette_a or r_b not in palette_b:
                eliminated_at = k
                break
            pairs.append((k, Fraction(r_a), Fraction(r_b)))
        if eliminated_at is None:
            try:
                key = derive_key_from_pairs(pairs, palette_a, palette_b)
            except ValueNotInPalette:  # pragma: no cover - membership checked above
                key = None
            candidates.append(Candidate(r_s_cand, True, key.bits if key else None))
        else:
            candidates.append(Candidate(r_s_cand, False, None, eliminated_at))

    consistent = [c for c in candidates if c.consistent]
    n = len(consistent)
    posterior = tuple((c.r_s, 1.0 / n) for c in consistent) if n else ()
    h_rs = _shannon_bits([p for _, p in posterior])
    key_mass: dict[str, float] = {}
    for c in consistent:
        key_mass[c.key_bits or ""] = key_mass.get(c.key_bits or "", 0.0) + 1.0 / n
    h_key = _shannon_bits(list(key_mass.values()))
    return PosteriorReport(
        candidates=tuple(candidates),
        posterior=posterior,
        h_rs_bits=h_rs,
        h_key_bits=h_key,
        rounds_used=len(x_pairs),
        prior_bits=math.log2(len(palette_s)),
    )


def x_pairs_from_recording(recording: EveRecording) -> list[tuple[Fraction, Fraction]]:
    """The (x_a, x_b) series over all fully recorded rounds, in round order."""
    return [
        (x.x_a, x.x_b)
        for x in (eve_x_values(recording, k) for k in recording.complete_rounds())
    ]


def brute_force_posterior(
    recording: EveRecording,
    palette_s: Palette,
    palette_a: Palette,
    palette_b: Palette,
    candidate_cap: int = DEFAULT_CANDIDATE_CAP,
) -> PosteriorReport:
    """Posterior over r_s from a circuit recording, by explicit enumeration."""
    if len(palette_s) > candidate_cap:
        raise ValueError(
            f"palette of {len(palette_s)} candidates exceeds the cap {candidate_cap}"
        )
    return posterior_from_x_pairs(
        x_pairs_from_recording(recording), palette_s, palette_a, palette_b
    )


def posterior_trajectory(
    x_pairs: Sequence[tuple[Fraction, Fraction]],
    palette_s: Palette,
    palette_a: Palette,
    palette_b: Palette,
    modulus: int | None = None,
) -> list[EntropyPoint]:
    """Entropy after each prefix of rounds, alongside the growing key length.

    More data can only shrink the consistent set, so h_rs is non-increasing
    in the round count; the key length grows linearly regardless.
    """
    per_round_bits = palette_a.bit_width + palette_b.bit_width
    points: list[EntropyPoint] = []
    for k in range(1, len(x_pairs) + 1):
        report = posterior_from_x_pairs(
            x_pairs[:k], palette_s, palette_a, palette_b, modulus
        )
        points.append(
            EntropyPoint(
                rounds=k,
                h_rs_bits=report.h_rs_bits,
                h_key_bits=report.h_key_bits,
                key_bit_length=k * per_round_bits,
                consistent_count=report.consistent_count,
            )
        )
    return points


def entropy_vs_rounds(config, max_rounds: int) -> list[EntropyPoint]:
    """Run one seeded experiment and return its entropy trajectory.

    Fixed r_s, fresh round secrets each round, configured mode (circuit or
    expander). Import is local to avoid a module cycle with the harness.
    """
    from .harness import simulate_x_pairs

    x_pairs, palettes, modulus = simulate_x_pairs(config, max_rounds)
    palette_s, palette_a, palette_b = palettes
    return posterior_trajectory(x_pairs, palette_s, palette_a, palette_b, modulus)
