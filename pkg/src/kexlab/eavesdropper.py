"""Passive eavesdropper: record everything, crack everything given r_s.

Eve measures only the public (u_c, i_c). Differential measurements during
the two perturbation phases hand her the sums X_A = r_s + r_a and
X_B = r_s + r_b; the baseline pair then yields BOTH secret voltages with
no knowledge of r_s at all. If she ever learns r_s — before or after
recording, it makes no difference — every key falls by subtraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .circuit import LineObservation, Voltage, differential_slope
from .errors import IncompleteRound, RoundPhaseMismatch, ZeroCurrentDelta
from .protocol import (
    Key,
    Palette,
    Phase,
    Resistance,
    TranscriptEntry,
    derive_key_from_pairs,
)


class EveRecording:
    """Append-only store of every line observation Eve has tapped.

    Keyed by (round, phase); a slot never changes once written. Passive by
    construction: nothing here can reach back into the line or the parties.
    """

    def __init__(self, entries: Iterable[TranscriptEntry] = ()):
        self._store: dict[tuple[int, Phase], LineObservation] = {}
        for e in entries:
            self.record(e)

    def record(self, entry: TranscriptEntry) -> None:
        key = (entry.round_k, entry.phase)
        existing = self._store.get(key)
        if existing is not None and existing != entry.obs:
            raise ValueError(f"recording slot {key} already holds a different value")
        self._store[key] = entry.obs

    def get(self, round_k: int, phase: Phase) -> LineObservation:
        try:
            return self._store[(round_k, phase)]
        except KeyError:
            raise IncompleteRound(
                f"round {round_k} has no {phase.name} observation"
            ) from None

    def has(self, round_k: int, phase: Phase) -> bool:
        return (round_k, phase) in self._store

    def complete_rounds(self) -> list[int]:
        """Rounds for which all three phases are present, ascending."""
        rounds = {k for k, _ in self._store}
        return sorted(k for k in rounds if all(self.has(k, p) for p in Phase))

    def partial_rounds(self) -> list[int]:
        rounds = {k for k, _ in self._store}
        return sorted(k for k in rounds if not all(self.has(k, p) for p in Phase))

    def entries(self) -> list[TranscriptEntry]:
        return [
            TranscriptEntry(k, p, obs)
            for (k, p), obs in sorted(
                self._store.items(), key=lambda kv: (kv[0][0], kv[0][1].value)
            )
        ]

    def __len__(self) -> int:
        return len(self._store)


@dataclass(frozen=True)
class XValues:
    """The exposed sums for one round: x_a = r_s + r_a, x_b = r_s + r_b."""

    x_a: Fraction
    x_b: Fraction
    round_k: int


@dataclass(frozen=True)
class CrackedRound:
    round_k: int
    r_a: Fraction
    r_b: Fraction
    u_a: Fraction
    u_b: Fraction


@dataclass(frozen=True)
class CrackResult:
    """Everything Eve reconstructs once she holds a candidate r_s."""

    rounds: tuple[CrackedRound, ...]
    key: Key | None
    complete: bool


def eve_x_values(recording: EveRecording, round_k: int) -> XValues:
    """Both slope magnitudes for a fully recorded round, public data only."""
    baseline = recording.get(round_k, Phase.BASELINE)
    alice_p = recording.get(round_k, Phase.ALICE_PERTURB)
    bob_p = recording.get(round_k, Phase.BOB_PERTURB)
    x_b = differential_slope(baseline, alice_p)
    x_a = differential_slope(baseline, bob_p)
    return XValues(x_a=x_a, x_b=x_b, round_k=round_k)


def eve_recover_voltages(
    x: XValues, baseline: LineObservation
) -> tuple[Voltage, Voltage]:
    """Recover (u_a, u_b) from the baseline pair and the X values alone.

    u_b = u_c - x_b * i_c and u_a = u_c + x_a * i_c. No r_s required:
    the "secret" voltages are not secret against a passive observer.
    """
    u_c = baseline.u_c.value
    i_c = baseline.i_c.value
    u_b = u_c - x.x_b * i_c
    u_a = u_c + x.x_a * i_c
    return Voltage(u_a), Voltage(u_b)


def eve_crack_with_secret(
    recording: EveRecording,
    r_s: Resistance,
    palette_a: Palette,
    palette_b: Palette,
) -> CrackResult:
    """Reconstruct every recorded round's secrets and the full key from r_s.

    Works identically whether r_s was learned before or after the rounds
    were recorded: the input is nothing but stored public data. Raises
    ValueNotInPalette when an implied resistance is not a palette member —
    which is informative in itself, as it eliminates that r_s candidate.
    """
    cracked: list[CrackedRound] = []
    pairs: list[tuple[int, Fraction, Fraction]] = []
    for round_k in recording.complete_rounds():
        x = eve_x_values(recording, round_k)
        r_a = x.x_a - r_s.value
        r_b = x.x_b - r_s.value
        u_a, u_b = eve_recover_voltages(x, recording.get(round_k, Phase.BASELINE))
        cracked.append(
            CrackedRound(round_k=round_k, r_a=r_a, r_b=r_b, u_a=u_a.value, u_b=u_b.value)
        )
        pairs.append((round_k, r_a, r_b))
    if not cracked:
        return CrackResult(rounds=(), key=None, complete=False)
    key = derive_key_from_pairs(pairs, palette_a, palette_b)
    complete = not recording.partial_rounds()
    return CrackResult(rounds=tuple(cracked), key=key, complete=complete)


def transient_slope(samples: Sequence[TranscriptEntry]) -> Fraction:
    """Slope magnitude from samples taken mid-perturbation.

    All samples must come from the same (round, perturbation phase); any
    two with distinct currents determine the same line, so the slope is
    checked for agreement across the whole subset.
    """
    if not samples:
        raise ZeroCurrentDelta("no samples")
    round_k = samples[0].round_k
    phase = samples[0].phase
    if phase is Phase.BASELINE:
        raise RoundPhaseMismatch("transient samples must come from a perturbation phase")
    for s in samples[1:]:
        if s.round_k != round_k or s.phase is not phase:
            raise RoundPhaseMismatch("samples span more than one (round, phase)")
    slopes = set()
    for i in range(len(samples)):
        for j in range(i + 1, len(samples)):
            a, b = samples[i].obs, samples[j].obs
            if a.i_c.value != b.i_c.value:
                slopes.add(differential_slope(a, b))
    if not slopes:
        raise ZeroCurrentDelta("need at least two samples with distinct currents")
    if len(slopes) > 1:
        raise ValueError(f"samples are not collinear: slopes {sorted(slopes)}")
    return slopes.pop()


def transient_view(
    recording: EveRecording,
    round_k: int,
    alice_phase_samples: Sequence[TranscriptEntry],
    bob_phase_samples: Sequence[TranscriptEntry],
) -> XValues:
    """X values recovered purely from mid-perturbation sampling.

    Demonstrates that sampling inside the source ramps uncovers exactly the
    X values and nothing more: the loop is purely resistive, so every
    intermediate operating point lies on the same affine line between the
    phase endpoints.
    """
    for s in alice_phase_samples:
        if s.round_k != round_k or s.phase is not Phase.ALICE_PERTURB:
            raise RoundPhaseMismatch("expected ALICE_PERTURB samples for this round")
    for s in bob_phase_samples:
        if s.round_k != round_k or s.phase is not Phase.BOB_PERTURB:
            raise RoundPhaseMismatch("expected BOB_PERTURB samples for this round")
    x_b = transient_slope(alice_phase_samples)
    x_a = transient_slope(bob_phase_samples)
    # recording is consulted only to anchor the round; the slopes above use
    # nothing but the intermediate samples
    if not recording.has(round_k, Phase.BASELINE):
        raise IncompleteRound(f"round {round_k} was never observed")
    return XValues(x_a=x_a, x_b=x_b, round_k=round_k)
