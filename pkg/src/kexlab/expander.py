"""Hardware-free key expansion by plain (or modular) addition.

The circuit protocol exposes nothing on the line beyond the sums
x = r_s + r; the same exchange therefore runs over any digital channel by
literally sending those sums. Plain addition is the default; a modular
mode is provided because plain addition over a bounded range leaks at the
range edges, while residues mod q leak nothing beyond consistency.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import OutOfRange
from .eavesdropper import EveRecording, eve_x_values
from .protocol import TranscriptEntry


@dataclass(frozen=True)
class ExpanderMessage:
    """One party's public batch of sums x_k = r_s + r_k (mod q if set)."""

    sender: str  # "alice" | "bob"
    k_start: int
    x_list: tuple[int, ...]
    modulus: int | None = None

    def __post_init__(self):
        if self.sender not in ("alice", "bob"):
            raise ValueError(f"unknown sender {self.sender!r}")
        if self.modulus is not None and self.modulus < 2:
            raise ValueError("modulus must be at least 2")


def expand(
    r_s: int,
    randoms: Sequence[int],
    modulus: int | None = None,
    sender: str = "alice",
    k_start: int = 0,
) -> ExpanderMessage:
    """Element-wise r_s + randoms, reduced mod q when a modulus is set."""
    if modulus is not None:
        if modulus < 2:
            raise ValueError("modulus must be at least 2")
        if not 0 <= r_s < modulus:
            raise OutOfRange(f"r_s {r_s} outside [0, {modulus})")
        for r in randoms:
            if not 0 <= r < modulus:
                raise OutOfRange(f"random {r} outside [0, {modulus})")
        xs = tuple((r_s + r) % modulus for r in randoms)
    else:
        xs = tuple(r_s + r for r in randoms)
    return ExpanderMessage(sender=sender, k_start=k_start, x_list=xs, modulus=modulus)


def recover_partner_randoms(msg: ExpanderMessage, r_s: int) -> list[int]:
    """Invert :func:`expand` with the shared secret; exact inverse by construction."""
    if msg.modulus is not None:
        return [(x - r_s) % msg.modulus for x in msg.x_list]
    return [x - r_s for x in msg.x_list]


def equivalence_check(
    transcript: Sequence[TranscriptEntry],
    r_s: int,
    round_secrets: Sequence[tuple[int, int]],
) -> bool:
    """Does the circuit expose exactly the sums the digital expander sends?

    True iff, for every fully recorded round, the X values computed from
    the public circuit transcript equal expand(r_s, [r_a_k]) and
    expand(r_s, [r_b_k]) element-wise (plain mode). Vacuously true for an
    empty transcript.
    """
    recording = EveRecording(transcript)
    rounds = recording.complete_rounds()
    if len(rounds) > len(round_secrets):
        return False
    expected_a = expand(r_s, [ra for ra, _ in round_secrets]).x_list
    expected_b = expand(r_s, [rb for _, rb in round_secrets]).x_list
    for idx, round_k in enumerate(rounds):
        x = eve_x_values(recording, round_k)
        if x.x_a != expected_a[idx] or x.x_b != expected_b[idx]:
            return False
    return True
