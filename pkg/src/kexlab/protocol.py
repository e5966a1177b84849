"""Honest-party state machines and the three-phase measurement round.

One round: both parties hold fresh private draws (r, u); the line is
observed at baseline, then while Alice shifts her source, then while Bob
shifts his (each restores before the other starts, so both extractions
share a single baseline). Each party recovers the partner's resistance
from the slope of its own perturbation minus the shared r_s, then the
partner's voltage from the baseline pair.

Key material is resistance indices only: the voltages are recoverable by
any passive observer, so they would add zero entropy to a key.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .circuit import (
    Current,
    LineObservation,
    LoopParams,
    NoisyObservation,
    Resistance,
    Voltage,
    differential_slope,
    solve_loop,
)
from .errors import (
    CrossCheckFailed,
    IncompleteRound,
    NegativeResistance,
    RoundPhaseMismatch,
    ValueNotInPalette,
    ZeroCurrentDelta,
)
from .rational import as_fraction


class Phase(enum.Enum):
    """The three line states within one round, in protocol order."""

    BASELINE = 1
    ALICE_PERTURB = 2
    BOB_PERTURB = 3


class Role(enum.Enum):
    ALICE = 0
    BOB = 1

    @property
    def label(self) -> str:
        return self.name.lower()


class Palette:
    """Ordered finite set of admissible secret values.

    Palettes are public (the adversary knows the system; only the drawn
    value is secret). Values are kept sorted ascending with no duplicates.
    """

    __slots__ = ("values", "_index")

    def __init__(self, values: Iterable):
        vals = tuple(sorted(as_fraction(v) for v in values))
        if not vals:
            raise ValueError("palette must hold at least one value")
        if len(set(vals)) != len(vals):
            raise ValueError("palette values must be distinct")
        self.values: tuple[Fraction, ...] = vals
        self._index = {v: i for i, v in enumerate(vals)}

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __contains__(self, value) -> bool:
        return as_fraction(value) in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, Palette) and self.values == other.values

    def __hash__(self) -> int:
        return hash(self.values)

    def __repr__(self) -> str:
        return f"Palette({list(self.values)!r})"

    @property
    def bit_width(self) -> int:
        """Bits needed to index this palette: ceil(log2(size))."""
        return (len(self.values) - 1).bit_length()

    @property
    def spread(self) -> Fraction:
        return self.values[-1] - self.values[0]

    def index(self, value) -> int:
        v = as_fraction(value)
        try:
            return self._index[v]
        except KeyError:
            raise ValueNotInPalette(f"{v} not in palette") from None

    def nearest(self, x: float) -> Fraction:
        """Palette member closest to a (possibly noisy) measurement."""
        return min(self.values, key=lambda v: abs(float(v) - x))


@dataclass(frozen=True)
class SharedSecret:
    """What Alice and Bob share before the protocol starts.

    r_s must be drawn from the public R_S palette (checked where the
    palette is in scope); auth_key is the portion reserved for message
    authentication in the active-attack defense.
    """

    r_s: Resistance
    auth_key: bytes

    def __post_init__(self):
        if len(self.auth_key) < 16:
            raise ValueError("auth_key must be at least 16 bytes")


@dataclass(frozen=True)
class PartySecrets:
    """One party's private draw for one round."""

    r: Resistance
    u: Voltage
    r_index: int


@dataclass(frozen=True)
class TranscriptEntry:
    """One public line observation, as stored and as Eve sees it."""

    round_k: int
    phase: Phase
    obs: LineObservation


class Transcript:
    """Append-only ordered record of the public line observations.

    Within each round the phases appear in protocol order; round numbers
    strictly increase across rounds.
    """

    def __init__(self, entries: Iterable[TranscriptEntry] = ()):
        self._entries: list[TranscriptEntry] = []
        for e in entries:
            self.append(e)

    def append(self, entry: TranscriptEntry) -> None:
        if self._entries:
            last = self._entries[-1]
            if entry.round_k == last.round_k:
                if entry.phase.value != last.phase.value + 1:
                    raise RoundPhaseMismatch(
                        f"phase {entry.phase.name} cannot follow {last.phase.name}"
                    )
            elif entry.round_k > last.round_k:
                if entry.phase is not Phase.BASELINE:
                    raise RoundPhaseMismatch(
                        f"round {entry.round_k} must start with BASELINE"
                    )
            else:
                raise RoundPhaseMismatch("round numbers must strictly increase")
        elif entry.phase is not Phase.BASELINE:
            raise RoundPhaseMismatch("transcript must start with a BASELINE entry")
        self._entries.append(entry)

    @property
    def entries(self) -> tuple[TranscriptEntry, ...]:
        return tuple(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)


@dataclass(frozen=True)
class RoundRecord:
    """Everything one executed round produced, private views included."""

    round_k: int
    baseline: LineObservation
    alice_perturbed: LineObservation
    bob_perturbed: LineObservation
    deltas: tuple[Voltage, Voltage]
    alice_view: tuple[Resistance, Voltage]  # Alice's extraction of (R_B, U_B)
    bob_view: tuple[Resistance, Voltage]  # Bob's extraction of (R_A, U_A)


@dataclass(frozen=True)
class Key:
    """Derived key bits plus the palette indices they encode."""

    bits: str
    provenance: tuple[tuple[int, int, int], ...]  # (round_k, r_a_index, r_b_index)

    def __len__(self) -> int:
        return len(self.bits)


def draw_round_secrets(
    palette_r: Palette, palette_u: Palette, rng_seed, margin: int = 0
) -> PartySecrets:
    """Uniform independent draw of one party's round secrets.

    ``margin`` restricts the resistance draw to indices at least that far
    from both palette edges (interior sampling for leakage studies); the
    recorded index is always relative to the full palette.
    """
    n = len(palette_r)
    if margin and (margin < 0 or 2 * margin >= n):
        raise ValueError(f"margin {margin} leaves no interior in a {n}-palette")
    rng = random.Random(rng_seed)
    r_index = rng.randrange(margin, n - margin)
    u_index = rng.randrange(len(palette_u))
    return PartySecrets(
        r=Resistance(palette_r.values[r_index]),
        u=Voltage(palette_u.values[u_index]),
        r_index=r_index,
    )


def alice_extract(
    r_s: Resistance, baseline: LineObservation, alice_perturbed: LineObservation
) -> tuple[Resistance, Voltage]:
    """Alice's recovery of Bob's (R_B, U_B) from her own perturbation.

    R_B = |dU_c/dI_c| - r_s; then U_B follows from the baseline pair via
    the Bob-side relation u_c = u_b + (r_s + r_b) * i_c.
    """
    slope = differential_slope(baseline, alice_perturbed)
    if slope <= r_s.value:
        raise NegativeResistance(
            f"slope {slope} does not exceed r_s {r_s.value}; "
            "corrupted transcript or wrong shared secret"
        )
    r_b = slope - r_s.value
    u_b = baseline.u_c.value - slope * baseline.i_c.value
    return Resistance(r_b), Voltage(u_b)


def bob_extract(
    r_s: Resistance, baseline: LineObservation, bob_perturbed: LineObservation
) -> tuple[Resistance, Voltage]:
    """Bob's mirror recovery of Alice's (R_A, U_A)."""
    slope = differential_slope(baseline, bob_perturbed)
    if slope <= r_s.value:
        raise NegativeResistance(
            f"slope {slope} does not exceed r_s {r_s.value}; "
            "corrupted transcript or wrong shared secret"
        )
    r_a = slope - r_s.value
    u_a = baseline.u_c.value + slope * baseline.i_c.value
    return Resistance(r_a), Voltage(u_a)


class Party:
    """One honest endpoint: private state plus the per-round extraction logic.

    The party never emits a private value; it only consumes the public
    observations it would measure on the line and combines them with what
    it already knows (r_s, its own draw, its own perturbation delta).
    """

    def __init__(self, role: Role, r_s: Resistance, delta_u: Voltage):
        if delta_u.value == 0:
            raise ValueError("perturbation delta must be nonzero")
        self.role = role
        self._r_s = r_s
        self._delta = delta_u
        self._secrets: PartySecrets | None = None
        self._round_k: int | None = None
        self._obs: dict[Phase, LineObservation] = {}
        # per completed round: (round_k, r_a_value, r_b_value) as this party knows them
        self._pairs: list[tuple[int, Fraction, Fraction]] = []

    @property
    def delta(self) -> Voltage:
        return self._delta

    def begin_round(self, round_k: int, secrets: PartySecrets) -> None:
        self._round_k = round_k
        self._secrets = secrets
        self._obs = {}

    def source_voltage(self, phase: Phase) -> Voltage:
        """This party's source setting during a phase (shifted only in its own)."""
        assert self._secrets is not None, "begin_round first"
        own_phase = (
            Phase.ALICE_PERTURB if self.role is Role.ALICE else Phase.BOB_PERTURB
        )
        if phase is own_phase:
            return Voltage(self._secrets.u.value + self._delta.value)
        return self._secrets.u

    def resistance(self) -> Resistance:
        assert self._secrets is not None, "begin_round first"
        return self._secrets.r

    def receive(self, entry: TranscriptEntry) -> None:
        if entry.round_k != self._round_k:
            raise RoundPhaseMismatch(
                f"entry for round {entry.round_k} during round {self._round_k}"
            )
        self._obs[entry.phase] = entry.obs

    def finish_round(self) -> tuple[Resistance, Voltage]:
        """Extract the partner's secrets, cross-check, and bank the key pair."""
        assert self._secrets is not None and self._round_k is not None
        missing = [p.name for p in Phase if p not in self._obs]
        if missing:
            raise IncompleteRound(f"missing phases: {', '.join(missing)}")
        baseline = self._obs[Phase.BASELINE]
        if self.role is Role.ALICE:
            perturbed = self._obs[Phase.ALICE_PERTURB]
            r_ext, u_ext = alice_extract(self._r_s, baseline, perturbed)
            # Bob's source is unchanged during Alice's perturbation, so his
            # side relation must reproduce the same U_B at the shifted point.
            implied = perturbed.u_c.value - (self._r_s.value + r_ext.value) * perturbed.i_c.value
        else:
            perturbed = self._obs[Phase.BOB_PERTURB]
            r_ext, u_ext = bob_extract(self._r_s, baseline, perturbed)
            implied = perturbed.u_c.value + (self._r_s.value + r_ext.value) * perturbed.i_c.value
        if implied != u_ext.value:
            raise CrossCheckFailed(
                f"round {self._round_k}: extraction inconsistent with the "
                f"perturbed observation ({implied} != {u_ext.value})"
            )
        if self.role is Role.ALICE:
            pair = (self._round_k, self._secrets.r.value, r_ext.value)
        else:
            pair = (self._round_k, r_ext.value, self._secrets.r.value)
        self._pairs.append(pair)
        return r_ext, u_ext

    def derive_key(self, palette_a: Palette, palette_b: Palette) -> Key:
        """Key bits from every completed round, in round order."""
        return derive_key_from_pairs(self._pairs, palette_a, palette_b)


def run_round(
    shared: SharedSecret,
    alice: PartySecrets,
    bob: PartySecrets,
    delta_u_a: Voltage,
    delta_u_b: Voltage,
    round_k: int = 0,
) -> tuple[RoundRecord, list[TranscriptEntry]]:
    """Execute one full round over an ideal line, both parties honest.

    Returns the private round record and the public transcript segment:
    exactly the three observations and nothing derived from private values.
    """
    if delta_u_a.value == 0 or delta_u_b.value == 0:
        raise ValueError("both perturbation deltas must be nonzero")
    a = Party(Role.ALICE, shared.r_s, delta_u_a)
    b = Party(Role.BOB, shared.r_s, delta_u_b)
    a.begin_round(round_k, alice)
    b.begin_round(round_k, bob)
    segment: list[TranscriptEntry] = []
    for phase in Phase:
        params = LoopParams(
            r_s=shared.r_s,
            r_a=a.resistance(),
            r_b=b.resistance(),
            u_a=a.source_voltage(phase),
            u_b=b.source_voltage(phase),
        )
        entry = TranscriptEntry(round_k, phase, solve_loop(params))
        segment.append(entry)
        a.receive(entry)
        b.receive(entry)
    alice_view = a.finish_round()
    bob_view = b.finish_round()
    record = RoundRecord(
        round_k=round_k,
        baseline=segment[0].obs,
        alice_perturbed=segment[1].obs,
        bob_perturbed=segment[2].obs,
        deltas=(delta_u_a, delta_u_b),
        alice_view=alice_view,
        bob_view=bob_view,
    )
    return record, segment


def _index_bits(index: int, width: int) -> str:
    if width == 0:
        return ""
    return format(index, f"0{width}b")


def derive_key_from_pairs(
    pairs: Iterable[tuple[int, Fraction, Fraction]],
    palette_a: Palette,
    palette_b: Palette,
) -> Key:
    """Encode per-round (R_A, R_B) values as fixed-width palette indices.

    Per round: big-endian index of R_A in palette_a, then of R_B in
    palette_b. Raises ValueNotInPalette if a value is not a palette member
    (corruption or attack indicator).
    """
    wa, wb = palette_a.bit_width, palette_b.bit_width
    bits: list[str] = []
    provenance: list[tuple[int, int, int]] = []
    for round_k, r_a, r_b in pairs:
        ia = palette_a.index(r_a)
        ib = palette_b.index(r_b)
        bits.append(_index_bits(ia, wa))
        bits.append(_index_bits(ib, wb))
        provenance.append((round_k, ia, ib))
    return Key(bits="".join(bits), provenance=tuple(provenance))


def derive_key(
    records: Sequence[RoundRecord], palette_a: Palette, palette_b: Palette
) -> Key:
    """Key from completed round records (R_A from Bob's view, R_B from Alice's)."""
    pairs = [
        (rec.round_k, rec.bob_view[0].value, rec.alice_view[0].value)
        for rec in records
    ]
    return derive_key_from_pairs(pairs, palette_a, palette_b)


def extract_with_rounding(
    r_s: Resistance,
    baseline: NoisyObservation,
    perturbed: NoisyObservation,
    palette_r: Palette,
    palette_u: Palette,
    role: Role,
) -> tuple[Fraction, Fraction]:
    """Noise-tolerant extraction: float arithmetic, then nearest-palette snap.

    Mirrors alice_extract/bob_extract on the floating-point measurement
    layer. Returns the snapped (partner resistance, partner voltage).
    """
    di = perturbed.i_c - baseline.i_c
    if di == 0.0:
        raise ZeroCurrentDelta("no measurable current change")
    slope = abs((perturbed.u_c - baseline.u_c) / di)
    r_partner = palette_r.nearest(slope - float(r_s.value))
    if role is Role.ALICE:
        u_est = baseline.u_c - slope * baseline.i_c
    else:
        u_est = baseline.u_c + slope * baseline.i_c
    u_partner = palette_u.nearest(u_est)
    return r_partner, u_partner
