"""Current-injection attack model and the authenticated-comparison defense.

An active attacker feeds a current into the wire node between the two
shared resistors. With an ideal lossless wire both endpoints still see the
same node voltage, but their branch currents then differ by exactly the
injected current — so endpoints that exchange authenticated (U, I)
readings and compare them detect any nonzero injection. The defense is
exactly as strong as the authentication secret: an adversary holding
auth_key can always rewrite each report to match the receiving end's own
measurement and pass verification.
"""

from __future__ import annotations

import enum
import hashlib
import hmac
from dataclasses import dataclass
from fractions import Fraction

from .circuit import Current, LineObservation, LoopParams, Voltage
from .errors import RoundPhaseMismatch
from .protocol import Phase, Role
from .wire import report_prefix

TAG_LENGTH = 16
DEFAULT_TAG_ALGO = "sha256"


@dataclass(frozen=True)
class InjectionScenario:
    """A constant current forced into the wire node during chosen rounds."""

    i_inject: Current
    active_rounds: frozenset[int]

    def __post_init__(self):
        if self.i_inject.value == 0:
            raise ValueError("an active scenario needs a nonzero injection")

    def applies_to(self, round_k: int) -> bool:
        return round_k in self.active_rounds


class Reason(enum.Enum):
    NONE = "NONE"
    CURRENT_MISMATCH = "CURRENT_MISMATCH"
    VOLTAGE_MISMATCH = "VOLTAGE_MISMATCH"
    BAD_TAG = "BAD_TAG"


@dataclass(frozen=True)
class EndpointReport:
    """One endpoint's authenticated (U, I) reading for one (round, phase)."""

    party: Role
    round_k: int
    phase: Phase
    u_end: Voltage
    i_end: Current
    auth_tag: bytes


@dataclass(frozen=True)
class DefenseVerdict:
    round_k: int
    phase: Phase
    alarm: bool
    reason: Reason

    def __post_init__(self):
        assert self.alarm == (self.reason is not Reason.NONE)


def solve_loop_with_injection(
    params: LoopParams, i_inject: Current
) -> tuple[LineObservation, LineObservation]:
    """Node analysis of the loop with a current source at the wire node.

    Both ends share the node voltage (ideal wire); the per-end currents are
    the branch currents, each positive in the Alice-to-Bob direction, and
    satisfy KCL: bob_end.i - alice_end.i = i_inject exactly.
    """
    g_a = 1 / (params.r_a.value + params.r_s.value)
    g_b = 1 / (params.r_s.value + params.r_b.value)
    u_c = (g_a * params.u_a.value + g_b * params.u_b.value + i_inject.value) / (
        g_a + g_b
    )
    i_alice = (params.u_a.value - u_c) * g_a
    i_bob = (u_c - params.u_b.value) * g_b
    return (
        LineObservation(u_c=Voltage(u_c), i_c=Current(i_alice)),
        LineObservation(u_c=Voltage(u_c), i_c=Current(i_bob)),
    )


def compute_tag(
    party: Role,
    round_k: int,
    phase: Phase,
    u_end: Voltage,
    i_end: Current,
    auth_key: bytes,
    algo: str = DEFAULT_TAG_ALGO,
) -> bytes:
    """Keyed MAC over the canonical report bytes, truncated to 16 bytes."""
    prefix = report_prefix(party, round_k, phase, u_end, i_end)
    return hmac.new(auth_key, prefix, getattr(hashlib, algo)).digest()[:TAG_LENGTH]


def make_report(
    party: Role,
    round_k: int,
    phase: Phase,
    observation: LineObservation,
    auth_key: bytes,
    algo: str = DEFAULT_TAG_ALGO,
) -> EndpointReport:
    if len(auth_key) < 16:
        raise ValueError("auth_key must be at least 16 bytes")
    tag = compute_tag(
        party, round_k, phase, observation.u_c, observation.i_c, auth_key, algo
    )
    return EndpointReport(
        party=party,
        round_k=round_k,
        phase=phase,
        u_end=observation.u_c,
        i_end=observation.i_c,
        auth_tag=tag,
    )


def verify_tag(report: EndpointReport, auth_key: bytes, algo: str = DEFAULT_TAG_ALGO) -> bool:
    expected = compute_tag(
        report.party,
        report.round_k,
        report.phase,
        report.u_end,
        report.i_end,
        auth_key,
        algo,
    )
    return hmac.compare_digest(expected, report.auth_tag)


def verify_round(
    alice_report: EndpointReport,
    bob_report: EndpointReport,
    auth_key: bytes,
    tolerance: Fraction = Fraction(0),
    algo: str = DEFAULT_TAG_ALGO,
) -> DefenseVerdict:
    """Compare the two authenticated endpoint readings for one (round, phase).

    Tag failures trump value comparisons. The default tolerance is zero:
    arithmetic is exact, so any injected current shows up as a current
    mismatch of exactly its own magnitude. With the measurement-noise layer
    enabled, set the tolerance to at least six times the propagated sigma.
    """
    if (alice_report.round_k, alice_report.phase) != (
        bob_report.round_k,
        bob_report.phase,
    ):
        raise RoundPhaseMismatch("reports are not for the same (round, phase)")
    if alice_report.party is bob_report.party:
        raise RoundPhaseMismatch("need one report from each party")
    round_k, phase = alice_report.round_k, alice_report.phase
    if not (verify_tag(alice_report, auth_key, algo) and verify_tag(bob_report, auth_key, algo)):
        return DefenseVerdict(round_k, phase, True, Reason.BAD_TAG)
    if abs(alice_report.i_end.value - bob_report.i_end.value) > tolerance:
        return DefenseVerdict(round_k, phase, True, Reason.CURRENT_MISMATCH)
    if abs(alice_report.u_end.value - bob_report.u_end.value) > tolerance:
        return DefenseVerdict(round_k, phase, True, Reason.VOLTAGE_MISMATCH)
    return DefenseVerdict(round_k, phase, False, Reason.NONE)


def forge_passing_pair(
    alice_report: EndpointReport,
    bob_report: EndpointReport,
    auth_key: bytes,
    algo: str = DEFAULT_TAG_ALGO,
) -> tuple[EndpointReport, EndpointReport]:
    """What a key-holding adversary substitutes to defeat the comparison.

    Returns (forged bob-report for Alice, forged alice-report for Bob):
    each rewritten to echo the receiving end's own measurement, with a
    fresh valid tag. Constructively establishes that the defense stands or
    falls with the authentication secret.
    """
    to_alice = make_report(
        Role.BOB,
        bob_report.round_k,
        bob_report.phase,
        LineObservation(u_c=alice_report.u_end, i_c=alice_report.i_end),
        auth_key,
        algo,
    )
    to_bob = make_report(
        Role.ALICE,
        alice_report.round_k,
        alice_report.phase,
        LineObservation(u_c=bob_report.u_end, i_c=bob_report.i_end),
        auth_key,
        algo,
    )
    return to_alice, to_bob
