"""Framed wire format and canonical byte serialization.

Frame layout: 4-byte big-endian payload length, 1-byte message type, then
the payload. Canonical serialization rules: fields in declaration order,
integers big-endian fixed-width, rationals as length-prefixed decimal
numerator/denominator byte strings. Fractions normalize to lowest terms
with positive denominator, so equal values always serialize identically —
a requirement for the authentication tags computed over these bytes.
"""

from __future__ import annotations

import struct
from fractions import Fraction

from .circuit import Current, LineObservation, Voltage
from .errors import FormatError
from .expander import ExpanderMessage
from .protocol import Phase, Role, TranscriptEntry

ANALOG_SAMPLE = 1
AUTH_REPORT = 2
EXPANDER_MSG = 3

_U8 = struct.Struct(">B")
_U32 = struct.Struct(">I")


def _pack_bytes(data: bytes) -> bytes:
    return _U32.pack(len(data)) + data


def _take_bytes(buf: bytes, at: int) -> tuple[bytes, int]:
    if at + 4 > len(buf):
        raise FormatError("truncated length prefix")
    (n,) = _U32.unpack_from(buf, at)
    at += 4
    if at + n > len(buf):
        raise FormatError("truncated byte string")
    return buf[at : at + n], at + n


def pack_rational(x: Fraction) -> bytes:
    return _pack_bytes(str(x.numerator).encode("ascii")) + _pack_bytes(
        str(x.denominator).encode("ascii")
    )


def unpack_rational(buf: bytes, at: int) -> tuple[Fraction, int]:
    num, at = _take_bytes(buf, at)
    den, at = _take_bytes(buf, at)
    try:
        return Fraction(int(num), int(den)), at
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad rational encoding: {exc}") from None


def pack_int(x: int) -> bytes:
    """Arbitrary-size integers travel as length-prefixed decimal strings."""
    return _pack_bytes(str(x).encode("ascii"))


def unpack_int(buf: bytes, at: int) -> tuple[int, int]:
    raw, at = _take_bytes(buf, at)
    try:
        return int(raw), at
    except ValueError as exc:
        raise FormatError(f"bad integer encoding: {exc}") from None


def encode_frame(msg_type: int, payload: bytes) -> bytes:
    return _U32.pack(len(payload)) + _U8.pack(msg_type) + payload


def decode_frame(frame: bytes) -> tuple[int, bytes]:
    if len(frame) < 5:
        raise FormatError("frame shorter than its header")
    (n,) = _U32.unpack_from(frame, 0)
    (msg_type,) = _U8.unpack_from(frame, 4)
    payload = frame[5:]
    if len(payload) != n:
        raise FormatError(f"frame payload length {len(payload)} != header {n}")
    return msg_type, payload


# -- ANALOG_SAMPLE: round u32 | phase u8 | u_c | i_c | t u32 ----------------


def encode_sample(entry: TranscriptEntry, t: int) -> bytes:
    payload = (
        _U32.pack(entry.round_k)
        + _U8.pack(entry.phase.value)
        + pack_rational(entry.obs.u_c.value)
        + pack_rational(entry.obs.i_c.value)
        + _U32.pack(t)
    )
    return encode_frame(ANALOG_SAMPLE, payload)


def decode_sample(payload: bytes) -> tuple[TranscriptEntry, int]:
    try:
        (round_k,) = _U32.unpack_from(payload, 0)
        (phase_code,) = _U8.unpack_from(payload, 4)
    except struct.error as exc:
        raise FormatError(str(exc)) from None
    u_c, at = unpack_rational(payload, 5)
    i_c, at = unpack_rational(payload, at)
    try:
        (t,) = _U32.unpack_from(payload, at)
    except struct.error as exc:
        raise FormatError(str(exc)) from None
    entry = TranscriptEntry(
        round_k,
        Phase(phase_code),
        LineObservation(u_c=Voltage(u_c), i_c=Current(i_c)),
    )
    return entry, t


# -- AUTH_REPORT: party u8 | round u32 | phase u8 | u | i | tag -------------


def report_prefix(
    party: Role, round_k: int, phase: Phase, u_end: Voltage, i_end: Current
) -> bytes:
    """The exact bytes an endpoint report's tag authenticates."""
    return (
        _U8.pack(party.value)
        + _U32.pack(round_k)
        + _U8.pack(phase.value)
        + pack_rational(u_end.value)
        + pack_rational(i_end.value)
    )


def encode_report_payload(
    party: Role,
    round_k: int,
    phase: Phase,
    u_end: Voltage,
    i_end: Current,
    tag: bytes,
) -> bytes:
    return report_prefix(party, round_k, phase, u_end, i_end) + _pack_bytes(tag)


def decode_report_payload(
    payload: bytes,
) -> tuple[Role, int, Phase, Voltage, Current, bytes]:
    try:
        (party_code,) = _U8.unpack_from(payload, 0)
        (round_k,) = _U32.unpack_from(payload, 1)
        (phase_code,) = _U8.unpack_from(payload, 5)
    except struct.error as exc:
        raise FormatError(str(exc)) from None
    u, at = unpack_rational(payload, 6)
    i, at = unpack_rational(payload, at)
    tag, at = _take_bytes(payload, at)
    return Role(party_code), round_k, Phase(phase_code), Voltage(u), Current(i), tag


# -- EXPANDER_MSG: sender u8 | k_start u32 | mod flag/value | x values ------


def encode_expander_payload(msg: ExpanderMessage) -> bytes:
    sender_code = 0 if msg.sender == "alice" else 1
    out = _U8.pack(sender_code) + _U32.pack(msg.k_start)
    if msg.modulus is None:
        out += _U8.pack(0)
    else:
        out += _U8.pack(1) + pack_int(msg.modulus)
    out += _U32.pack(len(msg.x_list))
    for x in msg.x_list:
        out += pack_int(x)
    return out


def decode_expander_payload(payload: bytes) -> ExpanderMessage:
    try:
        (sender_code,) = _U8.unpack_from(payload, 0)
        (k_start,) = _U32.unpack_from(payload, 1)
        (mod_flag,) = _U8.unpack_from(payload, 5)
    except struct.error as exc:
        raise FormatError(str(exc)) from None
    at = 6
    modulus = None
    if mod_flag:
        modulus, at = unpack_int(payload, at)
    try:
        (count,) = _U32.unpack_from(payload, at)
    except struct.error as exc:
        raise FormatError(str(exc)) from None
    at += 4
    xs = []
    for _ in range(count):
        x, at = unpack_int(payload, at)
        xs.append(x)
    return ExpanderMessage(
        sender="alice" if sender_code == 0 else "bob",
        k_start=k_start,
        x_list=tuple(xs),
        modulus=modulus,
    )
