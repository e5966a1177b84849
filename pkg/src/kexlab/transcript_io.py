"""Transcript persistence: newline-delimited JSON records, exact rationals.

One record per line. The header carries the format version and the config
hash; observation records are {round, phase, u_c, i_c, t} with rationals
serialized as "numerator/denominator" decimal strings — never floating
point, so a write/read round trip reproduces the in-memory values exactly,
byte for byte on rewrite. Expander-mode runs store their public messages
in the same file with their own record type.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .circuit import Current, LineObservation, Voltage
from .errors import FormatError, RoundPhaseMismatch
from .expander import ExpanderMessage
from .protocol import Phase, Transcript, TranscriptEntry
from .rational import format_rational, parse_rational

FORMAT_NAME = "kexlab-transcript"
FORMAT_VERSION = 1


@dataclass
class TranscriptData:
    """Parsed contents of one transcript file."""

    config_hash: str
    mode: str
    entries: list[TranscriptEntry] = field(default_factory=list)
    expander_messages: list[ExpanderMessage] = field(default_factory=list)


def _entry_record(entry: TranscriptEntry, t: int) -> dict:
    return {
        "type": "obs",
        "round": entry.round_k,
        "phase": entry.phase.name,
        "u_c": format_rational(entry.obs.u_c.value),
        "i_c": format_rational(entry.obs.i_c.value),
        "t": t,
    }


def _expander_record(msg: ExpanderMessage, t: int) -> dict:
    rec = {
        "type": "expander",
        "sender": msg.sender,
        "k_start": msg.k_start,
        "x": [str(x) for x in msg.x_list],
        "t": t,
    }
    if msg.modulus is not None:
        rec["modulus"] = msg.modulus
    return rec


def transcript_lines(
    config_hash: str,
    mode: str,
    entries=(),
    expander_messages=(),
) -> list[str]:
    """All file lines, header first, sequenced on one deterministic timeline."""
    lines = [
        json.dumps(
            {
                "type": "header",
                "format": FORMAT_NAME,
                "version": FORMAT_VERSION,
                "config_hash": config_hash,
                "mode": mode,
            },
            separators=(",", ":"),
        )
    ]
    t = 0
    for entry in entries:
        lines.append(json.dumps(_entry_record(entry, t), separators=(",", ":")))
        t += 1
    for msg in expander_messages:
        lines.append(json.dumps(_expander_record(msg, t), separators=(",", ":")))
        t += 1
    return lines


def write_transcript(
    path, config_hash: str, mode: str, entries=(), expander_messages=()
) -> None:
    text = "\n".join(transcript_lines(config_hash, mode, entries, expander_messages))
    Path(path).write_bytes((text + "\n").encode("ascii"))


def _parse_obs(rec: dict, index: int) -> TranscriptEntry:
    try:
        phase = Phase[rec["phase"]]
        return TranscriptEntry(
            round_k=int(rec["round"]),
            phase=phase,
            obs=LineObservation(
                u_c=Voltage(parse_rational(rec["u_c"])),
                i_c=Current(parse_rational(rec["i_c"])),
            ),
        )
    except (KeyError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise FormatError(f"bad observation record: {exc}", index) from None


def _parse_expander(rec: dict, index: int) -> ExpanderMessage:
    try:
        return ExpanderMessage(
            sender=rec["sender"],
            k_start=int(rec["k_start"]),
            x_list=tuple(int(x) for x in rec["x"]),
            modulus=rec.get("modulus"),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"bad expander record: {exc}", index) from None


def read_transcript(path) -> TranscriptData:
    """Parse a transcript file; FormatError pinpoints the offending record."""
    raw = Path(path).read_bytes()
    lines = raw.decode("ascii", errors="replace").splitlines()
    if not lines:
        raise FormatError("empty file", 0)
    records = []
    for index, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            records.append((index, json.loads(line)))
        except json.JSONDecodeError as exc:
            raise FormatError(f"not a JSON record: {exc}", index) from None
    index, header = records[0]
    if header.get("type") != "header" or header.get("format") != FORMAT_NAME:
        raise FormatError("first record must be the transcript header", index)
    if header.get("version") != FORMAT_VERSION:
        raise FormatError(f"unsupported version {header.get('version')}", index)
    data = TranscriptData(
        config_hash=str(header.get("config_hash", "")),
        mode=str(header.get("mode", "circuit")),
    )
    expected_t = 0
    for index, rec in records[1:]:
        kind = rec.get("type")
        if "t" in rec and int(rec["t"]) != expected_t:
            raise FormatError(
                f"timeline gap: expected t={expected_t}, got {rec['t']}", index
            )
        expected_t += 1
        if kind == "obs":
            data.entries.append(_parse_obs(rec, index))
        elif kind == "expander":
            data.expander_messages.append(_parse_expander(rec, index))
        else:
            raise FormatError(f"unknown record type {kind!r}", index)
    return data


def verify_transcript_data(data: TranscriptData) -> list[str]:
    """Structural checks beyond parsing; returns human-readable problems."""
    problems: list[str] = []
    try:
        Transcript(data.entries)
    except RoundPhaseMismatch as exc:
        problems.append(f"observation ordering: {exc}")
    ks = [m.k_start for m in data.expander_messages]
    if ks != sorted(ks):
        problems.append("expander messages out of k order")
    return problems
