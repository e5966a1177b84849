"""Experiment orchestration: parties, line, tap, analyses, persistence.

The harness owns the single timeline: it sequences the three phases of
each round, solves the line for the current source settings, frames every
observation as a wire message, and delivers frames to Alice, Bob, and the
read-only Eve tap. Nothing here depends on scheduling — the orchestration
is sequential by construction, so a fixed seed reproduces every byte.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .circuit import (
    Current,
    LineObservation,
    LoopParams,
    Resistance,
    Voltage,
    observe_with_noise,
    solve_loop,
)
from .config import ExperimentConfig, config_hash, derive_seed
from .defense import (
    DefenseVerdict,
    forge_passing_pair,
    make_report,
    solve_loop_with_injection,
    verify_round,
)
from .eavesdropper import (
    CrackResult,
    EveRecording,
    eve_crack_with_secret,
    eve_recover_voltages,
    eve_x_values,
)
from .entropy import (
    DEFAULT_CANDIDATE_CAP,
    EntropyPoint,
    PosteriorReport,
    posterior_from_x_pairs,
    posterior_trajectory,
    x_pairs_from_recording,
)
from .expander import (
    ExpanderMessage,
    equivalence_check,
    expand,
    recover_partner_randoms,
)
from .protocol import (
    Key,
    Palette,
    Party,
    PartySecrets,
    Phase,
    Role,
    RoundRecord,
    SharedSecret,
    TranscriptEntry,
    derive_key_from_pairs,
    draw_round_secrets,
    extract_with_rounding,
)
from .transcript_io import read_transcript, write_transcript
from .transport import Duplex, FrameChannel, Wiretap
from .wire import (
    ANALOG_SAMPLE,
    EXPANDER_MSG,
    decode_frame,
    decode_sample,
    encode_expander_payload,
    encode_frame,
    encode_sample,
)


@dataclass
class RunResult:
    """Everything one experiment produced, ground truth included."""

    config: ExperimentConfig
    config_hash: str
    shared: SharedSecret
    truth: list[tuple[PartySecrets, PartySecrets]]
    entries: list[TranscriptEntry]
    records: list[RoundRecord]
    expander_messages: list[ExpanderMessage]
    alice_key: Key
    bob_key: Key
    eve_recording: EveRecording
    eve_x: list[tuple[Fraction, Fraction]]
    eve_voltages: list[tuple[Fraction, Fraction]]
    eve_voltages_exact: bool
    posterior: PosteriorReport | None
    trajectory: list[EntropyPoint]
    crack: CrackResult | None
    crack_matches_key: bool | None
    verdicts: list[DefenseVerdict]
    forged: bool
    equivalence_ok: bool | None
    transcript_path: str | None = None
    report_paths: list[str] = field(default_factory=list)

    @property
    def keys_agree(self) -> bool:
        return self.alice_key.bits == self.bob_key.bits

    @property
    def alarmed(self) -> bool:
        return any(v.alarm for v in self.verdicts)


def shared_secret_for(config: ExperimentConfig) -> SharedSecret:
    """Deterministic shared secret: r_s drawn from its palette, key from seed."""
    rng = random.Random(derive_seed(config.seed, "shared-rs"))
    r_s_value = config.palette_rs.values[rng.randrange(len(config.palette_rs))]
    auth_key = hashlib.sha256(
        b"kexlab-auth:" + str(derive_seed(config.seed, "auth-key")).encode()
    ).digest()
    return SharedSecret(r_s=Resistance(r_s_value), auth_key=auth_key)


def _draw_integer(palette: Palette, seed: int) -> int:
    # expander randoms are plain integers; zero is a legal modular residue
    rng = random.Random(seed)
    return int(palette.values[rng.randrange(len(palette))])


@dataclass
class _CircuitSim:
    truth: list[tuple[PartySecrets, PartySecrets]]
    entries: list[TranscriptEntry]
    records: list[RoundRecord]
    verdicts: list[DefenseVerdict]
    forged: bool
    alice_key: Key
    bob_key: Key
    recording: EveRecording


def _run_circuit(config: ExperimentConfig, shared: SharedSecret) -> _CircuitSim:
    eve_tap = Wiretap()
    line_to_alice = FrameChannel(taps=(eve_tap,))
    line_to_bob = FrameChannel()
    noisy = config.sigma_u > 0 or config.sigma_i > 0

    alice = Party(Role.ALICE, shared.r_s, config.delta_ua)
    bob = Party(Role.BOB, shared.r_s, config.delta_ub)
    palette_ra = config.effective_palette_ra()
    palette_rb = config.effective_palette_rb()

    sim = _CircuitSim(
        truth=[], entries=[], records=[], verdicts=[], forged=False,
        alice_key=Key("", ()), bob_key=Key("", ()),
        recording=EveRecording(),
    )
    noisy_pairs_a: list[tuple[int, Fraction, Fraction]] = []
    noisy_pairs_b: list[tuple[int, Fraction, Fraction]] = []
    t_seq = 0

    for k in range(config.rounds):
        a_secrets = draw_round_secrets(
            palette_ra, config.palette_ua, derive_seed(config.seed, "alice", k),
            margin=config.draw_margin,
        )
        b_secrets = draw_round_secrets(
            palette_rb, config.palette_ub, derive_seed(config.seed, "bob", k),
            margin=config.draw_margin,
        )
        sim.truth.append((a_secrets, b_secrets))
        alice.begin_round(k, a_secrets)
        bob.begin_round(k, b_secrets)
        injecting = config.injection_applies(k)
        forging = injecting and config.compromise == "rs-and-authkey"
        phase_obs: dict[Phase, tuple[LineObservation, LineObservation]] = {}

        for phase in Phase:
            params = LoopParams(
                r_s=shared.r_s,
                r_a=a_secrets.r,
                r_b=b_secrets.r,
                u_a=alice.source_voltage(phase),
                u_b=bob.source_voltage(phase),
            )
            if injecting:
                a_obs, b_obs = solve_loop_with_injection(
                    params, Current(config.inject_current)
                )
            else:
                a_obs = b_obs = solve_loop(params)
            phase_obs[phase] = (a_obs, b_obs)

            # every endpoint measurement travels as a framed analog sample;
            # Eve's tap sits on Alice's side of the injection node
            line_to_alice.send(encode_sample(TranscriptEntry(k, phase, a_obs), t_seq))
            line_to_bob.send(encode_sample(TranscriptEntry(k, phase, b_obs), t_seq))
            t_seq += 1
            sim.entries.append(TranscriptEntry(k, phase, a_obs))
            delivered_a, _ = decode_sample(decode_frame(line_to_alice.recv())[1])
            delivered_b, _ = decode_sample(decode_frame(line_to_bob.recv())[1])
            alice.receive(delivered_a)
            bob.receive(delivered_b)

            # authenticated endpoint comparison (the active-attack defense)
            rep_a = make_report(
                Role.ALICE, k, phase, a_obs, shared.auth_key, config.tag_algo
            )
            rep_b = make_report(
                Role.BOB, k, phase, b_obs, shared.auth_key, config.tag_algo
            )
            if forging:
                to_alice, to_bob = forge_passing_pair(
                    rep_a, rep_b, shared.auth_key, config.tag_algo
                )
                sim.forged = True
            else:
                to_alice, to_bob = rep_b, rep_a
            sim.verdicts.append(
                verify_round(
                    rep_a, to_alice, shared.auth_key,
                    config.defense_tolerance, config.tag_algo,
                )
            )
            sim.verdicts.append(
                verify_round(
                    to_bob, rep_b, shared.auth_key,
                    config.defense_tolerance, config.tag_algo,
                )
            )

        if noisy:
            # parties only have noisy meters here; the exact state machines
            # are bypassed and extraction snaps to the nearest palette value
            record = _noisy_round(
                config, shared, k, a_secrets, b_secrets, phase_obs,
                palette_ra, palette_rb, noisy_pairs_a, noisy_pairs_b,
            )
        else:
            alice_view = alice.finish_round()
            bob_view = bob.finish_round()
            record = RoundRecord(
                round_k=k,
                baseline=phase_obs[Phase.BASELINE][0],
                alice_perturbed=phase_obs[Phase.ALICE_PERTURB][0],
                bob_perturbed=phase_obs[Phase.BOB_PERTURB][0],
                deltas=(config.delta_ua, config.delta_ub),
                alice_view=alice_view,
                bob_view=bob_view,
            )
        sim.records.append(record)

    if noisy:
        sim.alice_key = derive_key_from_pairs(noisy_pairs_a, palette_ra, palette_rb)
        sim.bob_key = derive_key_from_pairs(noisy_pairs_b, palette_ra, palette_rb)
    else:
        sim.alice_key = alice.derive_key(palette_ra, palette_rb)
        sim.bob_key = bob.derive_key(palette_ra, palette_rb)

    for frame in eve_tap.frames:
        msg_type, payload = decode_frame(frame)
        if msg_type == ANALOG_SAMPLE:
            entry, _ = decode_sample(payload)
            sim.recording.record(entry)
    return sim


def _noisy_round(
    config, shared, k, a_secrets, b_secrets, phase_obs,
    palette_ra, palette_rb, pairs_a, pairs_b,
) -> RoundRecord:
    """Noise-layer extraction: every meter adds noise; values snap to palettes.

    The line itself stays exact (sources and resistors are noise-free by
    assumption); only the endpoint measurements pick up Gaussian error.
    Each party keeps exact knowledge of its own draw.
    """

    def meter(obs: LineObservation, label: str, phase: Phase):
        return observe_with_noise(
            obs,
            config.sigma_u,
            config.sigma_i,
            derive_seed(config.seed, "noise", label, k, phase.value),
        )

    base_a = meter(phase_obs[Phase.BASELINE][0], "alice", Phase.BASELINE)
    pert_a = meter(phase_obs[Phase.ALICE_PERTURB][0], "alice", Phase.ALICE_PERTURB)
    base_b = meter(phase_obs[Phase.BASELINE][1], "bob", Phase.BASELINE)
    pert_b = meter(phase_obs[Phase.BOB_PERTURB][1], "bob", Phase.BOB_PERTURB)
    r_b_est, u_b_est = extract_with_rounding(
        shared.r_s, base_a, pert_a, palette_rb,
        config.palette_ub or palette_rb, Role.ALICE,
    )
    r_a_est, u_a_est = extract_with_rounding(
        shared.r_s, base_b, pert_b, palette_ra,
        config.palette_ua or palette_ra, Role.BOB,
    )
    pairs_a.append((k, a_secrets.r.value, r_b_est))
    pairs_b.append((k, r_a_est, b_secrets.r.value))
    return RoundRecord(
        round_k=k,
        baseline=phase_obs[Phase.BASELINE][0],
        alice_perturbed=phase_obs[Phase.ALICE_PERTURB][0],
        bob_perturbed=phase_obs[Phase.BOB_PERTURB][0],
        deltas=(config.delta_ua, config.delta_ub),
        alice_view=(Resistance(r_b_est), Voltage(u_b_est)),
        bob_view=(Resistance(r_a_est), Voltage(u_a_est)),
    )


@dataclass
class _ExpanderSim:
    truth: list[tuple[PartySecrets, PartySecrets]]
    messages: list[ExpanderMessage]
    alice_key: Key
    bob_key: Key
    x_pairs: list[tuple[Fraction, Fraction]]


def _run_expander(config: ExperimentConfig, shared: SharedSecret) -> _ExpanderSim:
    """The hardware-free exchange: one batched public message per party."""
    modulus = config.modulus if config.mode == "expander-modular" else None
    palette_ra = config.effective_palette_ra()
    palette_rb = config.effective_palette_rb()
    r_s = int(shared.r_s.value)

    randoms_a = [
        _draw_integer(palette_ra, derive_seed(config.seed, "alice", k))
        for k in range(config.rounds)
    ]
    randoms_b = [
        _draw_integer(palette_rb, derive_seed(config.seed, "bob", k))
        for k in range(config.rounds)
    ]
    msg_a = expand(r_s, randoms_a, modulus, sender="alice")
    msg_b = expand(r_s, randoms_b, modulus, sender="bob")

    # the public exchange crosses the tapped transport as real frames
    eve_tap = Wiretap()
    link = Duplex(taps=(eve_tap,))
    link.a_to_b.send(encode_frame(EXPANDER_MSG, encode_expander_payload(msg_a)))
    link.b_to_a.send(encode_frame(EXPANDER_MSG, encode_expander_payload(msg_b)))
    link.a_to_b.recv()
    link.b_to_a.recv()

    # each party recovers the partner's randoms and derives the same key
    bob_view_of_a = recover_partner_randoms(msg_a, r_s)
    alice_view_of_b = recover_partner_randoms(msg_b, r_s)
    pairs_alice = [
        (k, Fraction(randoms_a[k]), Fraction(alice_view_of_b[k]))
        for k in range(config.rounds)
    ]
    pairs_bob = [
        (k, Fraction(bob_view_of_a[k]), Fraction(randoms_b[k]))
        for k in range(config.rounds)
    ]
    x_pairs = [
        (Fraction(msg_a.x_list[k]), Fraction(msg_b.x_list[k]))
        for k in range(config.rounds)
    ]
    return _ExpanderSim(
        truth=[],
        messages=[msg_a, msg_b],
        alice_key=derive_key_from_pairs(pairs_alice, palette_ra, palette_rb),
        bob_key=derive_key_from_pairs(pairs_bob, palette_ra, palette_rb),
        x_pairs=x_pairs,
    )


def simulate_x_pairs(config: ExperimentConfig, rounds: int):
    """The (x_a, x_b) series one seeded experiment exposes publicly.

    Returns (x_pairs, (palette_s, palette_a, palette_b), modulus). Used by
    the entropy-trajectory analysis.
    """
    cfg = replace(config, rounds=rounds) if rounds != config.rounds else config
    shared = shared_secret_for(cfg)
    palettes = (cfg.palette_rs, cfg.effective_palette_ra(), cfg.effective_palette_rb())
    if cfg.mode == "circuit":
        sim = _run_circuit(cfg, shared)
        return x_pairs_from_recording(sim.recording), palettes, None
    sim = _run_expander(cfg, shared)
    modulus = cfg.modulus if cfg.mode == "expander-modular" else None
    return sim.x_pairs, palettes, modulus


def run_experiment(config: ExperimentConfig, out_dir=None) -> RunResult:
    """Execute the configured experiment end to end and analyze the take.

    Runs the honest exchange with Eve tapping (and injecting, if an attack
    is configured), derives both keys, runs the configured analyses, and —
    when an output directory is given — persists the transcript, the
    machine-readable reports, and the figures.
    """
    chash = config_hash(config)
    shared = shared_secret_for(config)
    modulus = config.modulus if config.mode == "expander-modular" else None

    if config.mode == "circuit":
        sim = _run_circuit(config, shared)
        truth, entries, records = sim.truth, sim.entries, sim.records
        messages: list[ExpanderMessage] = []
        recording = sim.recording
        verdicts, forged = sim.verdicts, sim.forged
        alice_key, bob_key = sim.alice_key, sim.bob_key
        x_pairs = x_pairs_from_recording(recording)
    else:
        esim = _run_expander(config, shared)
        truth, entries, records = esim.truth, [], []
        messages = esim.messages
        recording = EveRecording()
        verdicts, forged = [], False
        alice_key, bob_key = esim.alice_key, esim.bob_key
        x_pairs = esim.x_pairs

    # Eve's passive haul: X values and both voltages, from public data only
    eve_x = list(x_pairs)
    eve_voltages: list[tuple[Fraction, Fraction]] = []
    eve_voltages_exact = True
    if config.mode == "circuit":
        for round_k in recording.complete_rounds():
            x = eve_x_values(recording, round_k)
            u_a, u_b = eve_recover_voltages(x, recording.get(round_k, Phase.BASELINE))
            eve_voltages.append((u_a.value, u_b.value))
            a_secrets, b_secrets = truth[round_k]
            if (u_a.value, u_b.value) != (a_secrets.u.value, b_secrets.u.value):
                eve_voltages_exact = False

    palette_a = config.effective_palette_ra()
    palette_b = config.effective_palette_rb()
    posterior = None
    trajectory: list[EntropyPoint] = []
    if len(config.palette_rs) <= DEFAULT_CANDIDATE_CAP:
        posterior = posterior_from_x_pairs(
            x_pairs, config.palette_rs, palette_a, palette_b, modulus
        )
        trajectory = posterior_trajectory(
            x_pairs, config.palette_rs, palette_a, palette_b, modulus
        )

    crack = None
    crack_matches = None
    if config.compromise != "none":
        crack = _crack(config, shared, recording, x_pairs, palette_a, palette_b, modulus)
        if crack.key is not None:
            crack_matches = crack.key.bits == alice_key.bits

    equivalence_ok = None
    if config.mode == "circuit" and not config.injecting():
        secrets_int = [
            (a.r.value, b.r.value) for a, b in truth
        ]
        if all(
            r.denominator == 1 for pair in secrets_int for r in pair
        ) and shared.r_s.value.denominator == 1:
            equivalence_ok = equivalence_check(
                entries,
                int(shared.r_s.value),
                [(int(a), int(b)) for a, b in secrets_int],
            )

    result = RunResult(
        config=config,
        config_hash=chash,
        shared=shared,
        truth=truth,
        entries=entries,
        records=records,
        expander_messages=messages,
        alice_key=alice_key,
        bob_key=bob_key,
        eve_recording=recording,
        eve_x=eve_x,
        eve_voltages=eve_voltages,
        eve_voltages_exact=eve_voltages_exact,
        posterior=posterior,
        trajectory=trajectory,
        crack=crack,
        crack_matches_key=crack_matches,
        verdicts=verdicts,
        forged=forged,
        equivalence_ok=equivalence_ok,
    )

    if out_dir is not None:
        _persist(result, Path(out_dir))
    return result


def _crack(config, shared, recording, x_pairs, palette_a, palette_b, modulus) -> CrackResult:
    """Eve's deterministic reconstruction once r_s is in her hands."""
    if config.mode == "circuit":
        return eve_crack_with_secret(recording, shared.r_s, palette_a, palette_b)
    # expander modes: subtraction inverts the public sums directly
    from .eavesdropper import CrackedRound

    r_s = int(shared.r_s.value)
    rounds = []
    pairs = []
    for k, (x_a, x_b) in enumerate(x_pairs):
        if modulus is not None:
            r_a = (int(x_a) - r_s) % modulus
            r_b = (int(x_b) - r_s) % modulus
        else:
            r_a = x_a - r_s
            r_b = x_b - r_s
        rounds.append(CrackedRound(k, Fraction(r_a), Fraction(r_b), Fraction(0), Fraction(0)))
        pairs.append((k, Fraction(r_a), Fraction(r_b)))
    if not rounds:
        return CrackResult(rounds=(), key=None, complete=False)
    key = derive_key_from_pairs(pairs, palette_a, palette_b)
    return CrackResult(rounds=tuple(rounds), key=key, complete=True)


def _persist(result: RunResult, out_dir: Path) -> None:
    from . import figures, reports

    out_dir.mkdir(parents=True, exist_ok=True)
    transcript_path = out_dir / "transcript.jsonl"
    write_transcript(
        transcript_path,
        result.config_hash,
        result.config.mode,
        result.entries,
        result.expander_messages,
    )
    result.transcript_path = str(transcript_path)
    result.report_paths = reports.write_all(result, out_dir)
    result.report_paths += figures.render_all(result, out_dir)


def replay_attack(
    transcript_path, r_s: Resistance, palette_a: Palette, palette_b: Palette
) -> CrackResult:
    """Load a stored transcript — however old — and crack it with r_s.

    The retroactivity demonstration as a standalone operation: the input is
    nothing but previously recorded public data plus the shared secret.
    """
    data = read_transcript(transcript_path)
    if data.entries:
        recording = EveRecording(data.entries)
        return eve_crack_with_secret(recording, r_s, palette_a, palette_b)
    # expander transcript: invert the recorded sums
    from .eavesdropper import CrackedRound

    by_sender = {m.sender: m for m in data.expander_messages}
    if "alice" not in by_sender or "bob" not in by_sender:
        return CrackResult(rounds=(), key=None, complete=False)
    msg_a, msg_b = by_sender["alice"], by_sender["bob"]
    r_s_int = int(r_s.value)
    pairs = []
    rounds = []
    for k in range(min(len(msg_a.x_list), len(msg_b.x_list))):
        if msg_a.modulus is not None:
            r_a = (msg_a.x_list[k] - r_s_int) % msg_a.modulus
            r_b = (msg_b.x_list[k] - r_s_int) % msg_a.modulus
        else:
            r_a = msg_a.x_list[k] - r_s_int
            r_b = msg_b.x_list[k] - r_s_int
        rounds.append(CrackedRound(k, Fraction(r_a), Fraction(r_b), Fraction(0), Fraction(0)))
        pairs.append((k, Fraction(r_a), Fraction(r_b)))
    if not rounds:
        return CrackResult(rounds=(), key=None, complete=False)
    key = derive_key_from_pairs(pairs, palette_a, palette_b)
    return CrackResult(rounds=tuple(rounds), key=key, complete=True)
