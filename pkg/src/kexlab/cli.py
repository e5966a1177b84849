"""Command-line interface.

Subcommands: run, crack, entropy, expander, inject, verify-transcript.
Every command prints a human summary to stdout, writes machine-readable
reports (plus figures) when an output directory is given, and exits
nonzero on any alarm or error.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from .circuit import Resistance
from .config import (
    SEED_ENV_VAR,
    load_config,
    load_palettes,
    resolve_seed,
)
from .entropy import posterior_from_x_pairs, posterior_trajectory
from .errors import KexlabError
from .expander import expand, recover_partner_randoms
from .harness import replay_attack, run_experiment
from .rational import format_rational, parse_rational
from .transcript_io import read_transcript, verify_transcript_data

DEFAULT_PLAIN_RANDOM_RANGE = 10**6


def _add_out(parser):
    parser.add_argument("--out", type=Path, default=None, help="output directory")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kexlab",
        description="resistive key-exchange laboratory: simulate, eavesdrop, crack",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured experiment end to end")
    p_run.add_argument("--config", required=True, type=Path)
    p_run.add_argument("--seed", type=int, default=None, help=f"overrides {SEED_ENV_VAR} and the config")
    _add_out(p_run)

    p_crack = sub.add_parser("crack", help="crack a stored transcript with a known r_s")
    p_crack.add_argument("--transcript", required=True, type=Path)
    p_crack.add_argument("--rs", required=True, help="shared-secret resistance (rational)")
    p_crack.add_argument("--palettes", required=True, type=Path)
    _add_out(p_crack)

    p_entropy = sub.add_parser("entropy", help="brute-force posterior over r_s candidates")
    p_entropy.add_argument("--transcript", required=True, type=Path)
    p_entropy.add_argument("--palettes", required=True, type=Path)
    p_entropy.add_argument("--per-round", action="store_true", help="emit the whole trajectory")
    _add_out(p_entropy)

    p_exp = sub.add_parser("expander", help="hardware-free expansion demo")
    p_exp.add_argument("--rs", required=True, type=int)
    p_exp.add_argument("--modulus", type=int, default=None)
    p_exp.add_argument("--count", required=True, type=int)
    p_exp.add_argument("--seed", type=int, default=0)
    _add_out(p_exp)

    p_inject = sub.add_parser("inject", help="current-injection attack against a configured run")
    p_inject.add_argument("--config", required=True, type=Path)
    p_inject.add_argument("--current", required=True, help="injected current in amperes (rational)")
    p_inject.add_argument("--compromise", choices=["rs-and-authkey"], default=None)
    p_inject.add_argument("--seed", type=int, default=None)
    _add_out(p_inject)

    p_verify = sub.add_parser("verify-transcript", help="parse and structurally check a transcript file")
    p_verify.add_argument("path", type=Path)

    return parser


def _cmd_run(args) -> int:
    from dataclasses import replace

    config = load_config(args.config)
    config = replace(config, seed=resolve_seed(config, args.seed))
    result = run_experiment(config, out_dir=args.out)
    from .reports import human_summary

    print(human_summary(result))
    if args.out:
        print(f"transcript: {result.transcript_path}")
        for p in result.report_paths:
            print(f"report: {p}")
    return 1 if result.alarmed else 0


def _cmd_crack(args) -> int:
    palette_s, palette_a, palette_b, _ = load_palettes(args.palettes)
    r_s = Resistance(parse_rational(args.rs))
    if r_s.value not in palette_s:
        print(f"note: r_s {args.rs} is not in the declared palette", file=sys.stderr)
    crack = replay_attack(args.transcript, r_s, palette_a, palette_b)
    if crack.key is None:
        print("crack: nothing recoverable (empty or partial recording)")
        return 1
    print(f"crack: complete={crack.complete}, rounds={len(crack.rounds)}")
    for r in crack.rounds:
        print(
            f"  round {r.round_k}: r_a={format_rational(r.r_a)} r_b={format_rational(r.r_b)} "
            f"u_a={format_rational(r.u_a)} u_b={format_rational(r.u_b)}"
        )
    print(f"key: {crack.key.bits}")
    if args.out:
        from .reports import write_crack_csv

        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / "crack_rounds.csv"
        write_crack_csv(crack, path)
        print(f"report: {path}")
    return 0


def _x_pairs_from_file(path):
    from fractions import Fraction

    from .eavesdropper import EveRecording
    from .entropy import x_pairs_from_recording

    data = read_transcript(path)
    if data.entries:
        return x_pairs_from_recording(EveRecording(data.entries)), None
    by_sender = {m.sender: m for m in data.expander_messages}
    if "alice" not in by_sender or "bob" not in by_sender:
        return [], None
    msg_a, msg_b = by_sender["alice"], by_sender["bob"]
    n = min(len(msg_a.x_list), len(msg_b.x_list))
    pairs = [(Fraction(msg_a.x_list[k]), Fraction(msg_b.x_list[k])) for k in range(n)]
    return pairs, msg_a.modulus


def _cmd_entropy(args) -> int:
    palette_s, palette_a, palette_b, modulus = load_palettes(args.palettes)
    x_pairs, file_modulus = _x_pairs_from_file(args.transcript)
    modulus = file_modulus if file_modulus is not None else modulus
    report = posterior_from_x_pairs(x_pairs, palette_s, palette_a, palette_b, modulus)
    print(
        f"posterior after {report.rounds_used} round(s): "
        f"h_rs={report.h_rs_bits:.3f} bits, h_key={report.h_key_bits:.3f} bits, "
        f"prior={report.prior_bits:.3f} bits, "
        f"{report.consistent_count}/{len(report.candidates)} candidates consistent"
    )
    trajectory = []
    if args.per_round:
        trajectory = posterior_trajectory(x_pairs, palette_s, palette_a, palette_b, modulus)
        for p in trajectory:
            print(
                f"  k={p.rounds}: h_rs={p.h_rs_bits:.3f} h_key={p.h_key_bits:.3f} "
                f"key_bits={p.key_bit_length} consistent={p.consistent_count}"
            )
    if args.out:
        from . import figures
        from .reports import write_posterior_csv, write_trajectory_csv

        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / "posterior_candidates.csv"
        write_posterior_csv(report, path)
        print(f"report: {path}")
        if len(report.candidates) <= 64:
            fig_path = args.out / "posterior.png"
            figures.save_posterior_figure(report, fig_path)
            print(f"figure: {fig_path}")
        if trajectory:
            path = args.out / "entropy_trajectory.csv"
            write_trajectory_csv(trajectory, path)
            print(f"report: {path}")
            fig_path = args.out / "entropy_trajectory.png"
            figures.save_entropy_figure(trajectory, report.prior_bits, fig_path)
            print(f"figure: {fig_path}")
    return 0


def _cmd_expander(args) -> int:
    if args.count < 0:
        print("count must be >= 0", file=sys.stderr)
        return 1
    rng = random.Random(args.seed)
    top = args.modulus if args.modulus is not None else DEFAULT_PLAIN_RANDOM_RANGE
    randoms = [rng.randrange(top) for _ in range(args.count)]
    msg = expand(args.rs, randoms, args.modulus)
    print(f"r_s={args.rs}" + (f" (mod {args.modulus})" if args.modulus else ""))
    for k, (r, x) in enumerate(zip(randoms, msg.x_list)):
        print(f"  k={k}: random={r} -> x={x}")
    recovered = recover_partner_randoms(msg, args.rs)
    print(f"recovery round-trip ok: {recovered == randoms}")
    if args.out:
        import json

        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / "expander.json"
        path.write_text(
            json.dumps(
                {
                    "r_s": args.rs,
                    "modulus": args.modulus,
                    "x_list": list(msg.x_list),
                },
                indent=2,
            )
            + "\n"
        )
        print(f"report: {path}")
    return 0


def _cmd_inject(args) -> int:
    from dataclasses import replace

    config = load_config(args.config)
    overrides = {
        "inject_current": parse_rational(args.current),
        "seed": resolve_seed(config, args.seed),
    }
    if args.compromise:
        overrides["compromise"] = args.compromise
    config = replace(config, **overrides)
    result = run_experiment(config, out_dir=args.out)
    from .reports import human_summary

    print(human_summary(result))
    if result.alarmed:
        print("ALARM: injection detected by the authenticated comparison")
        return 1
    if result.forged:
        print("undetected: adversary held the authentication key and forged the reports")
    return 0


def _cmd_verify(args) -> int:
    data = read_transcript(args.path)
    problems = verify_transcript_data(data)
    n_obs = len(data.entries)
    n_exp = len(data.expander_messages)
    print(
        f"transcript ok: mode={data.mode}, {n_obs} observation(s), "
        f"{n_exp} expander message(s), config_hash={data.config_hash[:12]}"
    )
    for p in problems:
        print(f"problem: {p}", file=sys.stderr)
    return 1 if problems else 0


_COMMANDS = {
    "run": _cmd_run,
    "crack": _cmd_crack,
    "entropy": _cmd_entropy,
    "expander": _cmd_expander,
    "inject": _cmd_inject,
    "verify-transcript": _cmd_verify,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except KexlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
