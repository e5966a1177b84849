"""Report rendering: delimited tables, a JSON summary, and human text."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .rational import format_rational


def write_posterior_csv(report, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r_s_candidate", "consistent", "eliminated_at_round", "key_bits"])
        for cand in report.candidates:
            writer.writerow(
                [
                    format_rational(cand.r_s),
                    int(cand.consistent),
                    "" if cand.eliminated_at_round is None else cand.eliminated_at_round,
                    cand.key_bits or "",
                ]
            )


def write_trajectory_csv(points, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["rounds", "h_rs_bits", "h_key_bits", "key_bit_length", "consistent_count"]
        )
        for p in points:
            writer.writerow(
                [p.rounds, p.h_rs_bits, p.h_key_bits, p.key_bit_length, p.consistent_count]
            )


def write_crack_csv(crack, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "r_a", "r_b", "u_a", "u_b"])
        for r in crack.rounds:
            writer.writerow(
                [
                    r.round_k,
                    format_rational(r.r_a),
                    format_rational(r.r_b),
                    format_rational(r.u_a),
                    format_rational(r.u_b),
                ]
            )


def run_report_dict(result) -> dict:
    out = {
        "config_hash": result.config_hash,
        "mode": result.config.mode,
        "rounds": result.config.rounds,
        "alice_key": result.alice_key.bits,
        "bob_key": result.bob_key.bits,
        "keys_agree": result.keys_agree,
        "key_bit_length": len(result.alice_key.bits),
        "eve": {
            "x_values": [
                {"round": k, "x_a": format_rational(xa), "x_b": format_rational(xb)}
                for k, (xa, xb) in enumerate(result.eve_x)
            ],
            "recovered_voltages": [
                {"round": k, "u_a": format_rational(ua), "u_b": format_rational(ub)}
                for k, (ua, ub) in enumerate(result.eve_voltages)
            ],
            "voltage_recovery_exact": result.eve_voltages_exact,
        },
        "alarmed": result.alarmed,
        "forged_reports": result.forged,
        "equivalence_ok": result.equivalence_ok,
    }
    if result.posterior is not None:
        out["posterior"] = {
            "h_rs_bits": result.posterior.h_rs_bits,
            "h_key_bits": result.posterior.h_key_bits,
            "prior_bits": result.posterior.prior_bits,
            "consistent_candidates": result.posterior.consistent_count,
            "rounds_used": result.posterior.rounds_used,
        }
    if result.crack is not None:
        out["crack"] = {
            "complete": result.crack.complete,
            "key": None if result.crack.key is None else result.crack.key.bits,
            "matches_honest_key": result.crack_matches_key,
        }
    if result.verdicts:
        out["defense"] = {
            "checks": len(result.verdicts),
            "alarms": sum(1 for v in result.verdicts if v.alarm),
            "reasons": sorted({v.reason.value for v in result.verdicts if v.alarm}),
        }
    return out


def write_all(result, out_dir: Path) -> list[str]:
    """All machine-readable reports for one run; returns the paths written."""
    paths = []
    report_path = out_dir / "run_report.json"
    report_path.write_text(json.dumps(run_report_dict(result), indent=2) + "\n")
    paths.append(str(report_path))
    if result.posterior is not None:
        p = out_dir / "posterior_candidates.csv"
        write_posterior_csv(result.posterior, p)
        paths.append(str(p))
    if result.trajectory:
        p = out_dir / "entropy_trajectory.csv"
        write_trajectory_csv(result.trajectory, p)
        paths.append(str(p))
    if result.crack is not None:
        p = out_dir / "crack_rounds.csv"
        write_crack_csv(result.crack, p)
        paths.append(str(p))
    return paths


def human_summary(result) -> str:
    lines = [
        f"mode={result.config.mode} rounds={result.config.rounds} "
        f"config_hash={result.config_hash[:12]}",
        f"keys: {len(result.alice_key.bits)} bits, agree={result.keys_agree}",
    ]
    if result.eve_voltages:
        lines.append(
            f"eve: recovered voltages for {len(result.eve_voltages)} rounds "
            f"(exact={result.eve_voltages_exact}) using public data only"
        )
    if result.posterior is not None:
        lines.append(
            f"posterior: h_rs={result.posterior.h_rs_bits:.3f} bits, "
            f"h_key={result.posterior.h_key_bits:.3f} bits "
            f"(prior {result.posterior.prior_bits:.3f}), "
            f"{result.posterior.consistent_count} candidate(s) consistent"
        )
    if result.crack is not None and result.crack.key is not None:
        lines.append(
            f"crack: recovered {len(result.crack.key.bits)} key bits, "
            f"matches honest key: {result.crack_matches_key}"
        )
    if result.verdicts:
        alarms = sum(1 for v in result.verdicts if v.alarm)
        lines.append(
            f"defense: {alarms}/{len(result.verdicts)} checks alarmed"
            + (" (reports were forged in transit)" if result.forged else "")
        )
    if result.equivalence_ok is not None:
        lines.append(f"expander equivalence: {result.equivalence_ok}")
    return "\n".join(lines)
