"""Figure rendering for run and entropy reports (headless matplotlib)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .protocol import Phase

_PHASE_COLORS = {
    Phase.BASELINE: "tab:gray",
    Phase.ALICE_PERTURB: "tab:blue",
    Phase.BOB_PERTURB: "tab:orange",
}


def save_entropy_figure(points, prior_bits: float, path) -> None:
    """Adversary entropy stays flat while the key keeps growing."""
    rounds = [p.rounds for p in points]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.step(rounds, [p.h_rs_bits for p in points], where="post", label="H(r_s | transcript)")
    ax.step(
        rounds,
        [p.h_key_bits for p in points],
        where="post",
        linestyle="--",
        label="H(key | transcript)",
    )
    ax.axhline(prior_bits, color="tab:red", linewidth=0.8, label="prior bits")
    ax.set_xlabel("rounds")
    ax.set_ylabel("bits of uncertainty")
    ax.set_ylim(bottom=-0.1)
    ax2 = ax.twinx()
    ax2.plot(
        rounds,
        [p.key_bit_length for p in points],
        color="tab:green",
        marker=".",
        label="key length",
    )
    ax2.set_ylabel("key length (bits)")
    h1, l1 = ax.get_legend_handles_labels()
    h2, l2 = ax2.get_legend_handles_labels()
    ax.legend(h1 + h2, l1 + l2, loc="center right", fontsize=8)
    ax.set_title("key grows, adversary uncertainty does not")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_line_figure(entries, path) -> None:
    """The public wire trace: everything an eavesdropper ever sees."""
    xs = list(range(len(entries)))
    fig, (ax_u, ax_i) = plt.subplots(2, 1, sharex=True, figsize=(6.4, 4.8))
    for phase in Phase:
        sel = [(x, e) for x, e in zip(xs, entries) if e.phase is phase]
        if not sel:
            continue
        ax_u.plot(
            [x for x, _ in sel],
            [float(e.obs.u_c.value) for _, e in sel],
            ".",
            color=_PHASE_COLORS[phase],
            label=phase.name,
        )
        ax_i.plot(
            [x for x, _ in sel],
            [float(e.obs.i_c.value) for _, e in sel],
            ".",
            color=_PHASE_COLORS[phase],
        )
    ax_u.set_ylabel("U_c (V)")
    ax_i.set_ylabel("I_c (A)")
    ax_i.set_xlabel("observation index")
    ax_u.legend(fontsize=8)
    ax_u.set_title("public line observations")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_posterior_figure(report, path) -> None:
    """Candidate table at a glance: who survived and with what mass."""
    labels = [str(c.r_s) for c in report.candidates]
    masses = dict(report.posterior)
    values = [masses.get(c.r_s, 0.0) for c in report.candidates]
    colors = ["tab:blue" if c.consistent else "tab:red" for c in report.candidates]
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    ax.bar(range(len(labels)), values, color=colors)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=60, fontsize=7)
    ax.set_ylabel("posterior probability")
    ax.set_xlabel("r_s candidate (red = eliminated)")
    ax.set_title(
        f"h_rs = {report.h_rs_bits:.3f} bits after {report.rounds_used} round(s)"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_all(result, out_dir: Path) -> list[str]:
    """Figures accompanying the delimited reports of one run."""
    paths: list[str] = []
    if result.entries:
        p = out_dir / "line_observations.png"
        save_line_figure(result.entries, p)
        paths.append(str(p))
    if result.trajectory:
        p = out_dir / "entropy_trajectory.png"
        save_entropy_figure(
            result.trajectory,
            result.posterior.prior_bits if result.posterior else 0.0,
            p,
        )
        paths.append(str(p))
    if result.posterior is not None and len(result.posterior.candidates) <= 64:
        p = out_dir / "posterior.png"
        save_posterior_figure(result.posterior, p)
        paths.append(str(p))
    return paths
