"""Figure rendering for the report path.

Each experiment's curves are drawn to a PNG next to the delimited
output.  The same numbers are always also emitted as two-column text
files, so plots are a convenience, not the record.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiments import ExperimentReport

__all__ = ["render_figure"]


def _loglog_panel(ax, report: ExperimentReport, prefix: str, title: str) -> bool:
    drawn = False
    for name, (xs, ys) in sorted(report.curves.items()):
        if not name.startswith(prefix):
            continue
        if min(ys) <= 0:
            continue
        ax.loglog(xs, ys, marker="o", label=name[len(prefix):].lstrip("_") or name)
        drawn = True
    if drawn:
        ax.set_xlabel("lambda")
        ax.set_title(title)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=7)
    return drawn


def render_figure(report: ExperimentReport, out_dir: Path) -> str | None:
    """Render one experiment's figure; returns the emitted relative path."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    eid = report.experiment_id
    drawn = False
    if eid == "e1":
        for name, (xs, ys) in sorted(report.curves.items()):
            ax.semilogx(xs, ys, marker="o", label=name.removeprefix("e1_"))
            drawn = True
        ax.axhline(1.0, color="k", lw=0.8, ls="--")
        ax.set_xlabel("lambda")
        ax.set_ylabel("ratio to limiting norm")
        ax.set_title("packet-norm ratio vs carrier frequency")
        ax.legend(fontsize=7)
        ax.grid(True, which="both", alpha=0.3)
    elif eid == "e2":
        drawn = _loglog_panel(ax, report, "e2_", "residual H1 size vs lambda")
        ax.set_ylabel("H1 norm")
    elif eid == "e3":
        drawn = _loglog_panel(ax, report, "e3_", "approximate-vs-actual distance (H1)")
        ax.set_ylabel("norm")
    elif eid == "e4":
        drawn = _loglog_panel(ax, report, "e4_", "approximate-vs-actual distance (Hs)")
        ax.set_ylabel("Hs norm")
    elif eid == "e5":
        if "e5_d0" in report.curves:
            xs, ys = report.curves["e5_d0"]
            ax.loglog(xs, ys, marker="o", label="distance at t=0")
            drawn = True
        ax.set_xlabel("lambda")
        ax.set_ylabel("Hs distance")
        ax.set_title("family separation")
        if "e5_d_t_top" in report.curves:
            ts, ds = report.curves["e5_d_t_top"]
            inset = ax.inset_axes([0.55, 0.55, 0.4, 0.4])
            inset.plot(ts, ds, marker="s", color="C1")
            inset.set_xlabel("t", fontsize=7)
            inset.set_ylabel("d(t), top rung", fontsize=7)
            inset.tick_params(labelsize=6)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=7)
    if not drawn:
        plt.close(fig)
        return None
    fig_dir = out_dir / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    path = fig_dir / f"{eid}.png"
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return str(path.relative_to(out_dir))
