"""Artifact emission: CSV tables, curve files, verdict summary, manifest.

All floats are serialized with 17 significant digits so identical runs
produce byte-identical tables; the manifest carries the only timestamp.
"""

from __future__ import annotations

import datetime
from pathlib import Path

from .experiments import ExperimentReport, VerdictRecord

__all__ = [
    "fmt",
    "write_csv",
    "write_curve",
    "write_summary",
    "write_manifest",
    "emit_report",
]


def fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path: Path, header: tuple[str, ...], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def write_curve(path: Path, xs: list[float], ys: list[float]) -> None:
    """Two-column plain text, one (x, y) pair per line."""
    path.write_text("\n".join(f"{fmt(x)} {fmt(y)}" for x, y in zip(xs, ys)) + "\n")


def write_summary(path: Path, verdicts: list[VerdictRecord]) -> None:
    lines = ["verdict_id,measured,threshold,comparator,pass"]
    for v in verdicts:
        lines.append(f"{v.verdict_id},{fmt(v.measured)},{fmt(v.threshold)},{v.comparator},{str(v.passed).lower()}")
    path.write_text("\n".join(lines) + "\n")


def write_manifest(path: Path, entries: list[str], complete: bool, note: str = "") -> None:
    lines = [f"generated_at: {datetime.datetime.now(datetime.timezone.utc).isoformat()}"]
    lines.append(f"complete: {str(complete).lower()}")
    if note:
        lines.append(f"note: {note}")
    lines.extend(f"file: {e}" for e in sorted(entries))
    path.write_text("\n".join(lines) + "\n")


def emit_report(report: ExperimentReport, out_dir: Path) -> list[str]:
    """Write one experiment's CSV and curve files; return emitted paths."""
    emitted: list[str] = []
    if report.csv_rows:
        csv_path = out_dir / f"{report.experiment_id}.csv"
        write_csv(csv_path, report.csv_header, report.csv_rows)
        emitted.append(str(csv_path.relative_to(out_dir)))
    curves_dir = out_dir / "curves"
    for name, (xs, ys) in sorted(report.curves.items()):
        curves_dir.mkdir(parents=True, exist_ok=True)
        p = curves_dir / f"{name}.txt"
        write_curve(p, xs, ys)
        emitted.append(str(p.relative_to(out_dir)))
    return emitted
