"""Command-line runner: parse config, execute studies, emit artifacts."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, RunConfig, parse_config, serialize_config
from .experiments import (
    EXPERIMENT_FUNCS,
    EXPERIMENT_IDS,
    compute_ladder_cell,
    compute_packet_cell,
)
from .figures import render_figure
from .reporting import emit_report, write_csv, write_manifest, write_summary

__all__ = ["main"]

OUT_DIR_ENV = "CHLAB_OUT"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the selected experiments and write reports")
    run.add_argument("--config", type=Path, default=None, help="key = value configuration file")
    run.add_argument("--experiments", default=None, help="comma list from e1..e5, or 'all'")
    run.add_argument("--out", type=Path, default=None, help="output directory (else $CHLAB_OUT, else config)")
    run.add_argument("--workers", type=int, default=None, help="worker processes (0 = available parallelism)")
    run.add_argument(
        "--resolution-x2",
        action="store_true",
        help="double the grid resolution at fixed lambda (robustness rerun)",
    )
    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        cfg = parse_config(text)
    else:
        cfg = RunConfig()
    if args.experiments is not None:
        ids = tuple(e.strip() for e in args.experiments.split(",") if e.strip())
        if ids == ("all",):
            ids = EXPERIMENT_IDS
        cfg = replace(cfg, experiments=ids)
    if args.out is not None:
        cfg = replace(cfg, out_dir=str(args.out))
    elif os.environ.get(OUT_DIR_ENV):
        cfg = replace(cfg, out_dir=os.environ[OUT_DIR_ENV])
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    if args.resolution_x2:
        cfg = replace(cfg, resolution_multiplier=2 * cfg.resolution_multiplier)
    return cfg.validated()


def _prepare_out_dir(out_dir: Path) -> None:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write-probe"
        probe.write_text("ok")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out_dir} is not writable: {exc}") from exc


def _star_packet(args):
    return compute_packet_cell(*args)


def _star_ladder(args):
    return compute_ladder_cell(*args)


def _map_cells(fn, arg_list, workers: int):
    if workers <= 1 or len(arg_list) <= 1:
        return [fn(a) for a in arg_list]
    with ProcessPoolExecutor(max_workers=min(workers, len(arg_list))) as pool:
        return list(pool.map(fn, arg_list))


def run_command(cfg: RunConfig) -> int:
    out_dir = Path(cfg.out_dir)
    _prepare_out_dir(out_dir)
    emitted: list[str] = []

    config_path = out_dir / "config.txt"
    config_path.write_text(serialize_config(cfg))
    emitted.append("config.txt")

    spec = cfg.ladder_spec()
    solver_cfg = cfg.solver_config()
    workers = cfg.workers if cfg.workers > 0 else (os.cpu_count() or 1)

    ids = cfg.experiments
    need_packet = "e1" in ids
    need_ladder = any(e in ids for e in ("e2", "e3", "e4", "e5"))
    need_actual = any(e in ids for e in ("e3", "e4", "e5"))

    packet_cells = {}
    ladder_cells = {}
    try:
        if need_packet:
            cells = _map_cells(_star_packet, [(lam, spec) for lam in spec.lambdas], workers)
            packet_cells = {c.lam: c for c in cells}
        if need_ladder:
            args = [(lam, spec, solver_cfg, need_actual) for lam in spec.lambdas]
            cells = _map_cells(_star_ladder, args, workers)
            ladder_cells = {c.lam: c for c in cells}
    except Exception as exc:  # escalated blow-up or resolution failure
        write_manifest(out_dir / "MANIFEST", emitted, complete=False, note=str(exc))
        print(f"chlab: run aborted: {exc}", file=sys.stderr)
        return 1

    verdicts = []
    for eid in EXPERIMENT_IDS:
        if eid not in ids:
            continue
        fn = EXPERIMENT_FUNCS[eid]
        if eid == "e1":
            report = fn(spec, cells=packet_cells)
        else:
            report = fn(spec, solver_cfg, cells=ladder_cells)
        emitted.extend(emit_report(report, out_dir))
        fig = render_figure(report, out_dir)
        if fig:
            emitted.append(fig)
        verdicts.extend(report.verdicts)

    if ladder_cells:
        rows = [
            (lam, r.omega, r.t, r.hs, r.c1, r.dt_used, 0)
            for lam in spec.lambdas
            for r in ladder_cells[lam].low_rows
        ]
        write_csv(
            out_dir / "low_trajectories.csv",
            ("lambda", "omega", "t", "hs_norm", "c1_norm", "dt", "blowup_flag"),
            rows,
        )
        emitted.append("low_trajectories.csv")

    write_summary(out_dir / "summary.csv", verdicts)
    emitted.append("summary.csv")
    write_manifest(out_dir / "MANIFEST", emitted, complete=True)

    n_pass = sum(1 for v in verdicts if v.passed)
    for v in verdicts:
        status = "pass" if v.passed else "FAIL"
        print(f"{status}  {v.verdict_id}: measured={v.measured:.6g} {v.comparator} {v.threshold:.6g}")
    print(f"chlab: {n_pass}/{len(verdicts)} verdicts passed; outputs in {out_dir}")
    return 0 if n_pass == len(verdicts) else 1


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        _prepare_out_dir(Path(cfg.out_dir))
    except ConfigError as exc:
        print(f"chlab: config error: {exc}", file=sys.stderr)
        return 2
    return run_command(cfg)


if __name__ == "__main__":
    sys.exit(main())
