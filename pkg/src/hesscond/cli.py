"""Command-line driver for the experiment sweeps.

Subcommands: ``table1``, ``sweep-cond``, ``sweep-bounds``, ``sweep-cg``,
``spectrum``. Flags feed a :class:`~hesscond.experiments.SweepConfig`;
``--config FILE`` points at a JSON file whose values override any flags.
Exit code is 0 only when every cell of the requested sweep succeeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import (
    SweepConfig,
    TABLE1_LENGTHSCALES,
    config_from_json,
    run_bounds_sweep,
    run_cg_sweep,
    run_condition_sweep,
    run_spectrum_export,
    run_table1,
)
from .obs_operators import CANONICAL_KINDS


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; expected comma-separated floats")
    if not values:
        raise argparse.ArgumentTypeError("grid must contain at least one value")
    return values


def _parse_cell(text: str) -> tuple[str, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"bad cell {text!r}; expected OPERATOR:L_B:L_R (e.g. alternate:0.5:0.1)"
        )
    return parts[0], float(parts[1]), float(parts[2])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hesscond",
        description="Hessian conditioning and CG convergence experiments "
        "on the unit-circle grid.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("table1", "extreme eigenvalues of the SOAR covariance matrices"),
        ("sweep-cond", "condition number of the preconditioned Hessian per grid cell"),
        ("sweep-bounds", "all condition-number bounds per grid cell"),
        ("sweep-cg", "conjugate-gradient iteration counts per grid cell"),
        ("spectrum", "update-spectrum export for named cells"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--n", type=int, default=200, help="state dimension (default 200)")
        cmd.add_argument("--p", type=int, default=100, help="observation count (default 100)")
        cmd.add_argument(
            "--operator",
            action="append",
            choices=CANONICAL_KINDS,
            help="operator kind; repeatable (default: all four)",
        )
        cmd.add_argument("--lb-grid", type=_parse_grid, help="comma-separated L_B values")
        cmd.add_argument("--lr-grid", type=_parse_grid, help="comma-separated L_R values")
        cmd.add_argument("--seed", type=int, default=42, help="seed for the random operator")
        cmd.add_argument("--tol", type=float, default=1e-10, help="CG tolerance")
        cmd.add_argument("--out", type=Path, default=Path("."), help="output directory")
        cmd.add_argument(
            "--config",
            type=Path,
            help="JSON config file; its values override the flags",
        )
        if name == "sweep-cg":
            cmd.add_argument(
                "--traces", action="store_true", help="also write residual traces"
            )
        if name == "spectrum":
            cmd.add_argument(
                "--cell",
                action="append",
                type=_parse_cell,
                required=True,
                help="OPERATOR:L_B:L_R; repeatable",
            )
    return parser


def _config_from_args(args: argparse.Namespace) -> SweepConfig:
    default_grid = SweepConfig().lb_grid
    if args.command == "table1":
        default_grid = TABLE1_LENGTHSCALES
    cfg = SweepConfig(
        n=args.n,
        p=args.p,
        lb_grid=args.lb_grid or default_grid,
        lr_grid=args.lr_grid or default_grid,
        operators=tuple(args.operator) if args.operator else CANONICAL_KINDS,
        seed=args.seed,
        tolerance=args.tol,
        output_dir=args.out,
    )
    if args.config is not None:
        with open(args.config) as f:
            overrides = json.load(f)
        merged = cfg.to_json_dict()
        merged.update(overrides)
        cfg = config_from_json(merged)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = cfg.output_dir
    rows: list[dict] = []
    if args.command == "table1":
        rows = run_table1(cfg, out / "table1.csv")
        print(f"wrote {out / 'table1.csv'} ({len(rows)} rows)")
    elif args.command == "sweep-cond":
        rows = run_condition_sweep(cfg, out / "condition_sweep.csv")
        print(f"wrote {out / 'condition_sweep.csv'} ({len(rows)} rows)")
    elif args.command == "sweep-bounds":
        rows = run_bounds_sweep(cfg, out / "bounds_sweep.csv")
        print(f"wrote {out / 'bounds_sweep.csv'} ({len(rows)} rows)")
    elif args.command == "sweep-cg":
        trace_path = out / "cg_traces.json" if args.traces else None
        rows = run_cg_sweep(cfg, out / "cg_sweep.csv", trace_path=trace_path)
        print(f"wrote {out / 'cg_sweep.csv'} ({len(rows)} rows)")
    elif args.command == "spectrum":
        records = run_spectrum_export(cfg, args.cell, out_dir=out)
        print(f"wrote {len(records)} spectrum files to {out}")
        return 0
    failed = [r for r in rows if r.get("status") not in (None, "ok")]
    if failed:
        print(f"{len(failed)} cells failed; first: {failed[0]}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
