"""Sweep harness reproducing the desk-scale experiments as CSV/JSON data.

Each ``run_*`` function evaluates one experiment over a :class:`SweepConfig`
grid and returns its rows; given an output path it also writes a CSV whose
first line is a ``#``-prefixed JSON comment carrying the config hash, seed,
tool version and a timestamp. Bodies are deterministic: identical configs
produce byte-identical rows (the timestamp lives only in the comment line),
every row embeds the config hash, and rows are sorted lexicographically by
(operator, L_B, L_R). Failures of individual cells are recorded as error
rows and the sweep continues.

Plot rendering is out of scope; these files are meant to be consumed by
external plotting tools.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .covariance import CircleGrid, CorrelationMatrix, build_soar
from .hessian import (
    HessianModel,
    count_clusters,
    kappa_via_rank_p,
    preconditioned_operator,
    update_eigenvalues,
)
from .bounds import compute_bounds_report
from .obs_operators import CANONICAL_KINDS, make_operator
from .solvers import conjugate_gradient, make_test_signal, symmetric_eigendecomposition

DEFAULT_GRID: tuple[float, ...] = tuple(np.round(np.arange(1, 21) * 0.05, 2))
TABLE1_LENGTHSCALES: tuple[float, ...] = (0.1, 0.33, 0.66, 0.99, 1.0)


@dataclass(frozen=True)
class SweepConfig:
    """Grids, seed and tolerances defining one experiment run."""

    n: int = 200
    p: int = 100
    lb_grid: tuple[float, ...] = DEFAULT_GRID
    lr_grid: tuple[float, ...] = DEFAULT_GRID
    operators: tuple[str, ...] = CANONICAL_KINDS
    seed: int = 42
    tolerance: float = 1e-10
    output_dir: Path = field(default_factory=lambda: Path("."))

    def __post_init__(self):
        object.__setattr__(self, "lb_grid", tuple(float(v) for v in self.lb_grid))
        object.__setattr__(self, "lr_grid", tuple(float(v) for v in self.lr_grid))
        object.__setattr__(self, "operators", tuple(self.operators))
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        if self.p <= 0 or self.n <= self.p:
            raise ValueError(f"need 0 < p < n, got n={self.n}, p={self.p}")
        if any(k in CANONICAL_KINDS for k in self.operators) and self.n != 2 * self.p:
            raise ValueError("canonical operators require n = 2p")
        unknown = [k for k in self.operators if k not in CANONICAL_KINDS]
        if unknown:
            raise ValueError(f"unknown operator kinds: {unknown}")
        if any(v <= 0 for v in self.lb_grid + self.lr_grid):
            raise ValueError("all lengthscales must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "lb_grid": list(self.lb_grid),
            "lr_grid": list(self.lr_grid),
            "operators": list(self.operators),
            "seed": self.seed,
            "tolerance": self.tolerance,
            "output_dir": str(self.output_dir),
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.to_json_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def config_from_json(d: dict) -> SweepConfig:
    base = SweepConfig()
    kwargs = {}
    for key in (
        "n", "p", "lb_grid", "lr_grid", "operators", "seed", "tolerance", "output_dir",
    ):
        if key in d:
            kwargs[key] = d[key]
    return replace(base, **kwargs)


def _soar_cache(n: int, grid: tuple[float, ...]) -> dict[float, CorrelationMatrix]:
    g = CircleGrid(n)
    return {L: build_soar(g, L) for L in sorted(set(grid))}


def _model(config: SweepConfig, kind: str, b: CorrelationMatrix, r: CorrelationMatrix) -> HessianModel:
    seed = config.seed if kind == "random-direct" else None
    h = make_operator(kind, config.p, config.n, seed=seed)
    return HessianModel(background=b, observation=r, operator=h)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, columns: list[str], rows: list[dict], meta: dict) -> None:
    """CSV with a one-line JSON header comment, then a deterministic body."""
    header = dict(meta)
    header["written_at"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write("# " + json.dumps(header, sort_keys=True) + "\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(_fmt(row.get(c)) for c in columns) + "\n")


def _meta(config: SweepConfig, experiment: str) -> dict:
    return {
        "experiment": experiment,
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "tool_version": __version__,
        "config": config.to_json_dict(),
    }


def _grid_contains(grid: tuple[float, ...], values: tuple[float, ...]) -> bool:
    return all(any(abs(g - v) < 1e-12 for g in grid) for v in values)


TABLE1_COLUMNS = ["matrix", "dim", "lengthscale", "lambda_min", "lambda_max", "config_hash"]


def run_table1(config: SweepConfig, out_path: Path | None = None) -> list[dict]:
    """Extreme eigenvalues of the SOAR R (p-by-p) and B (n-by-n) matrices.

    R rows use the observation lengthscale grid, B rows the background grid;
    both grids must include the canonical lengthscales 0.1, 0.33, 0.66,
    0.99 and 1.
    """
    if not (
        _grid_contains(config.lr_grid, TABLE1_LENGTHSCALES)
        and _grid_contains(config.lb_grid, TABLE1_LENGTHSCALES)
    ):
        raise ValueError(
            f"table1 grids must include the lengthscales {TABLE1_LENGTHSCALES}"
        )
    chash = config.config_hash()
    rows = []
    for matrix, dim, grid in (
        ("R", config.p, config.lr_grid),
        ("B", config.n, config.lb_grid),
    ):
        circle = CircleGrid(dim)
        for L in grid:
            evals, _ = symmetric_eigendecomposition(build_soar(circle, L).entries)
            rows.append(
                {
                    "matrix": matrix,
                    "dim": dim,
                    "lengthscale": L,
                    "lambda_min": float(evals[-1]),
                    "lambda_max": float(evals[0]),
                    "config_hash": chash,
                }
            )
    rows.sort(key=lambda r: (r["matrix"], r["lengthscale"]))
    if out_path is not None:
        write_csv(out_path, TABLE1_COLUMNS, rows, _meta(config, "table1"))
    return rows


COND_COLUMNS = [
    "operator", "lengthscale_b", "lengthscale_r", "kappa", "status", "config_hash",
]


def run_condition_sweep(config: SweepConfig, out_path: Path | None = None) -> list[dict]:
    """Condition number of the preconditioned Hessian over the grid.

    One row per (operator, L_B, L_R) cell, kappa computed through the rank-p
    shortcut. Cell failures become error rows; the sweep continues.
    """
    bs = _soar_cache(config.n, config.lb_grid)
    rs = _soar_cache(config.p, config.lr_grid)
    chash = config.config_hash()
    rows = []
    for kind in config.operators:
        for lb in config.lb_grid:
            for lr in config.lr_grid:
                row = {
                    "operator": kind,
                    "lengthscale_b": lb,
                    "lengthscale_r": lr,
                    "config_hash": chash,
                }
                try:
                    row["kappa"] = kappa_via_rank_p(_model(config, kind, bs[lb], rs[lr]))
                    row["status"] = "ok"
                except Exception as exc:
                    row["kappa"] = None
                    row["status"] = f"error: {exc}"
                rows.append(row)
    rows.sort(key=lambda r: (r["operator"], r["lengthscale_b"], r["lengthscale_r"]))
    if out_path is not None:
        write_csv(out_path, COND_COLUMNS, rows, _meta(config, "condition_sweep"))
    return rows


BOUNDS_COLUMNS = [
    "operator", "lengthscale_b", "lengthscale_r", "n", "p", "sigma_b", "sigma_r",
    "seed", "kappa_exact",
    "general_lower_1", "general_lower_2", "general_lower_3",
    "general_upper_1", "general_upper_2",
    "factored_lower_1", "factored_lower_2", "factored_upper",
    "haben_lower", "haben_upper",
    "exactness_flag", "most_negative_entry", "shift_defect_hbht",
    "status", "config_hash",
]


def run_bounds_sweep(config: SweepConfig, out_path: Path | None = None) -> list[dict]:
    """Full bounds report (every candidate term) per grid cell."""
    bs = _soar_cache(config.n, config.lb_grid)
    rs = _soar_cache(config.p, config.lr_grid)
    chash = config.config_hash()
    rows = []
    for kind in config.operators:
        for lb in config.lb_grid:
            for lr in config.lr_grid:
                try:
                    report = compute_bounds_report(_model(config, kind, bs[lb], rs[lr]))
                    row = report.to_csv_dict()
                    row["status"] = "ok"
                except Exception as exc:
                    row = {"operator": kind, "n": config.n, "p": config.p}
                    row["status"] = f"error: {exc}"
                row["lengthscale_b"] = lb
                row["lengthscale_r"] = lr
                row["config_hash"] = chash
                rows.append(row)
    rows.sort(key=lambda r: (r["operator"], r["lengthscale_b"], r["lengthscale_r"]))
    if out_path is not None:
        write_csv(out_path, BOUNDS_COLUMNS, rows, _meta(config, "bounds_sweep"))
    return rows


CG_COLUMNS = [
    "operator", "lengthscale_b", "lengthscale_r", "n", "p", "seed", "tolerance",
    "iterations", "converged", "final_relative_residual", "solution_error",
    "status", "config_hash",
]


def run_cg_sweep(
    config: SweepConfig,
    out_path: Path | None = None,
    trace_path: Path | None = None,
) -> list[dict]:
    """Conjugate-gradient convergence over the grid.

    Per cell: the preconditioned Hessian is built as a matrix-free operator,
    the right-hand side is its action on the deterministic multi-scale test
    signal, and the signal is recovered at the configured tolerance.
    Non-convergence is recorded, not raised. When ``trace_path`` is given,
    the full per-iteration residual traces are written there as JSON.
    """
    bs = _soar_cache(config.n, config.lb_grid)
    rs = _soar_cache(config.p, config.lr_grid)
    signal = make_test_signal(config.n)
    x_true = signal.values
    chash = config.config_hash()
    rows = []
    traces = []
    for kind in config.operators:
        for lb in config.lb_grid:
            for lr in config.lr_grid:
                row = {
                    "operator": kind,
                    "lengthscale_b": lb,
                    "lengthscale_r": lr,
                    "n": config.n,
                    "p": config.p,
                    "seed": config.seed if kind == "random-direct" else None,
                    "tolerance": config.tolerance,
                    "config_hash": chash,
                }
                try:
                    model = _model(config, kind, bs[lb], rs[lr])
                    apply_hessian = preconditioned_operator(model)
                    b = apply_hessian(x_true)
                    report = conjugate_gradient(
                        apply_hessian, b, tolerance=config.tolerance, x_true=x_true
                    )
                    row.update(
                        iterations=report.iterations,
                        converged=report.converged,
                        final_relative_residual=report.final_relative_residual,
                        solution_error=report.recovered_solution_error,
                        status="ok",
                    )
                    if trace_path is not None:
                        traces.append(
                            {
                                "operator": kind,
                                "lengthscale_b": lb,
                                "lengthscale_r": lr,
                                "trace": report.relative_residual_trace.tolist(),
                            }
                        )
                except Exception as exc:
                    row["status"] = f"error: {exc}"
                rows.append(row)
    rows.sort(key=lambda r: (r["operator"], r["lengthscale_b"], r["lengthscale_r"]))
    if out_path is not None:
        write_csv(out_path, CG_COLUMNS, rows, _meta(config, "cg_sweep"))
    if trace_path is not None:
        trace_path.parent.mkdir(parents=True, exist_ok=True)
        traces.sort(key=lambda t: (t["operator"], t["lengthscale_b"], t["lengthscale_r"]))
        with open(trace_path, "w") as f:
            json.dump({"meta": _meta(config, "cg_traces"), "traces": traces}, f)
    return rows


def run_spectrum_export(
    config: SweepConfig,
    cells: list[tuple[str, float, float]],
    out_dir: Path | None = None,
) -> list[dict]:
    """Nonzero update eigenvalues and cluster diagnostics for named cells.

    Each cell is (operator kind, L_B, L_R). The exported record carries the
    p nonzero eigenvalues of the rank-p update (log-scale friendly), the
    condition number, and the cluster count of the full Hessian spectrum.
    """
    results = []
    for kind, lb, lr in cells:
        if kind not in CANONICAL_KINDS:
            raise ValueError(f"unknown operator kind {kind!r} in spectrum cell")
        if lb <= 0 or lr <= 0:
            raise ValueError(f"lengthscales must be positive, got ({lb}, {lr})")
        b = build_soar(CircleGrid(config.n), lb)
        r = build_soar(CircleGrid(config.p), lr)
        model = _model(config, kind, b, r)
        update = update_eigenvalues(model)
        full = np.sort(np.concatenate([update + 1.0, np.ones(config.n - config.p)]))[::-1]
        record = {
            "model": model.descriptor(),
            "update_eigenvalues": update.tolist(),
            "kappa": 1.0 + float(update[0]),
            "distinct_cluster_count": count_clusters(full, 0.05),
            "config_hash": config.config_hash(),
        }
        results.append(record)
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            name = f"spectrum_{kind}_{lb:g}_{lr:g}.json"
            with open(out_dir / name, "w") as f:
                json.dump(record, f, indent=1)
    return results
