"""Recovery-rate and scaling experiments against the classical baseline.

Every experiment derives its run-r dataset seed as ``base_seed XOR r`` (and
the run-r solver seed the same way), so whole sweeps are reproducible while
runs stay mutually independent.  Wall time is captured from the monotonic
clock at microsecond resolution and reported in milliseconds.  The combined
QUBO time of a run is defined as formulate + solve of that same run, so the
decomposition is exact by construction.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .datagen import GenSpec, generate
from .errors import ContractViolation, SizeGuardError
from .regression import regression_error, solve_analytical
from .solvers import Backend, SolverConfig, solve_regression_via_qubo

DEFAULT_FIT_THRESHOLD = 1.5
DEFAULT_RUNS_PER_POINT = 10
DEFAULT_MAX_N = 1 << 21
DEFAULT_SCALING_D_N = 524288

CSV_COLUMNS = (
    "scale_param",
    "runs",
    "classical_ms_mean",
    "classical_ms_std",
    "formulate_ms_mean",
    "formulate_ms_std",
    "solve_ms_mean",
    "solve_ms_std",
    "combined_ms_mean",
    "combined_ms_std",
    "classical_error_mean",
    "qubo_error_mean",
)
_TIMING_COLUMNS = tuple(c for c in CSV_COLUMNS if "_ms_" in c)


@dataclass(frozen=True)
class ExperimentRow:
    """One sweep point of a scaling experiment; field names match the CSV."""

    scale_param: int
    runs: int
    classical_ms_mean: float
    classical_ms_std: float
    formulate_ms_mean: float
    formulate_ms_std: float
    solve_ms_mean: float
    solve_ms_std: float
    combined_ms_mean: float
    combined_ms_std: float
    classical_error_mean: float
    qubo_error_mean: float


@dataclass(frozen=True)
class RecoveryReport:
    """Fit-rate experiment summary, stratified by whether the QUBO route fit.

    A run "fits" when its QUBO-route error is at most ``fit_threshold`` times
    the classical error.  Means over an empty stratum are NaN.
    """

    runs: int
    fit_fraction: float
    classical_error_fit: float
    qubo_error_fit: float
    classical_error_nofit: float
    qubo_error_nofit: float
    classical_error_overall: float
    qubo_error_overall: float
    mean_hamming_nofit: float
    mean_hamming_overall: float
    fit_threshold: float
    noise_sigma: float

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, float) and math.isnan(value):
                value = None
            out[f.name] = value
        return out


def _mean(values: np.ndarray) -> float:
    return float(np.mean(values)) if values.size else float("nan")


def _std(values: np.ndarray) -> float:
    # sample standard deviation; a single run has no spread to estimate
    return float(np.std(values, ddof=1)) if values.size > 1 else 0.0


def run_recovery_experiment(
    runs: int,
    spec: GenSpec,
    cfg: SolverConfig,
    fit_threshold: float = DEFAULT_FIT_THRESHOLD,
    threads: int = 1,
) -> RecoveryReport:
    """Repeat generate/solve ``runs`` times and stratify errors by fit status.

    ``threads`` > 1 runs the independent repetitions on a thread pool; results
    are identical to the serial order because each run is seeded by its index.
    """
    if runs < 1:
        raise ContractViolation(f"runs must be >= 1, got {runs}")
    if fit_threshold <= 0:
        raise ContractViolation(f"fit_threshold must be positive, got {fit_threshold}")

    def one_run(r: int) -> tuple[float, float, int]:
        ds, _, truth = generate(replace(spec, seed=spec.seed ^ r))
        classical_err = regression_error(ds, solve_analytical(ds))
        report = solve_regression_via_qubo(
            ds, spec.precision, replace(cfg, seed=cfg.seed ^ r), truth_bits=truth
        )
        return classical_err, report.error, report.hamming_distance

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_run, range(runs)))
    else:
        results = [one_run(r) for r in range(runs)]

    classical = np.array([r[0] for r in results])
    qubo = np.array([r[1] for r in results])
    hamming = np.array([r[2] for r in results], dtype=float)
    fit = qubo <= fit_threshold * classical
    return RecoveryReport(
        runs=runs,
        fit_fraction=float(np.count_nonzero(fit)) / runs,
        classical_error_fit=_mean(classical[fit]),
        qubo_error_fit=_mean(qubo[fit]),
        classical_error_nofit=_mean(classical[~fit]),
        qubo_error_nofit=_mean(qubo[~fit]),
        classical_error_overall=_mean(classical),
        qubo_error_overall=_mean(qubo),
        mean_hamming_nofit=_mean(hamming[~fit]),
        mean_hamming_overall=_mean(hamming),
        fit_threshold=fit_threshold,
        noise_sigma=spec.noise_sigma,
    )


def _sweep_point(
    spec: GenSpec, cfg: SolverConfig, scale_param: int, runs_per_point: int
) -> ExperimentRow:
    classical_ms = np.empty(runs_per_point)
    formulate_ms = np.empty(runs_per_point)
    solve_ms = np.empty(runs_per_point)
    classical_err = np.empty(runs_per_point)
    qubo_err = np.empty(runs_per_point)
    for r in range(runs_per_point):
        ds, _, _ = generate(replace(spec, seed=spec.seed ^ r))
        t0 = time.perf_counter()
        w_classical = solve_analytical(ds)
        classical_ms[r] = (time.perf_counter() - t0) * 1000.0
        classical_err[r] = regression_error(ds, w_classical)
        report = solve_regression_via_qubo(ds, spec.precision, replace(cfg, seed=cfg.seed ^ r))
        formulate_ms[r] = report.formulate_time_ms
        solve_ms[r] = report.solve_time_ms
        qubo_err[r] = report.error
    combined_ms = formulate_ms + solve_ms
    return ExperimentRow(
        scale_param=scale_param,
        runs=runs_per_point,
        classical_ms_mean=_mean(classical_ms),
        classical_ms_std=_std(classical_ms),
        formulate_ms_mean=_mean(formulate_ms),
        formulate_ms_std=_std(formulate_ms),
        solve_ms_mean=_mean(solve_ms),
        solve_ms_std=_std(solve_ms),
        combined_ms_mean=_mean(combined_ms),
        combined_ms_std=_std(combined_ms),
        classical_error_mean=_mean(classical_err),
        qubo_error_mean=_mean(qubo_err),
    )


def _warmup(spec: GenSpec, cfg: SolverConfig) -> None:
    # one untimed run so JIT compilation and allocator effects stay out of
    # the first measured point
    ds, _, _ = generate(replace(spec, n=min(spec.n, 1024)))
    solve_analytical(ds)
    solve_regression_via_qubo(ds, spec.precision, replace(cfg, num_reads=1, sweeps_per_read=2))


def run_scaling_n(
    n_values,
    d_plus_1: int,
    spec: GenSpec,
    cfg: SolverConfig,
    runs_per_point: int = DEFAULT_RUNS_PER_POINT,
    max_n: int = DEFAULT_MAX_N,
) -> list[ExperimentRow]:
    """Sweep dataset size at fixed column count; one row per n value."""
    n_values = [int(n) for n in n_values]
    if not n_values:
        raise ContractViolation("n_values must be non-empty")
    if any(n < 1 for n in n_values):
        raise ContractViolation(f"n values must be >= 1, got {n_values}")
    too_big = [n for n in n_values if n > max_n]
    if too_big:
        raise SizeGuardError(
            f"n values {too_big} exceed the configured cap {max_n}; raise max_n explicitly "
            "to run at that scale"
        )
    if runs_per_point < 1:
        raise ContractViolation(f"runs_per_point must be >= 1, got {runs_per_point}")
    _warmup(replace(spec, n=n_values[0], d_plus_1=d_plus_1), cfg)
    return [
        _sweep_point(replace(spec, n=n, d_plus_1=d_plus_1), cfg, n, runs_per_point)
        for n in n_values
    ]


def run_scaling_d(
    d_plus_1_values,
    spec: GenSpec,
    cfg: SolverConfig,
    n: int = DEFAULT_SCALING_D_N,
    runs_per_point: int = DEFAULT_RUNS_PER_POINT,
) -> list[ExperimentRow]:
    """Sweep weight count at fixed dataset size; one row per d+1 value."""
    d_values = [int(d) for d in d_plus_1_values]
    if not d_values:
        raise ContractViolation("d_plus_1_values must be non-empty")
    if any(d < 1 for d in d_values):
        raise ContractViolation(f"d+1 values must be >= 1, got {d_values}")
    if runs_per_point < 1:
        raise ContractViolation(f"runs_per_point must be >= 1, got {runs_per_point}")
    k = spec.precision.k
    if cfg.backend is Backend.EXHAUSTIVE:
        oversized = [d for d in d_values if d * k > 24]
        if oversized:
            raise SizeGuardError(
                f"exhaustive backend cannot handle (d+1)*K > 24 bits; offending d+1: {oversized}"
            )
    _warmup(replace(spec, n=min(n, 4096), d_plus_1=d_values[0]), cfg)
    return [
        _sweep_point(replace(spec, n=n, d_plus_1=d), cfg, d, runs_per_point)
        for d in d_values
    ]


def rows_to_dicts(rows, include_timing: bool = True) -> list[dict]:
    out = []
    for row in rows:
        d = {f.name: getattr(row, f.name) for f in fields(row)}
        if not include_timing:
            for col in _TIMING_COLUMNS:
                d.pop(col)
        out.append(d)
    return out


def emit_report(rows, path, fmt: str = "csv", include_timing: bool = True) -> None:
    """Write sweep rows as CSV (stable column order) or a JSON mirror."""
    if fmt == "csv":
        Path(path).write_text(format_report_csv(rows, include_timing=include_timing), encoding="utf-8")
    elif fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(rows_to_dicts(rows, include_timing=include_timing), fh, indent=2)
            fh.write("\n")
    else:
        raise ContractViolation(f"unknown report format {fmt!r}")


def parse_report(path) -> list[ExperimentRow]:
    """Read back a CSV written by emit_report (full schema) without loss."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ContractViolation(
                f"unexpected report columns {reader.fieldnames}, want {list(CSV_COLUMNS)}"
            )
        rows = []
        for record in reader:
            rows.append(
                ExperimentRow(
                    scale_param=int(record["scale_param"]),
                    runs=int(record["runs"]),
                    **{
                        c: float(record[c])
                        for c in CSV_COLUMNS
                        if c not in ("scale_param", "runs")
                    },
                )
            )
    return rows


def format_report_csv(rows, include_timing: bool = True) -> str:
    """CSV text of the sweep rows (written to files and echoed to stdout)."""
    buf = io.StringIO()
    columns = [c for c in CSV_COLUMNS if include_timing or c not in _TIMING_COLUMNS]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for d in rows_to_dicts(rows, include_timing=include_timing):
        writer.writerow([repr(d[c]) if isinstance(d[c], float) else d[c] for c in columns])
    return buf.getvalue()
