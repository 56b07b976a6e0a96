"""Command-line interface.

Exit codes: 0 on success, 1 when an input violates a contract (bad values,
missing or malformed files, size guards), 2 on usage errors.  Reports go to
stdout as JSON (benchmarks also echo CSV); files are written only when --out
is given.  Every randomized command takes --seed, falling back to the
QREGRESS_SEED environment variable and then to 0, and echoes the seed it
used.  --no-timing drops wall-clock fields so repeated runs with one seed are
byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import bench
from .datagen import GenSpec, generate, read_truth_sidecar, write_dataset_files
from .errors import ContractViolation
from .formulation import (
    PrecisionVector,
    build_qubo,
    format_qubo_coord,
    qubo_to_dict,
    write_qubo_coord,
    write_qubo_json,
)
from .regression import Weights, load_dataset_csv, regression_error, solve_analytical
from .solvers import Backend, SolverConfig, solve_regression_via_qubo

_SEED_ENV = "QREGRESS_SEED"

_CONFIG_FIELD_TYPES = {
    "backend": str,
    "num_reads": int,
    "sweeps_per_read": int,
    "beta_initial": float,
    "beta_final": float,
    "seed": int,
    "fault_prob": float,
}


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(_SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ContractViolation(f"{_SEED_ENV}={env!r} is not an integer") from None
    return 0


def _precision_from_args(args) -> PrecisionVector:
    return PrecisionVector.from_string(args.precision, allow_any=args.allow_any_precision)


def _load_solver_config_file(path) -> dict:
    """Parse a plain key=value file (one pair per line, # comments allowed)."""
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ContractViolation(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_FIELD_TYPES:
            raise ContractViolation(f"{path}:{lineno}: unknown solver config key {key!r}")
        try:
            values[key] = _CONFIG_FIELD_TYPES[key](value)
        except ValueError:
            raise ContractViolation(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return values


def _solver_config_from_args(args, seed: int) -> SolverConfig:
    values: dict = {}
    if getattr(args, "solver_config", None):
        values.update(_load_solver_config_file(args.solver_config))
    # explicit flags override the file
    for key, attr in (
        ("backend", "backend"),
        ("num_reads", "num_reads"),
        ("sweeps_per_read", "sweeps_per_read"),
        ("beta_initial", "beta_initial"),
        ("beta_final", "beta_final"),
        ("fault_prob", "fault_prob"),
    ):
        flag = getattr(args, attr, None)
        if flag is not None:
            values[key] = flag
    # precedence: --seed flag, then config file, then env/default
    if args.seed is not None or "seed" not in values:
        values["seed"] = seed
    return SolverConfig(**values)


def _emit_json(payload: dict, out_path=None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    sys.stdout.write(text)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")


def _add_seed_flag(parser) -> None:
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help=f"RNG seed (default: ${_SEED_ENV} if set, else 0); echoed in the output",
    )


def _add_precision_flags(parser) -> None:
    parser.add_argument(
        "--precision",
        required=True,
        help="comma-separated ascending powers of two, e.g. 0.25,0.5",
    )
    parser.add_argument(
        "--allow-any-precision",
        action="store_true",
        help="accept precision entries that are not powers of two",
    )


def _add_solver_flags(parser) -> None:
    parser.add_argument(
        "--backend",
        choices=[b.value for b in Backend],
        default=None,
        help="solver backend (default: simulated_annealing)",
    )
    parser.add_argument("--num-reads", type=int, default=None, help="annealing reads (default 1000)")
    parser.add_argument(
        "--sweeps-per-read", type=int, default=None, help="sweeps per read (default 1000)"
    )
    parser.add_argument(
        "--beta-initial", type=float, default=None, help="initial inverse temperature (default 0.1)"
    )
    parser.add_argument(
        "--beta-final", type=float, default=None, help="final inverse temperature (default 10.0)"
    )
    parser.add_argument(
        "--fault-prob",
        type=float,
        default=None,
        help="per-bit flip probability applied to returned solutions (default 0, off)",
    )
    parser.add_argument(
        "--solver-config",
        default=None,
        metavar="FILE",
        help="key=value file with solver settings; explicit flags override it",
    )


def _add_no_timing_flag(parser) -> None:
    parser.add_argument(
        "--no-timing",
        action="store_true",
        help="omit wall-clock fields so outputs are byte-identical across runs",
    )


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_gen_data(args) -> int:
    seed = _resolve_seed(args)
    precision = _precision_from_args(args)
    ground_truth = None
    if args.ground_truth:
        try:
            ground_truth = Weights(w=[float(t) for t in args.ground_truth.split(",")])
        except ValueError as exc:
            raise ContractViolation(f"bad --ground-truth list: {exc}") from None
    spec = GenSpec(
        n=args.n,
        d_plus_1=args.d + 1,
        precision=precision,
        noise_sigma=args.sigma,
        feature_low=args.feature_low,
        feature_high=args.feature_high,
        seed=seed,
        ground_truth=ground_truth,
    )
    ds, weights, truth = generate(spec)
    sidecar = write_dataset_files(ds, weights, truth, spec, args.out)
    _emit_json(
        {
            "csv": str(args.out),
            "truth_json": str(sidecar),
            "n": ds.n,
            "d_plus_1": ds.d_plus_1,
            "weights": [float(v) for v in weights.w],
            "seed": seed,
        }
    )
    return 0


def _cmd_formulate(args) -> int:
    ds = load_dataset_csv(args.data)
    q = build_qubo(ds, _precision_from_args(args))
    payload = qubo_to_dict(q)
    _emit_json(payload)
    if args.out:
        write_qubo_json(q, args.out)
    return 0


def _cmd_solve(args) -> int:
    seed = _resolve_seed(args)
    ds = load_dataset_csv(args.data)
    precision = _precision_from_args(args)
    cfg = _solver_config_from_args(args, seed)
    truth_bits = None
    if args.truth:
        _, truth_bits = read_truth_sidecar(args.truth)
    report = solve_regression_via_qubo(ds, precision, cfg, truth_bits=truth_bits)
    payload = report.to_dict(include_timing=not args.no_timing)
    payload["backend"] = cfg.backend.value
    payload["seed"] = cfg.seed
    _emit_json(payload, args.out)
    return 0


def _cmd_baseline(args) -> int:
    ds = load_dataset_csv(args.data)
    t0 = time.perf_counter()
    weights = solve_analytical(ds)
    solve_ms = (time.perf_counter() - t0) * 1000.0
    payload: dict = {
        "weights": [float(v) for v in weights.w],
        "error": regression_error(ds, weights),
    }
    if not args.no_timing:
        payload["solve_time_ms"] = solve_ms
    _emit_json(payload, args.out)
    return 0


def _cmd_recover(args) -> int:
    seed = _resolve_seed(args)
    precision = _precision_from_args(args)
    ground_truth = None
    if args.ground_truth:
        ground_truth = Weights(w=[float(t) for t in args.ground_truth.split(",")])
    spec = GenSpec(
        n=args.n,
        d_plus_1=args.d + 1,
        precision=precision,
        noise_sigma=args.sigma,
        seed=seed,
        ground_truth=ground_truth,
    )
    cfg = _solver_config_from_args(args, seed)
    report = bench.run_recovery_experiment(
        args.runs, spec, cfg, fit_threshold=args.fit_threshold, threads=args.threads
    )
    payload = report.to_dict()
    payload["backend"] = cfg.backend.value
    payload["seed"] = seed
    _emit_json(payload, args.out)
    return 0


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ContractViolation(f"bad {what} list {text!r}: {exc}") from None


def _emit_bench(rows, args, seed: int) -> None:
    include_timing = not args.no_timing
    payload = {"seed": seed, "rows": bench.rows_to_dicts(rows, include_timing=include_timing)}
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    if args.out:
        bench.emit_report(rows, args.out, fmt="csv", include_timing=include_timing)
    if args.json_out:
        bench.emit_report(rows, args.json_out, fmt="json", include_timing=include_timing)


def _cmd_bench_n(args) -> int:
    seed = _resolve_seed(args)
    precision = _precision_from_args(args)
    if args.full_scale:
        n_values = [1 << e for e in range(9, 25)]
        runs = 60
        max_n = 1 << 24
    else:
        n_values = _parse_int_list(args.n_values, "--n-values")
        runs = args.runs_per_point
        max_n = args.max_n
    spec = GenSpec(
        n=n_values[0] if n_values else 1,
        d_plus_1=args.features,
        precision=precision,
        noise_sigma=args.sigma,
        seed=seed,
    )
    cfg = _solver_config_from_args(args, seed)
    rows = bench.run_scaling_n(
        n_values, args.features, spec, cfg, runs_per_point=runs, max_n=max_n
    )
    _emit_bench(rows, args, seed)
    return 0


def _cmd_bench_d(args) -> int:
    seed = _resolve_seed(args)
    precision = _precision_from_args(args)
    d_values = _parse_int_list(args.features_values, "--features-values")
    runs = 60 if args.full_scale else args.runs_per_point
    spec = GenSpec(
        n=args.n,
        d_plus_1=d_values[0] if d_values else 2,
        precision=precision,
        noise_sigma=args.sigma,
        seed=seed,
    )
    cfg = _solver_config_from_args(args, seed)
    rows = bench.run_scaling_d(d_values, spec, cfg, n=args.n, runs_per_point=runs)
    _emit_bench(rows, args, seed)
    return 0


def _cmd_export_qubo(args) -> int:
    ds = load_dataset_csv(args.data)
    q = build_qubo(ds, _precision_from_args(args))
    if args.format == "coord":
        text = format_qubo_coord(q)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    else:
        if args.out:
            write_qubo_json(q, args.out)
        else:
            sys.stdout.write(json.dumps(qubo_to_dict(q), indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qregress",
        description="Train linear regression by encoding weights as bits and "
        "minimizing the equivalent quadratic binary objective.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic dataset CSV plus truth sidecar")
    p.add_argument("--n", type=int, required=True, help="number of rows")
    p.add_argument("--d", type=int, required=True, help="number of feature columns (intercept added)")
    _add_precision_flags(p)
    p.add_argument("--sigma", type=float, default=0.0, help="label noise stddev (default 0)")
    p.add_argument("--feature-low", type=float, default=-1.0, help="feature range low (default -1)")
    p.add_argument("--feature-high", type=float, default=1.0, help="feature range high (default 1)")
    p.add_argument("--ground-truth", default=None, help="comma list of representable weights")
    _add_seed_flag(p)
    p.add_argument("--out", required=True, help="dataset CSV path; sidecar goes next to it")
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("formulate", help="build the QUBO for a dataset and print it as JSON")
    p.add_argument("--data", required=True, help="dataset CSV")
    _add_precision_flags(p)
    p.add_argument("--out", default=None, help="also write the JSON to this file")
    p.set_defaults(func=_cmd_formulate)

    p = sub.add_parser("solve", help="train via the QUBO route and report weights and error")
    p.add_argument("--data", required=True, help="dataset CSV")
    _add_precision_flags(p)
    _add_solver_flags(p)
    p.add_argument("--truth", default=None, help="truth sidecar JSON for Hamming distance")
    _add_seed_flag(p)
    p.add_argument("--out", default=None, help="also write the report JSON to this file")
    _add_no_timing_flag(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("baseline", help="closed-form least-squares weights and error")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--out", default=None, help="also write the report JSON to this file")
    _add_no_timing_flag(p)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("recover", help="repeated generate/solve runs, fit-rate report")
    p.add_argument("--runs", type=int, default=100, help="number of runs (default 100)")
    p.add_argument("--n", type=int, default=100, help="rows per dataset (default 100)")
    p.add_argument("--d", type=int, default=1, help="feature columns (default 1)")
    _add_precision_flags(p)
    p.add_argument("--sigma", type=float, default=0.0, help="label noise stddev (default 0)")
    p.add_argument("--ground-truth", default=None, help="comma list of representable weights")
    p.add_argument(
        "--fit-threshold",
        type=float,
        default=bench.DEFAULT_FIT_THRESHOLD,
        help="a run fits when qubo_error <= threshold * classical_error (default 1.5)",
    )
    p.add_argument("--threads", type=int, default=1, help="worker threads for the runs (default 1)")
    _add_solver_flags(p)
    _add_seed_flag(p)
    p.add_argument("--out", default=None, help="also write the report JSON to this file")
    _add_no_timing_flag(p)
    p.set_defaults(func=_cmd_recover)

    p = sub.add_parser("bench-n", help="dataset-size scaling sweep (CSV report)")
    p.add_argument(
        "--n-values",
        default=",".join(str(1 << e) for e in range(12, 21)),
        help="comma list of dataset sizes (default 4096..1048576 by powers of 2)",
    )
    p.add_argument("--features", type=int, default=2, help="d+1, columns incl. intercept (default 2)")
    _add_precision_flags(p)
    p.add_argument("--sigma", type=float, default=0.1, help="label noise stddev (default 0.1)")
    p.add_argument(
        "--runs-per-point", type=int, default=bench.DEFAULT_RUNS_PER_POINT, help="default 10"
    )
    p.add_argument(
        "--max-n",
        type=int,
        default=bench.DEFAULT_MAX_N,
        help=f"memory guard on n (default {bench.DEFAULT_MAX_N})",
    )
    p.add_argument(
        "--full-scale",
        action="store_true",
        help="full sweep: n = 512..16777216, 60 runs per point",
    )
    _add_solver_flags(p)
    _add_seed_flag(p)
    p.add_argument("--out", default=None, help="CSV report path")
    p.add_argument("--json-out", default=None, help="JSON mirror path")
    _add_no_timing_flag(p)
    p.set_defaults(func=_cmd_bench_n)

    p = sub.add_parser("bench-d", help="weight-count scaling sweep (CSV report)")
    p.add_argument(
        "--features-values",
        default=",".join(str(v) for v in range(2, 33, 2)),
        help="comma list of d+1 values (default even 2..32)",
    )
    p.add_argument(
        "--n", type=int, default=bench.DEFAULT_SCALING_D_N, help="rows per dataset (default 524288)"
    )
    _add_precision_flags(p)
    p.add_argument("--sigma", type=float, default=0.1, help="label noise stddev (default 0.1)")
    p.add_argument(
        "--runs-per-point", type=int, default=bench.DEFAULT_RUNS_PER_POINT, help="default 10"
    )
    p.add_argument("--full-scale", action="store_true", help="60 runs per point")
    _add_solver_flags(p)
    _add_seed_flag(p)
    p.add_argument("--out", default=None, help="CSV report path")
    p.add_argument("--json-out", default=None, help="JSON mirror path")
    _add_no_timing_flag(p)
    p.set_defaults(func=_cmd_bench_d)

    p = sub.add_parser("export-qubo", help="write the QUBO in coordinate-list or JSON form")
    p.add_argument("--data", required=True, help="dataset CSV")
    _add_precision_flags(p)
    p.add_argument("--format", choices=["coord", "json"], default="coord", help="default coord")
    p.add_argument("--out", default=None, help="output path (stdout if omitted)")
    p.set_defaults(func=_cmd_export_qubo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ContractViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
