"""Recovery and scaling experiments, report emission, timing decomposition."""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from qregress import (
    ContractViolation,
    ExperimentRow,
    PrecisionVector,
    SizeGuardError,
    SolverConfig,
    Weights,
    emit_report,
    parse_report,
    run_recovery_experiment,
    run_scaling_d,
    run_scaling_n,
)
from qregress.bench import CSV_COLUMNS, format_report_csv, rows_to_dicts
from qregress.datagen import GenSpec

P25 = PrecisionVector(p=[0.25, 0.5])
TABLE_SPEC = GenSpec(
    n=100,
    d_plus_1=2,
    precision=P25,
    noise_sigma=0.0,
    seed=4242,
    ground_truth=Weights(w=[0.5, 0.75]),
)
FAST_ANNEAL = dict(num_reads=20, sweeps_per_read=80)


class TestRecoveryExperiment:
    def test_noiseless_exhaustive_recovers_everything(self):
        report = run_recovery_experiment(
            50, TABLE_SPEC, SolverConfig(backend="exhaustive", seed=1)
        )
        assert report.runs == 50
        assert report.fit_fraction == 1.0
        assert report.mean_hamming_overall == 0.0
        assert report.qubo_error_fit == 0.0
        assert report.classical_error_fit == pytest.approx(0.0, abs=1e-18)
        # empty no-fit stratum reports NaN, serialized as None
        assert math.isnan(report.qubo_error_nofit)
        assert math.isnan(report.mean_hamming_nofit)
        assert report.to_dict()["qubo_error_nofit"] is None
        assert report.fit_threshold == 1.5
        assert report.noise_sigma == 0.0

    def test_overall_is_weighted_combination_of_strata(self):
        from dataclasses import replace

        spec = replace(TABLE_SPEC, noise_sigma=0.4, ground_truth=None, seed=77)
        cfg = SolverConfig(backend="exhaustive", seed=3, fault_prob=0.35)
        report = run_recovery_experiment(60, spec, cfg)
        ff = report.fit_fraction
        for fit_val, nofit_val, overall in (
            (report.classical_error_fit, report.classical_error_nofit, report.classical_error_overall),
            (report.qubo_error_fit, report.qubo_error_nofit, report.qubo_error_overall),
        ):
            combo = 0.0
            if ff > 0:
                combo += ff * fit_val
            if ff < 1:
                combo += (1 - ff) * nofit_val
            assert overall == pytest.approx(combo, rel=1e-9)

    def test_fault_channel_fit_fraction_near_analytic(self):
        # four bits flipped independently with p=0.1: an uncorrupted job has
        # probability 0.9^4 ~ 0.656, and any corruption on a noiseless
        # dataset forces a miss; allow five binomial standard errors
        runs = 400
        cfg = SolverConfig(backend="exhaustive", seed=8, fault_prob=0.1)
        report = run_recovery_experiment(runs, TABLE_SPEC, cfg)
        expected = 0.9**4
        se = math.sqrt(expected * (1 - expected) / runs)
        assert abs(report.fit_fraction - expected) <= 5 * se
        # corrupted noiseless runs are nonzero-error, so strata split cleanly
        if report.fit_fraction < 1.0:
            assert report.mean_hamming_nofit > 0.0
            assert report.qubo_error_nofit > report.qubo_error_fit

    def test_threads_do_not_change_results(self):
        from dataclasses import replace

        spec = replace(TABLE_SPEC, noise_sigma=0.3, ground_truth=None)
        cfg = SolverConfig(seed=5, **FAST_ANNEAL)
        serial = run_recovery_experiment(12, spec, cfg, threads=1)
        pooled = run_recovery_experiment(12, spec, cfg, threads=4)
        # compare the serialized form: NaN strata become None there, and
        # NaN != NaN would defeat direct dataclass equality
        assert serial.to_dict() == pooled.to_dict()

    def test_run_seeds_are_independent(self):
        # identical base seeds but distinct run indices must give distinct
        # datasets; fit stats would otherwise be degenerate
        from dataclasses import replace

        spec = replace(TABLE_SPEC, noise_sigma=0.5, ground_truth=None, n=40)
        report = run_recovery_experiment(10, spec, SolverConfig(backend="exhaustive", seed=0))
        assert report.classical_error_overall > 0

    def test_validation(self):
        with pytest.raises(ContractViolation):
            run_recovery_experiment(0, TABLE_SPEC, SolverConfig())
        with pytest.raises(ContractViolation):
            run_recovery_experiment(5, TABLE_SPEC, SolverConfig(), fit_threshold=0.0)


class TestScalingN:
    def test_rows_well_formed(self):
        spec = GenSpec(n=1024, d_plus_1=2, precision=P25, noise_sigma=0.1, seed=11)
        cfg = SolverConfig(seed=2, **FAST_ANNEAL)
        n_values = [1 << 10, 1 << 11, 1 << 12]
        rows = run_scaling_n(n_values, 2, spec, cfg, runs_per_point=3)
        assert [r.scale_param for r in rows] == n_values
        for row in rows:
            assert row.runs == 3
            assert row.combined_ms_mean == pytest.approx(
                row.formulate_ms_mean + row.solve_ms_mean, rel=1e-9, abs=1e-9
            )
            for name in (
                "classical_ms_std",
                "formulate_ms_std",
                "solve_ms_std",
                "combined_ms_std",
            ):
                assert getattr(row, name) >= 0.0
            assert row.classical_error_mean >= 0.0
            assert row.qubo_error_mean >= row.classical_error_mean * 0.999999

    def test_memory_guard(self):
        spec = GenSpec(n=64, d_plus_1=2, precision=P25, seed=1)
        with pytest.raises(SizeGuardError):
            run_scaling_n([1 << 22], 2, spec, SolverConfig(), max_n=1 << 21)
        with pytest.raises(ContractViolation):
            run_scaling_n([], 2, spec, SolverConfig())

    def test_deterministic(self):
        spec = GenSpec(n=512, d_plus_1=2, precision=P25, noise_sigma=0.2, seed=21)
        cfg = SolverConfig(backend="exhaustive", seed=3)
        rows_a = run_scaling_n([512, 1024], 2, spec, cfg, runs_per_point=2)
        rows_b = run_scaling_n([512, 1024], 2, spec, cfg, runs_per_point=2)
        assert [r.classical_error_mean for r in rows_a] == [r.classical_error_mean for r in rows_b]
        assert [r.qubo_error_mean for r in rows_a] == [r.qubo_error_mean for r in rows_b]


class TestScalingD:
    def test_rows_and_exhaustive_guard(self):
        spec = GenSpec(n=256, d_plus_1=2, precision=P25, noise_sigma=0.1, seed=31)
        cfg = SolverConfig(seed=7, **FAST_ANNEAL)
        rows = run_scaling_d([2, 4], spec, cfg, n=256, runs_per_point=2)
        assert [r.scale_param for r in rows] == [2, 4]
        with pytest.raises(SizeGuardError):
            run_scaling_d([2, 16], spec, SolverConfig(backend="exhaustive"), n=64, runs_per_point=1)

    def test_formulate_time_grows_with_weight_count(self):
        spec = GenSpec(n=1 << 15, d_plus_1=2, precision=P25, noise_sigma=0.1, seed=41)
        cfg = SolverConfig(seed=9, num_reads=5, sweeps_per_read=20)
        rows = run_scaling_d([2, 16], spec, cfg, n=1 << 15, runs_per_point=5)
        assert rows[1].formulate_ms_mean > rows[0].formulate_ms_mean


class TestTimingContract:
    def test_formulate_time_independent_of_backend(self):
        # the same build runs before either backend; medians should agree
        # well within the 20 percent jitter allowance
        from qregress import build_qubo
        from qregress.datagen import generate

        spec = GenSpec(n=1 << 17, d_plus_1=2, precision=P25, noise_sigma=0.1, seed=51)
        ds, _, _ = generate(spec)
        build_qubo(ds, P25)  # warm up

        def median_ms(repeats: int) -> float:
            samples = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                build_qubo(ds, P25)
                samples.append((time.perf_counter() - t0) * 1e3)
            return float(np.median(samples))

        t_a, t_b = median_ms(9), median_ms(9)
        assert 0.8 <= t_a / t_b <= 1.25


class TestReports:
    def _rows(self):
        return [
            ExperimentRow(
                scale_param=4096,
                runs=10,
                classical_ms_mean=1.25,
                classical_ms_std=0.125,
                formulate_ms_mean=0.5,
                formulate_ms_std=0.03125,
                solve_ms_mean=12.5,
                solve_ms_std=1.0,
                combined_ms_mean=13.0,
                combined_ms_std=1.0625,
                classical_error_mean=40.536231884057969,
                qubo_error_mean=40.736231884057971,
            ),
            ExperimentRow(
                scale_param=8192,
                runs=10,
                classical_ms_mean=2.5,
                classical_ms_std=0.25,
                formulate_ms_mean=1.0,
                formulate_ms_std=0.0625,
                solve_ms_mean=12.5,
                solve_ms_std=1.0,
                combined_ms_mean=13.5,
                combined_ms_std=1.125,
                classical_error_mean=81.072463768115938,
                qubo_error_mean=81.472463768115943,
            ),
        ]

    def test_csv_schema_and_round_trip(self, tmp_path):
        rows = self._rows()
        path = tmp_path / "report.csv"
        emit_report(rows, path)
        text = path.read_text()
        assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
        assert parse_report(path) == rows

    def test_no_timing_drops_ms_columns(self, tmp_path):
        text = format_report_csv(self._rows(), include_timing=False)
        header = text.splitlines()[0].split(",")
        assert header == ["scale_param", "runs", "classical_error_mean", "qubo_error_mean"]
        assert "_ms_" not in text

    def test_json_mirror(self, tmp_path):
        import json

        rows = self._rows()
        path = tmp_path / "report.json"
        emit_report(rows, path, fmt="json")
        payload = json.loads(path.read_text())
        assert payload == rows_to_dicts(rows)
        assert list(payload[0]) == list(CSV_COLUMNS)

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(ContractViolation):
            emit_report(self._rows(), tmp_path / "x", fmt="tsv")

    def test_parse_rejects_wrong_schema(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ContractViolation):
            parse_report(path)
