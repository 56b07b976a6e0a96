"""Linear regression as a quadratic binary optimization problem.

Weights are expanded over a fixed precision vector of powers of two, turning
least-squares training into a QUBO whose minimum coincides with the best
representable weight vector.  The package ships an exact solver, a seeded
simulated annealer, a synthetic data generator with planted solutions, and a
benchmarking harness against the closed-form classical baseline.
"""

from .bench import (
    CSV_COLUMNS,
    ExperimentRow,
    RecoveryReport,
    emit_report,
    parse_report,
    run_recovery_experiment,
    run_scaling_d,
    run_scaling_n,
)
from .datagen import GenSpec, generate, read_truth_sidecar, write_dataset_files
from .errors import ContractViolation, SizeGuardError
from .formulation import (
    BinarySolution,
    PrecisionVector,
    Qubo,
    batch_energies,
    build_qubo,
    decode,
    enumerate_representable,
    format_qubo_coord,
    parse_qubo_coord,
    precision_matrix,
    qubo_energy,
    read_qubo_coord,
    read_qubo_json,
    write_qubo_coord,
    write_qubo_json,
)
from .regression import (
    Dataset,
    Weights,
    load_dataset_csv,
    regression_error,
    save_dataset_csv,
    solve_analytical,
)
from .solvers import (
    Backend,
    SolveOutcome,
    SolveReport,
    SolverConfig,
    solve_annealing,
    solve_exhaustive,
    solve_qubo,
    solve_regression_via_qubo,
)

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "BinarySolution",
    "CSV_COLUMNS",
    "ContractViolation",
    "Dataset",
    "ExperimentRow",
    "GenSpec",
    "PrecisionVector",
    "Qubo",
    "RecoveryReport",
    "SizeGuardError",
    "SolveOutcome",
    "SolveReport",
    "SolverConfig",
    "Weights",
    "batch_energies",
    "build_qubo",
    "decode",
    "emit_report",
    "enumerate_representable",
    "format_qubo_coord",
    "generate",
    "load_dataset_csv",
    "parse_qubo_coord",
    "parse_report",
    "precision_matrix",
    "qubo_energy",
    "read_qubo_coord",
    "read_qubo_json",
    "read_truth_sidecar",
    "regression_error",
    "run_recovery_experiment",
    "run_scaling_d",
    "run_scaling_n",
    "save_dataset_csv",
    "solve_analytical",
    "solve_annealing",
    "solve_exhaustive",
    "solve_qubo",
    "solve_regression_via_qubo",
    "write_dataset_files",
    "write_qubo_coord",
    "write_qubo_json",
    "__version__",
]
