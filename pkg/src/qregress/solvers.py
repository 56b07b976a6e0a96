"""QUBO solver backends and the end-to-end regression-via-QUBO pipeline.

Two backends share one outcome shape: an exact solver that enumerates every
assignment (capped at 24 bits), and a multi-read single-bit-flip Metropolis
annealer.  Annealing reads are mutually independent: read r is driven by a
SplitMix64 stream seeded with ``seed XOR r``, so the per-read results do not
depend on how many reads run or in what order, and the best energy over the
first r reads is non-increasing in r.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .errors import ContractViolation, SizeGuardError
from .formulation import (
    BinarySolution,
    PrecisionVector,
    Qubo,
    batch_energies,
    build_qubo,
    decode,
    qubo_energy,
)
from .regression import Dataset, regression_error

EXHAUSTIVE_MAX_BITS = 24
_ENUM_CHUNK = 1 << 16

# SplitMix64 constants (public-domain mixing function).
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_SH30 = np.uint64(30)
_SH27 = np.uint64(27)
_SH31 = np.uint64(31)
_SH11 = np.uint64(11)
_INV_2_53 = 1.0 / 9007199254740992.0

_SEED_MASK = (1 << 64) - 1
# salt for the fault channel's own stream, kept apart from the read streams
_FAULT_SALT = 0xFA


class Backend(str, Enum):
    EXHAUSTIVE = "exhaustive"
    SIMULATED_ANNEALING = "simulated_annealing"


@dataclass(frozen=True)
class SolverConfig:
    """Backend selection plus annealing schedule and seeding.

    ``fault_prob`` optionally flips each bit of the returned solutions with
    the given probability, emulating unreliable solver hardware; it is off by
    default.
    """

    backend: Backend = Backend.SIMULATED_ANNEALING
    num_reads: int = 1000
    sweeps_per_read: int = 1000
    beta_initial: float = 0.1
    beta_final: float = 10.0
    seed: int = 0
    fault_prob: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "backend", Backend(self.backend))
        if self.num_reads < 1:
            raise ContractViolation(f"num_reads must be >= 1, got {self.num_reads}")
        if self.sweeps_per_read < 1:
            raise ContractViolation(f"sweeps_per_read must be >= 1, got {self.sweeps_per_read}")
        if not (0.0 < self.beta_initial < self.beta_final):
            raise ContractViolation(
                f"need 0 < beta_initial < beta_final, got {self.beta_initial}, {self.beta_final}"
            )
        if not (0 <= self.seed <= _SEED_MASK):
            raise ContractViolation(f"seed must fit in an unsigned 64-bit value, got {self.seed}")
        if not (0.0 <= self.fault_prob < 1.0):
            raise ContractViolation(f"fault_prob must be in [0, 1), got {self.fault_prob}")


@dataclass(frozen=True)
class SolveOutcome:
    """Best solution, per-read best energies, and timing for one solve call."""

    best: BinarySolution
    read_energies: np.ndarray
    ground_state_hits: int
    solve_time_ms: float


@njit(cache=True)
def _next_uniform(state):
    # SplitMix64 step; returns (new_state, uniform in [0, 1)).
    state = state + _GAMMA
    z = state
    z = (z ^ (z >> _SH30)) * _MIX1
    z = (z ^ (z >> _SH27)) * _MIX2
    z = z ^ (z >> _SH31)
    return state, np.float64(z >> _SH11) * _INV_2_53


@njit(cache=True)
def _energy_of(a, base, bits):
    # sum_i base[i] z_i + 2 sum_{i<j} a[i][j] z_i z_j with base = diag(a) + b
    e = 0.0
    m = a.shape[0]
    for i in range(m):
        if bits[i] == 1:
            acc = base[i]
            for j in range(i + 1, m):
                if bits[j] == 1:
                    acc += 2.0 * a[i, j]
            e += acc
    return e


@njit(cache=True)
def _anneal_reads(a, base, betas, num_reads, seed, bits_out, energy_out):
    """Run ``num_reads`` independent Metropolis chains, one per output row.

    Each sweep proposes single-bit flips in index order 0..m-1.  A flip of bit
    i changes the energy by (1 - 2 z_i) * field[i] where
    field[i] = a[i][i] + b[i] + 2 * sum_{j != i} a[i][j] z_j; the field vector
    is maintained incrementally.  The stored per-read energy is recomputed
    from the final best bits so incremental float drift never accumulates
    into the reported values.
    """
    m = a.shape[0]
    n_sweeps = betas.shape[0]
    z = np.zeros(m, dtype=np.uint8)
    best = np.zeros(m, dtype=np.uint8)
    field = np.zeros(m, dtype=np.float64)
    for r in range(num_reads):
        state = seed ^ np.uint64(r)
        for i in range(m):
            state, u = _next_uniform(state)
            z[i] = 1 if u < 0.5 else 0
        energy = 0.0
        for i in range(m):
            s = 0.0
            for j in range(m):
                if j != i and z[j] == 1:
                    s += a[i, j]
            field[i] = base[i] + 2.0 * s
            if z[i] == 1:
                energy += base[i] + s
        best_energy = energy
        for i in range(m):
            best[i] = z[i]
        for t in range(n_sweeps):
            beta = betas[t]
            for i in range(m):
                delta = field[i] if z[i] == 0 else -field[i]
                take = delta <= 0.0
                if not take:
                    state, u = _next_uniform(state)
                    take = u < np.exp(-beta * delta)
                if take:
                    step = 1.0 if z[i] == 0 else -1.0
                    z[i] = 1 - z[i]
                    energy += delta
                    two_step = 2.0 * step
                    for j in range(m):
                        field[j] += two_step * a[j, i]
                    field[i] -= two_step * a[i, i]
                    if energy < best_energy:
                        best_energy = energy
                        for j in range(m):
                            best[j] = z[j]
        energy_out[r] = _energy_of(a, base, best)
        for j in range(m):
            bits_out[r, j] = best[j]


def _lex_less(lhs: np.ndarray, rhs: np.ndarray) -> bool:
    # lexicographic order with bit 0 most significant
    return bytes(lhs) < bytes(rhs)


def _apply_fault_channel(
    q: Qubo, cfg: SolverConfig, bits: np.ndarray, energies: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Corrupt returned solutions with one per-solve flip mask.

    Each bit of the mask is set with probability ``cfg.fault_prob``.  The same
    mask hits every read, the way a fault in solver hardware would distort an
    entire job, so the min-reduction over reads cannot filter it out and the
    chance of an uncorrupted result is (1 - p)^m.
    """
    if cfg.fault_prob <= 0.0:
        return bits, energies
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(_FAULT_SALT,)))
    mask = (rng.random(q.m) < cfg.fault_prob).astype(np.uint8)
    if mask.any():
        bits = bits ^ mask[None, :]
        energies = batch_energies(q, bits)
    return bits, energies


def solve_exhaustive(q: Qubo, cfg: SolverConfig | None = None) -> SolveOutcome:
    """Enumerate all 2^m assignments and return the global minimum.

    Ties break toward the lexicographically smallest bit vector (bit 0 most
    significant).  Refuses problems with more than EXHAUSTIVE_MAX_BITS bits.
    ``cfg`` only matters when its fault channel is enabled.
    """
    if q.m > EXHAUSTIVE_MAX_BITS:
        raise SizeGuardError(
            f"exhaustive enumeration of 2^{q.m} assignments exceeds the "
            f"m <= {EXHAUSTIVE_MAX_BITS} cap"
        )
    t0 = time.perf_counter()
    shifts = np.arange(q.m - 1, -1, -1, dtype=np.int64)
    best_energy = np.inf
    best_index = 0
    total = 1 << q.m
    for start in range(0, total, _ENUM_CHUNK):
        idx = np.arange(start, min(start + _ENUM_CHUNK, total), dtype=np.int64)
        bits = ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
        energies = batch_energies(q, bits)
        k = int(np.argmin(energies))
        if energies[k] < best_energy:
            best_energy = float(energies[k])
            best_index = int(idx[k])
    bits = ((best_index >> shifts) & 1).astype(np.uint8)
    energy = qubo_energy(q, bits)
    if cfg is not None and cfg.fault_prob > 0.0:
        rows, energies = _apply_fault_channel(q, cfg, bits[None, :], np.array([energy]))
        bits, energy = rows[0], float(energies[0])
    elapsed_ms = (time.perf_counter() - t0) * 1000.0
    return SolveOutcome(
        best=BinarySolution(bits=bits, energy=energy),
        read_energies=np.array([energy]),
        ground_state_hits=1,
        solve_time_ms=elapsed_ms,
    )


def solve_annealing(q: Qubo, cfg: SolverConfig) -> SolveOutcome:
    """Simulated annealing over ``cfg.num_reads`` independent reads.

    The inverse temperature ramps geometrically from beta_initial to
    beta_final across sweeps_per_read sweeps.  Deterministic for a fixed
    (problem, config) pair.
    """
    t0 = time.perf_counter()
    base = np.ascontiguousarray(q.a.diagonal() + q.b)
    betas = np.geomspace(cfg.beta_initial, cfg.beta_final, cfg.sweeps_per_read)
    bits = np.empty((cfg.num_reads, q.m), dtype=np.uint8)
    energies = np.empty(cfg.num_reads)
    _anneal_reads(q.a, base, betas, cfg.num_reads, np.uint64(cfg.seed), bits, energies)
    bits, energies = _apply_fault_channel(q, cfg, bits, energies)
    best = 0
    for r in range(1, cfg.num_reads):
        if energies[r] < energies[best] or (
            energies[r] == energies[best] and _lex_less(bits[r], bits[best])
        ):
            best = r
    hits = int(np.count_nonzero(energies == energies[best]))
    elapsed_ms = (time.perf_counter() - t0) * 1000.0
    return SolveOutcome(
        best=BinarySolution(bits=bits[best].copy(), energy=float(energies[best])),
        read_energies=energies,
        ground_state_hits=hits,
        solve_time_ms=elapsed_ms,
    )


def solve_qubo(q: Qubo, cfg: SolverConfig) -> SolveOutcome:
    """Dispatch on the configured backend."""
    if cfg.backend is Backend.EXHAUSTIVE:
        return solve_exhaustive(q, cfg)
    return solve_annealing(q, cfg)


@dataclass(frozen=True)
class SolveReport:
    """End-to-end result of training via the QUBO route."""

    weights: np.ndarray
    error: float
    formulate_time_ms: float
    solve_time_ms: float
    ground_state_hits: int
    num_reads: int
    hamming_distance: int | None
    outcome: SolveOutcome

    def to_dict(self, include_timing: bool = True) -> dict:
        payload: dict = {"weights": [float(v) for v in self.weights], "error": self.error}
        if include_timing:
            payload["formulate_time_ms"] = self.formulate_time_ms
            payload["solve_time_ms"] = self.solve_time_ms
        payload["ground_state_hits"] = self.ground_state_hits
        payload["num_reads"] = self.num_reads
        payload["hamming_distance"] = self.hamming_distance
        return payload


def solve_regression_via_qubo(
    ds: Dataset,
    p: PrecisionVector,
    cfg: SolverConfig,
    truth_bits=None,
) -> SolveReport:
    """Formulate, solve, decode, and score one regression instance.

    ``truth_bits`` (when the generating bit vector is known) enables the
    Hamming-distance field; otherwise it is None.
    """
    t0 = time.perf_counter()
    q = build_qubo(ds, p)
    formulate_ms = (time.perf_counter() - t0) * 1000.0
    outcome = solve_qubo(q, cfg)
    weights = decode(p, outcome.best.bits)
    error = regression_error(ds, weights)
    hamming = None
    if truth_bits is not None:
        truth = truth_bits.bits if isinstance(truth_bits, BinarySolution) else np.asarray(truth_bits)
        if truth.shape != outcome.best.bits.shape:
            raise ContractViolation(
                f"truth bit vector has shape {truth.shape}, solution has {outcome.best.bits.shape}"
            )
        hamming = int(np.count_nonzero(truth != outcome.best.bits))
    num_reads = cfg.num_reads if cfg.backend is Backend.SIMULATED_ANNEALING else 1
    return SolveReport(
        weights=weights.w,
        error=error,
        formulate_time_ms=formulate_ms,
        solve_time_ms=outcome.solve_time_ms,
        ground_state_hits=outcome.ground_state_hits,
        num_reads=num_reads,
        hamming_distance=hamming,
        outcome=outcome,
    )
