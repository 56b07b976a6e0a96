"""Synthetic dataset generation with representable ground-truth weights.

Ground truth is drawn (or supplied) on the grid the precision vector can
represent, so noiseless instances have an exactly recoverable planted
solution.  The seed is split into three independent substreams (features,
noise, ground truth) via numpy SeedSequence spawning, so changing n never
perturbs the ground-truth draw.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractViolation
from .formulation import ENUMERATION_MAX_BITS, BinarySolution, PrecisionVector, decode
from .regression import Dataset, Weights, save_dataset_csv

_SEED_MASK = (1 << 64) - 1


def _encode_weight(p: PrecisionVector, value: float) -> np.ndarray:
    """First (lexicographically, bit 0 most significant) bit pattern summing to value."""
    if p.k > ENUMERATION_MAX_BITS:
        raise ContractViolation(
            f"encoding search over 2^{p.k} patterns exceeds the K <= {ENUMERATION_MAX_BITS} cap"
        )
    for pattern in range(1 << p.k):
        bits = np.array([(pattern >> (p.k - 1 - i)) & 1 for i in range(p.k)], dtype=np.uint8)
        if float(bits @ p.p) == value:
            return bits
    raise ContractViolation(
        f"ground-truth entry {value!r} is not representable with precision {p.p.tolist()}"
    )


@dataclass(frozen=True)
class GenSpec:
    """Everything needed to reproduce one synthetic dataset."""

    n: int
    d_plus_1: int
    precision: PrecisionVector
    noise_sigma: float = 0.0
    feature_low: float = -1.0
    feature_high: float = 1.0
    seed: int = 0
    ground_truth: Weights | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ContractViolation(f"n must be >= 1, got {self.n}")
        if self.d_plus_1 < 1:
            raise ContractViolation(f"d_plus_1 must be >= 1, got {self.d_plus_1}")
        if self.noise_sigma < 0:
            raise ContractViolation(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not self.feature_low < self.feature_high:
            raise ContractViolation(
                f"need feature_low < feature_high, got [{self.feature_low}, {self.feature_high})"
            )
        if not (0 <= self.seed <= _SEED_MASK):
            raise ContractViolation(f"seed must fit in an unsigned 64-bit value, got {self.seed}")
        if self.ground_truth is not None and len(self.ground_truth) != self.d_plus_1:
            raise ContractViolation(
                f"ground truth has {len(self.ground_truth)} entries, expected {self.d_plus_1}"
            )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d_plus_1": self.d_plus_1,
            "precision": [float(v) for v in self.precision.p],
            "noise_sigma": self.noise_sigma,
            "feature_low": self.feature_low,
            "feature_high": self.feature_high,
            "seed": self.seed,
        }


def generate(spec: GenSpec) -> tuple[Dataset, Weights, BinarySolution]:
    """Draw one dataset; returns (dataset, true weights, true bit vector).

    Features are uniform in [feature_low, feature_high); labels are
    X w_true + Normal(0, sigma^2) noise.  The returned solution's energy is
    the value the built QUBO assigns to the true bits, namely
    regression_error - Y^T Y.
    """
    feat_ss, noise_ss, truth_ss = np.random.SeedSequence(spec.seed).spawn(3)
    p = spec.precision
    if spec.ground_truth is None:
        truth_rng = np.random.default_rng(truth_ss)
        bits = (truth_rng.random(spec.d_plus_1 * p.k) < 0.5).astype(np.uint8)
    else:
        bits = np.concatenate(
            [_encode_weight(p, float(v)) for v in spec.ground_truth.w]
        )
    weights = decode(p, bits)
    n_features = spec.d_plus_1 - 1
    feats = np.random.default_rng(feat_ss).uniform(
        spec.feature_low, spec.feature_high, size=(spec.n, n_features)
    )
    x = np.concatenate([feats, np.ones((spec.n, 1))], axis=1)
    y = x @ weights.w
    if spec.noise_sigma > 0:
        y = y + np.random.default_rng(noise_ss).normal(0.0, spec.noise_sigma, spec.n)
    ds = Dataset(x=x, y=y)
    residual = ds.x @ weights.w - ds.y
    energy = float(residual @ residual) - float(ds.y @ ds.y)
    return ds, weights, BinarySolution(bits=bits, energy=energy)


def truth_sidecar_path(csv_path) -> Path:
    """ds.csv -> ds.truth.json (suffix swap next to the dataset file)."""
    return Path(csv_path).with_suffix(".truth.json")


def write_dataset_files(
    ds: Dataset, weights: Weights, truth: BinarySolution, spec: GenSpec, csv_path
) -> Path:
    """Write the dataset CSV plus a sidecar JSON with the planted solution."""
    save_dataset_csv(ds, csv_path)
    sidecar = truth_sidecar_path(csv_path)
    payload = {
        "weights": [float(v) for v in weights.w],
        "bits": [int(b) for b in truth.bits],
        "spec": spec.to_dict(),
    }
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return sidecar


def read_truth_sidecar(path) -> tuple[Weights, np.ndarray]:
    """Load (weights, bits) from a sidecar written by write_dataset_files."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        weights = Weights(w=payload["weights"])
        bits = np.asarray(payload["bits"], dtype=np.uint8)
    except KeyError as exc:
        raise ContractViolation(f"truth sidecar missing field {exc}") from None
    return weights, bits
