"""Regression data model, squared-error objective, and the closed-form baseline.

A dataset stores the design matrix with an explicit all-ones augmentation
column appended as the last column, so the intercept is just one more weight.
The objective throughout the package is the unnormalized sum of squared
residuals ||X w - Y||^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

# Cutoff for the rank-revealing fallback, relative to the largest singular
# value of X^T X.
SINGULAR_CUTOFF = 1e-12

# Residual level at which a direct normal-equations solve is trusted.
STATIONARITY_TOL = 1e-8

# Rows per block when accumulating X^T X, so arbitrarily long datasets stream
# through cache and the reduction order stays fixed (left to right).
GRAM_CHUNK_ROWS = 1 << 16


def _as_float_array(values, name: str, ndim: int) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != ndim:
        raise ContractViolation(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractViolation(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class Dataset:
    """Design matrix ``x`` of shape (n, d+1) with final column all ones, labels ``y``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        x = _as_float_array(self.x, "x", 2)
        y = _as_float_array(self.y, "y", 1)
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise ContractViolation(f"x must be at least 1x1, got shape {x.shape}")
        if y.shape[0] != x.shape[0]:
            raise ContractViolation(
                f"y has {y.shape[0]} entries but x has {x.shape[0]} rows"
            )
        if not np.all(x[:, -1] == 1.0):
            raise ContractViolation("last column of x must be identically 1 (augmentation)")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d_plus_1(self) -> int:
        return self.x.shape[1]

    @classmethod
    def from_features(cls, features, y) -> "Dataset":
        """Build a dataset from raw features (n, d), appending the ones column."""
        feats = _as_float_array(features, "features", 2)
        ones = np.ones((feats.shape[0], 1))
        return cls(x=np.concatenate([feats, ones], axis=1), y=y)


@dataclass(frozen=True)
class Weights:
    """A weight vector of length d+1; the last entry multiplies the ones column."""

    w: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "w", _as_float_array(self.w, "w", 1))

    def __len__(self) -> int:
        return self.w.shape[0]


def regression_error(ds: Dataset, weights: Weights) -> float:
    """Sum of squared residuals ||X w - Y||^2."""
    w = weights.w if isinstance(weights, Weights) else _as_float_array(weights, "w", 1)
    if w.shape[0] != ds.d_plus_1:
        raise ContractViolation(
            f"weight vector has {w.shape[0]} entries, dataset has {ds.d_plus_1} columns"
        )
    r = ds.x @ w - ds.y
    return float(r @ r)


def gram_system(ds: Dataset) -> tuple[np.ndarray, np.ndarray, float]:
    """Accumulate (X^T X, X^T Y, Y^T Y) in one streaming pass over the rows.

    Blocks of GRAM_CHUNK_ROWS rows are combined left to right so the result is
    reproducible and the cost is O(n * (d+1)^2) with O((d+1)^2) extra memory.
    """
    d1 = ds.d_plus_1
    gram = np.zeros((d1, d1))
    xty = np.zeros(d1)
    yty = 0.0
    for start in range(0, ds.n, GRAM_CHUNK_ROWS):
        xc = ds.x[start : start + GRAM_CHUNK_ROWS]
        yc = ds.y[start : start + GRAM_CHUNK_ROWS]
        gram += xc.T @ xc
        # einsum rather than xc.T @ yc: the BLAS gemv kernel's wall time jumps
        # 40-70% at column counts just off its tile width, which poisons the
        # formulate-time benchmarks; einsum is smooth and comparably fast here
        xty += np.einsum("ij,i->j", xc, yc)
        yty += float(yc @ yc)
    # enforce exact symmetry so downstream expansions stay exactly symmetric
    gram = 0.5 * (gram + gram.T)
    return gram, xty, yty


def solve_analytical(ds: Dataset) -> Weights:
    """Least-squares weights from the normal equations.

    Tries a direct solve of (X^T X) w = X^T Y first.  If the system is
    singular, or the direct solution fails the stationarity residual check,
    falls back to an SVD-based solve that discards singular values below
    SINGULAR_CUTOFF times the largest one and returns the minimum-norm
    solution.
    """
    gram, xty, _ = gram_system(ds)
    w = None
    try:
        w = np.linalg.solve(gram, xty)
    except np.linalg.LinAlgError:
        w = None
    if w is not None:
        resid = np.linalg.norm(gram @ w - xty, ord=np.inf)
        if not np.all(np.isfinite(w)) or resid > STATIONARITY_TOL * (
            1.0 + np.linalg.norm(xty, ord=np.inf)
        ):
            w = None
    if w is None:
        w, _, _, _ = np.linalg.lstsq(gram, xty, rcond=SINGULAR_CUTOFF)
    return Weights(w=w)


def _looks_like_header(line: str) -> bool:
    for token in line.strip().split(","):
        try:
            float(token)
        except ValueError:
            return True
    return False


def load_dataset_csv(path) -> Dataset:
    """Read a dataset CSV: first d columns features, last column label.

    A header row is detected by a non-numeric first line and skipped.  The
    augmentation column is appended here; it is never stored in the file.
    """
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            raise ContractViolation(f"{path}: empty dataset file")
    skip = 1 if _looks_like_header(first) else 0
    data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    return Dataset.from_features(data[:, :-1], data[:, -1])


def save_dataset_csv(ds: Dataset, path) -> None:
    """Write features and label columns as CSV, dropping the augmentation column."""
    body = np.column_stack([ds.x[:, :-1], ds.y])
    np.savetxt(path, body, delimiter=",", fmt="%.17g")
