"""Shared builders and independent reference implementations.

The oracle_* helpers deliberately avoid the library's vectorized code paths:
they are plain double loops over the mathematical definitions, so agreement
between library and oracle is meaningful.
"""

from __future__ import annotations

import numpy as np

from qregress import Dataset, PrecisionVector

# pool of candidate precision entries: +-2^e for e in [-3, 3]
_POW2_POOL = sorted(
    [2.0**e for e in range(-3, 4)] + [-(2.0**e) for e in range(-3, 4)]
)


def random_precision(rng: np.random.Generator, k: int) -> PrecisionVector:
    values = sorted(rng.choice(_POW2_POOL, size=k, replace=False).tolist())
    return PrecisionVector(p=values)


def random_dataset(rng: np.random.Generator, n: int, d_plus_1: int) -> Dataset:
    feats = rng.uniform(-2.0, 2.0, size=(n, d_plus_1 - 1))
    y = rng.normal(0.0, 2.0, size=n)
    return Dataset.from_features(feats, y)


def random_qubo_arrays(rng: np.random.Generator, m: int):
    s = rng.normal(size=(m, m))
    a = (s + s.T) / 2.0  # exactly symmetric: float addition is commutative
    b = rng.normal(size=m)
    return a, b


def all_bit_vectors(m: int) -> np.ndarray:
    """(2^m, m) matrix of assignments, index order = lexicographic, bit 0 MSB."""
    idx = np.arange(1 << m)[:, None]
    shifts = np.arange(m - 1, -1, -1)[None, :]
    return ((idx >> shifts) & 1).astype(np.uint8)


def oracle_error(x, y, w) -> float:
    """Sum of squared residuals by explicit accumulation."""
    total = 0.0
    for i in range(len(y)):
        pred = 0.0
        for j in range(len(w)):
            pred += x[i][j] * w[j]
        total += (pred - y[i]) ** 2
    return total


def oracle_energy(a, b, bits) -> float:
    """z^T a z + z^T b by explicit double loop."""
    m = len(b)
    total = 0.0
    for i in range(m):
        if bits[i]:
            total += b[i]
            for j in range(m):
                if bits[j]:
                    total += a[i][j]
    return total


def oracle_decode(p, bits):
    """Weight-major decoding by explicit loop."""
    k = len(p)
    d1 = len(bits) // k
    return [sum(p[j] * bits[i * k + j] for j in range(k)) for i in range(d1)]
