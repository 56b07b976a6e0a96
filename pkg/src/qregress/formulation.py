"""Fixed-precision binary encoding of weights and the equivalent QUBO.

Each regression weight is expanded over a shared precision vector P of K
sorted powers of two: w_i = sum_k P[k] * bit[i*K + k].  Bits are ordered
weight-major (all K bits of the first weight, then the second, ...).  With
that encoding, minimizing ||X w - Y||^2 over the representable grid equals
minimizing the quadratic binary objective

    energy(z) = z^T a z + z^T b,       a = E^T (X^T X) E,  b = -2 E^T (X^T Y)

where E is the block-diagonal expansion matrix.  The constant Y^T Y is kept
separately as ``offset`` so that energy(z) + offset reproduces the regression
error of the decoded weights.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, SizeGuardError
from .regression import Dataset, Weights, gram_system

# enumerate_representable and ground-truth encoding walk 2^K subsets
ENUMERATION_MAX_BITS = 20


def _is_power_of_two(value: float) -> bool:
    if value == 0 or not math.isfinite(value):
        return False
    mantissa, _ = math.frexp(abs(value))
    return mantissa == 0.5


@dataclass(frozen=True)
class PrecisionVector:
    """K strictly ascending entries, by default signed integral powers of 2.

    ``allow_any`` skips the power-of-two check (the encoding itself works for
    arbitrary reals); sortedness is always required.
    """

    p: np.ndarray
    allow_any: bool = False

    def __post_init__(self) -> None:
        p = np.asarray(self.p, dtype=np.float64)
        if p.ndim != 1 or p.shape[0] < 1:
            raise ContractViolation("precision vector must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(p)):
            raise ContractViolation("precision vector contains non-finite values")
        if not np.all(np.diff(p) > 0):
            raise ContractViolation("precision vector must be strictly ascending")
        if not self.allow_any:
            bad = [float(v) for v in p if not _is_power_of_two(float(v))]
            if bad:
                raise ContractViolation(
                    f"precision entries must be signed integral powers of 2, got {bad}; "
                    "pass allow_any=True (--allow-any-precision) to override"
                )
        object.__setattr__(self, "p", p)

    @property
    def k(self) -> int:
        return self.p.shape[0]

    @classmethod
    def from_string(cls, text: str, allow_any: bool = False) -> "PrecisionVector":
        """Parse a comma-separated list such as ``"0.25,0.5"``."""
        try:
            values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
        except ValueError as exc:
            raise ContractViolation(f"bad precision list {text!r}: {exc}") from None
        return cls(p=values, allow_any=allow_any)


def precision_matrix(p: PrecisionVector, d_plus_1: int) -> np.ndarray:
    """Block-diagonal expansion matrix of shape (d+1, (d+1)*K).

    Row i holds P in columns [i*K, (i+1)*K) and zeros elsewhere, so that
    weights = matrix @ bits decodes a weight-major bit vector.
    """
    if d_plus_1 < 1:
        raise ContractViolation(f"d_plus_1 must be >= 1, got {d_plus_1}")
    return np.kron(np.eye(int(d_plus_1)), p.p[None, :])


def _as_bits(bits, k: int | None = None) -> np.ndarray:
    if hasattr(bits, "bits"):  # accept a BinarySolution
        bits = bits.bits
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ContractViolation(f"bit vector must be 1-dimensional, got shape {arr.shape}")
    if not np.all((arr == 0) | (arr == 1)):
        raise ContractViolation("bit vector entries must be 0 or 1")
    if k is not None and arr.shape[0] % k != 0:
        raise ContractViolation(
            f"bit vector length {arr.shape[0]} is not a multiple of K={k}"
        )
    return arr.astype(np.uint8)


def decode(p: PrecisionVector, bits) -> Weights:
    """Map a weight-major bit vector of length (d+1)*K back to d+1 weights."""
    arr = _as_bits(bits, p.k)
    w = arr.reshape(-1, p.k).astype(np.float64) @ p.p
    return Weights(w=w)


def enumerate_representable(p: PrecisionVector) -> set[float]:
    """All distinct values sum_k p[k]*bit[k] over the 2^K bit choices."""
    if p.k > ENUMERATION_MAX_BITS:
        raise SizeGuardError(
            f"enumeration over 2^{p.k} subset sums exceeds the K <= {ENUMERATION_MAX_BITS} cap"
        )
    sums = np.zeros(1)
    for entry in p.p:
        sums = np.concatenate([sums, sums + entry])
    return {float(v) for v in np.unique(sums)}


@dataclass(frozen=True)
class Qubo:
    """Quadratic binary objective: energy(z) = z^T a z + z^T b, plus ``offset``.

    ``a`` is symmetric (m, m), ``b`` has length m, and ``offset`` carries the
    constant dropped from the regression error (Y^T Y for built problems).
    """

    a: np.ndarray
    b: np.ndarray
    offset: float = 0.0

    def __post_init__(self) -> None:
        a = np.ascontiguousarray(np.asarray(self.a, dtype=np.float64))
        b = np.ascontiguousarray(np.asarray(self.b, dtype=np.float64))
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ContractViolation(f"a must be square and non-empty, got shape {a.shape}")
        if b.shape != (a.shape[0],):
            raise ContractViolation(f"b has shape {b.shape}, expected ({a.shape[0]},)")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and math.isfinite(self.offset)):
            raise ContractViolation("QUBO coefficients must be finite")
        if not np.array_equal(a, a.T):
            raise ContractViolation("a must be symmetric")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def m(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class BinarySolution:
    """An assignment of the m binary variables together with its energy."""

    bits: np.ndarray
    energy: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "bits", _as_bits(self.bits))
        object.__setattr__(self, "energy", float(self.energy))


def build_qubo(ds: Dataset, p: PrecisionVector) -> Qubo:
    """Expand the regression normal-equations system over the bit encoding.

    The data statistics X^T X and X^T Y are accumulated in a single pass over
    the rows (O(n*(d+1)^2)); the precision expansion is a Kronecker product
    costing O((d+1)^2 * K^2).  No n-by-m intermediate is ever formed.
    """
    gram, xty, yty = gram_system(ds)
    pp = np.outer(p.p, p.p)
    a = np.kron(gram, pp)
    b = -2.0 * np.kron(xty, p.p)
    return Qubo(a=a, b=b, offset=yty)


def merged_coefficients(q: Qubo) -> tuple[np.ndarray, np.ndarray]:
    """Canonical single-matrix form: diagonal a[i][i]+b[i], doubled upper triangle.

    Since z_i^2 = z_i, energy(z) = sum_i c[i] z_i + sum_{i<j} u[i][j] z_i z_j.
    This is also exactly the convention of the coordinate-list export, so
    energies computed from an exported-and-reimported problem match bit for
    bit.
    """
    c = q.a.diagonal() + q.b
    u = 2.0 * np.triu(q.a, k=1)
    return c, u


def qubo_energy(q: Qubo, bits) -> float:
    """Energy z^T a z + z^T b of one assignment; ``offset`` is not included."""
    z = _as_bits(bits).astype(np.float64)
    if z.shape[0] != q.m:
        raise ContractViolation(f"bit vector length {z.shape[0]} != m={q.m}")
    c, u = merged_coefficients(q)
    return float(z @ c + z @ (u @ z))


def batch_energies(q: Qubo, bit_rows: np.ndarray) -> np.ndarray:
    """qubo_energy applied to each row of an (r, m) bit matrix."""
    z = bit_rows.astype(np.float64)
    c, u = merged_coefficients(q)
    return z @ c + np.einsum("ij,ij->i", z @ u, z)


# ---------------------------------------------------------------------------
# export / import
# ---------------------------------------------------------------------------


def format_qubo_coord(q: Qubo) -> str:
    """Coordinate-list text form.

    Header ``p <m> <nonzero-count>``; one ``i j value`` line per upper-triangle
    nonzero (0-indexed, i <= j) where the diagonal carries a[i][i] + b[i] and
    off-diagonal entries carry 2*a[i][j]; trailing comment ``# offset <value>``.
    """
    c, u = merged_coefficients(q)
    lines = []
    for i in range(q.m):
        if c[i] != 0.0:
            lines.append(f"{i} {i} {float(c[i])!r}")
        for j in range(i + 1, q.m):
            if u[i, j] != 0.0:
                lines.append(f"{i} {j} {float(u[i, j])!r}")
    header = f"p {q.m} {len(lines)}"
    footer = f"# offset {float(q.offset)!r}"
    return "\n".join([header, *lines, footer]) + "\n"


def parse_qubo_coord(text: str) -> Qubo:
    """Inverse of :func:`format_qubo_coord`.

    The merged diagonal cannot be split back into separate a[i][i] and b[i]
    terms, so the imported problem stores it on the diagonal of ``a`` with
    b = 0; energies and minimizers are unchanged.
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("p "):
        raise ContractViolation("coordinate file must start with a 'p <m> <count>' header")
    try:
        _, m_str, count_str = lines[0].split()
        m, count = int(m_str), int(count_str)
    except ValueError:
        raise ContractViolation(f"malformed header {lines[0]!r}") from None
    if m < 1:
        raise ContractViolation(f"header declares m={m}")
    a = np.zeros((m, m))
    offset = 0.0
    entries = 0
    for line in lines[1:]:
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "offset":
                offset = float(parts[1])
            continue
        try:
            i_str, j_str, val_str = line.split()
            i, j, val = int(i_str), int(j_str), float(val_str)
        except ValueError:
            raise ContractViolation(f"malformed entry line {line!r}") from None
        if not (0 <= i <= j < m):
            raise ContractViolation(f"entry ({i}, {j}) outside upper triangle of m={m}")
        if i == j:
            a[i, i] = val
        else:
            half = val / 2.0
            a[i, j] = half
            a[j, i] = half
        entries += 1
    if entries != count:
        raise ContractViolation(f"header declares {count} entries, found {entries}")
    return Qubo(a=a, b=np.zeros(m), offset=offset)


def write_qubo_coord(q: Qubo, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_qubo_coord(q))


def read_qubo_coord(path) -> Qubo:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_qubo_coord(fh.read())


def qubo_to_dict(q: Qubo) -> dict:
    """JSON-ready mirror of the record fields."""
    return {
        "m": q.m,
        "a": q.a.tolist(),
        "b": q.b.tolist(),
        "offset": q.offset,
    }


def qubo_from_dict(payload: dict) -> Qubo:
    try:
        a, b, offset = payload["a"], payload["b"], payload["offset"]
    except KeyError as exc:
        raise ContractViolation(f"QUBO JSON missing field {exc}") from None
    q = Qubo(a=a, b=b, offset=offset)
    if "m" in payload and int(payload["m"]) != q.m:
        raise ContractViolation(f"declared m={payload['m']} but matrix is {q.m}x{q.m}")
    return q


def write_qubo_json(q: Qubo, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(qubo_to_dict(q), fh, indent=2)
        fh.write("\n")


def read_qubo_json(path) -> Qubo:
    with open(path, "r", encoding="utf-8") as fh:
        return qubo_from_dict(json.load(fh))
