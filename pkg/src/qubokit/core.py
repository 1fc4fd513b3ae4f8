"""Sparse QUBO container, sample records, and summary metrics.

Energies follow the minimization convention

    E(x) = offset + sum_i c[i,i] * x_i + sum_{i<j} c[i,j] * x_i * x_j

over binary vectors x.  Coefficients are stored upper-triangular: any
weight supplied for (j, i) with j > i is folded into the (i, j) slot, so
the (i, j) entry always carries the full pair weight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionError,
    DomainError,
    EmptyInputError,
    FormatError,
    ParameterError,
)

__all__ = [
    "QuboMatrix",
    "BinarySample",
    "SampleSet",
    "MetricsSummary",
    "energy",
    "energies",
    "delta_energy",
    "violation_percentage",
    "pseudo_energy",
    "summarize",
    "qubo_to_text",
    "qubo_from_text",
]


# ---- QUBO container ----


@dataclass(frozen=True)
class QuboMatrix:
    """Immutable sparse QUBO: variable count, coefficient table, offset."""

    n: int
    coeffs: Mapping[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise DimensionError(f"variable count must be a positive int, got {self.n!r}")
        if not math.isfinite(self.offset):
            raise DomainError(f"offset must be finite, got {self.offset!r}")
        folded: dict[tuple[int, int], float] = {}
        for key, value in self.coeffs.items():
            i, j = key
            if not (isinstance(i, (int, np.integer)) and isinstance(j, (int, np.integer))):
                raise DomainError(f"coefficient key {key!r} is not an integer pair")
            i, j = int(i), int(j)
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise DimensionError(f"coefficient key {key!r} outside 0..{self.n - 1}")
            v = float(value)
            if not math.isfinite(v):
                raise DomainError(f"coefficient for {key!r} must be finite, got {value!r}")
            slot = (i, j) if i <= j else (j, i)
            folded[slot] = folded.get(slot, 0.0) + v
        object.__setattr__(self, "coeffs", folded)
        object.__setattr__(self, "offset", float(self.offset))

    # ---- Inspection helpers ----

    @property
    def num_terms(self) -> int:
        return len(self.coeffs)

    def linear(self) -> np.ndarray:
        """Diagonal coefficients as a dense length-n vector."""
        out = np.zeros(self.n, dtype=np.float64)
        for (i, j), v in self.coeffs.items():
            if i == j:
                out[i] = v
        return out

    def max_abs_coefficient(self) -> float:
        return max((abs(v) for v in self.coeffs.values()), default=0.0)

    def min_abs_nonzero_coefficient(self) -> float:
        vals = [abs(v) for v in self.coeffs.values() if v != 0.0]
        if not vals:
            raise EmptyInputError("QUBO has no nonzero coefficients")
        return min(vals)

    @cached_property
    def _neighbors(self) -> dict[int, list[tuple[int, float]]]:
        adj: dict[int, list[tuple[int, float]]] = {i: [] for i in range(self.n)}
        for (i, j), v in self.coeffs.items():
            if i != j:
                adj[i].append((j, v))
                adj[j].append((i, v))
        return adj

    def to_dense_upper(self) -> np.ndarray:
        """Dense upper-triangular matrix with linear terms on the diagonal."""
        m = np.zeros((self.n, self.n), dtype=np.float64)
        for (i, j), v in self.coeffs.items():
            m[i, j] = v
        return m

    @cached_property
    def _csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Symmetric CSR of pair weights plus the linear vector, for kernels."""
        lin = np.zeros(self.n, dtype=np.float64)
        rows: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
        for (i, j), v in self.coeffs.items():
            if i == j:
                lin[i] = v
            elif v != 0.0:
                rows[i].append((j, v))
                rows[j].append((i, v))
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        total = sum(len(r) for r in rows)
        indices = np.empty(total, dtype=np.int64)
        data = np.empty(total, dtype=np.float64)
        pos = 0
        for i, row in enumerate(rows):
            row.sort()
            for j, v in row:
                indices[pos] = j
                data[pos] = v
                pos += 1
            indptr[i + 1] = pos
        return lin, indptr, indices, data

    def kernel_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        lin, indptr, indices, data = self._csr
        return lin, indptr, indices, data


# ---- Evaluation ----


def _check_bits(q: QuboMatrix, x: Sequence[int] | np.ndarray) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.shape[0] != q.n:
        raise DimensionError(f"expected a length-{q.n} vector, got shape {arr.shape}")
    if arr.dtype == bool:
        return arr.astype(np.uint8)
    vals = np.unique(arr)
    for v in vals:
        if v not in (0, 1):
            raise DomainError(f"bit vector entries must be 0 or 1, found {v!r}")
    return arr.astype(np.uint8)


def energy(q: QuboMatrix, x: Sequence[int] | np.ndarray) -> float:
    """Evaluate offset + linear + quadratic terms on one binary vector."""
    bits = _check_bits(q, x)
    total = q.offset
    for (i, j), v in q.coeffs.items():
        if i == j:
            if bits[i]:
                total += v
        elif bits[i] and bits[j]:
            total += v
    return float(total)


def energies(q: QuboMatrix, xs: np.ndarray) -> np.ndarray:
    """Vectorized energy for a (batch, n) matrix of binary rows."""
    arr = np.asarray(xs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != q.n:
        raise DimensionError(f"expected shape (batch, {q.n}), got {arr.shape}")
    upper = q.to_dense_upper()
    return np.einsum("bi,ij,bj->b", arr, upper, arr) + q.offset


def delta_energy(q: QuboMatrix, x: Sequence[int] | np.ndarray, k: int) -> float:
    """Energy change from flipping bit k, computed from the local field."""
    bits = _check_bits(q, x)
    if not (0 <= k < q.n):
        raise DimensionError(f"variable index {k} outside 0..{q.n - 1}")
    fld = q.coeffs.get((k, k), 0.0)
    for j, w in q._neighbors[k]:
        if bits[j]:
            fld += w
    return float((1 - 2 * int(bits[k])) * fld)


# ---- Samples ----


@dataclass(frozen=True, eq=False)
class BinarySample:
    """One solver configuration with its energy and feasibility record."""

    bits: np.ndarray
    energy: float
    feasible: bool = True
    violations: int = 0

    def __post_init__(self) -> None:
        arr = np.asarray(self.bits, dtype=np.uint8)
        if arr.ndim != 1:
            raise DimensionError("sample bits must be one-dimensional")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)
        if self.violations < 0:
            raise DomainError("violation count cannot be negative")

    def key(self) -> bytes:
        return self.bits.tobytes()


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Samples returned by one solver invocation."""

    samples: tuple[BinarySample, ...]
    solver: str = ""
    solve_seconds: float = 0.0
    total_constraints: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(self.samples))
        if self.solve_seconds < 0:
            raise DomainError("solve_seconds cannot be negative")
        if self.total_constraints < 0:
            raise DomainError("total_constraints cannot be negative")
        lengths = {s.bits.shape[0] for s in self.samples}
        if len(lengths) > 1:
            raise DimensionError(f"samples have mixed lengths {sorted(lengths)}")

    def __len__(self) -> int:
        return len(self.samples)

    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.samples], dtype=np.float64)

    def feasible_mask(self) -> np.ndarray:
        return np.array([s.feasible for s in self.samples], dtype=bool)

    def best(self, sense: str = "min") -> BinarySample:
        if not self.samples:
            raise EmptyInputError("sample set is empty")
        pool = [s for s in self.samples if s.feasible] or list(self.samples)
        if sense == "min":
            return min(pool, key=lambda s: s.energy)
        if sense == "max":
            return max(pool, key=lambda s: s.energy)
        raise ParameterError(f"sense must be 'min' or 'max', got {sense!r}")


# ---- Metrics ----


def violation_percentage(violations: int, total_constraints: int) -> float:
    """Violated constraints as a percentage of the constraint count."""
    if total_constraints <= 0:
        raise DomainError("total_constraints must be positive")
    if violations < 0 or violations > total_constraints:
        raise DomainError(
            f"violations must lie in 0..{total_constraints}, got {violations}"
        )
    return 100.0 * violations / total_constraints


def pseudo_energy(objective_energy: float, penalty_energy: float) -> float:
    """Objective value plus accumulated penalty terms."""
    return float(objective_energy) + float(penalty_energy)


@dataclass(frozen=True)
class MetricsSummary:
    """Aggregate statistics over a sample set."""

    mean_energy: float
    best_energy: float
    std_energy: float
    p_f: float
    mean_violation_pct: float
    none_feasible: bool = False
    normalized_mean: float | None = None
    normalized_best: float | None = None


def summarize(
    s: SampleSet,
    reference_energy: float | None = None,
    sense: str = "min",
) -> MetricsSummary:
    """Reduce a sample set to mean/best/std, feasibility rate, violations.

    Statistics run over feasible samples; when none are feasible they run
    over all samples and the summary is flagged.  Normalized energies are
    ratios against ``reference_energy`` when one is supplied.
    """
    if sense not in ("min", "max"):
        raise ParameterError(f"sense must be 'min' or 'max', got {sense!r}")
    if len(s) == 0:
        raise EmptyInputError("cannot summarize an empty sample set")
    mask = s.feasible_mask()
    none_feasible = not mask.any()
    pool = s.energies() if none_feasible else s.energies()[mask]
    mean = float(pool.mean())
    best = float(pool.min() if sense == "min" else pool.max())
    std = float(pool.std())
    p_f = 100.0 * float(mask.sum()) / len(s)
    if s.total_constraints > 0:
        mean_viol = float(
            np.mean(
                [
                    violation_percentage(smp.violations, s.total_constraints)
                    for smp in s.samples
                ]
            )
        )
    else:
        mean_viol = 0.0
    norm_mean = norm_best = None
    if reference_energy is not None:
        if reference_energy == 0:
            raise ParameterError("reference_energy must be nonzero for normalization")
        norm_mean = mean / reference_energy
        norm_best = best / reference_energy
    return MetricsSummary(
        mean_energy=mean,
        best_energy=best,
        std_energy=std,
        p_f=p_f,
        mean_violation_pct=mean_viol,
        none_feasible=none_feasible,
        normalized_mean=norm_mean,
        normalized_best=norm_best,
    )


# ---- Text serialization ----


def qubo_to_text(q: QuboMatrix) -> str:
    """Render a QUBO as a header line plus one `i j coeff` line per term.

    Floats use shortest round-trip formatting, so write-then-read returns
    a bit-identical coefficient table.
    """
    lines = [f"n {q.n} offset {repr(q.offset)}"]
    for (i, j) in sorted(q.coeffs):
        lines.append(f"{i} {j} {repr(q.coeffs[i, j])}")
    return "\n".join(lines) + "\n"


def qubo_from_text(text: str) -> QuboMatrix:
    """Parse the text form produced by :func:`qubo_to_text`."""
    header: tuple[int, float] | None = None
    coeffs: dict[tuple[int, int], float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if header is None:
            if len(tokens) != 4 or tokens[0] != "n" or tokens[2] != "offset":
                raise FormatError(f"line {lineno}: expected 'n <count> offset <real>'")
            try:
                header = (int(tokens[1]), float(tokens[3]))
            except ValueError as exc:
                raise FormatError(f"line {lineno}: bad header numbers") from exc
            continue
        if len(tokens) != 3:
            raise FormatError(f"line {lineno}: expected 'i j coeff'")
        try:
            i, j, v = int(tokens[0]), int(tokens[1]), float(tokens[2])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: bad term entry") from exc
        slot = (i, j) if i <= j else (j, i)
        if slot in coeffs:
            raise FormatError(f"line {lineno}: duplicate term for pair {slot}")
        coeffs[slot] = v
    if header is None:
        raise FormatError("missing header line")
    n, offset = header
    return QuboMatrix(n=n, coeffs=coeffs, offset=offset)
