"""Problem formulations: max-cut, minimum vertex cover, and assignment QUBOs.

All builders emit minimization QUBOs.  Max-cut records sense="max", meaning
reported objective values are the negated QUBO energy (the cut weight).
Assignment problems place facility i at location k through the flattened
variable index i*n + k, and enforce row/column one-hot structure with the
quadratic penalty derived from the constraint system A x = b.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .core import QuboMatrix, energy as qubo_energy
from .errors import (
    DimensionError,
    DomainError,
    EmptyInputError,
    ParameterError,
)

__all__ = [
    "WeightedGraph",
    "QapInstance",
    "ConstraintSystem",
    "QuboProblem",
    "find_index",
    "maxcut_to_qubo",
    "mvc_to_qubo",
    "mvc_violations",
    "qap_objective_qubo",
    "prepare_matrix_a",
    "prepare_vector_b",
    "a_to_q",
    "qap_to_qubo",
    "qap_violations",
    "qap_energy",
    "decode_permutation",
    "permutation_to_bits",
]


# ---- Input containers ----


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph with nodes 0..node_count-1."""

    node_count: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise DimensionError("graph needs at least one node")
        seen: set[tuple[int, int]] = set()
        normalized = []
        for u, v, w in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise DomainError(f"self-loop at node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise DimensionError(f"edge ({u},{v}) outside node range")
            if u > v:
                u, v = v, u
            if (u, v) in seen:
                raise DomainError(f"duplicate edge ({u},{v})")
            seen.add((u, v))
            w = float(w)
            if not math.isfinite(w) or w == 0.0:
                raise DomainError(f"edge ({u},{v}) needs a finite nonzero weight")
            normalized.append((u, v, w))
        object.__setattr__(self, "edges", tuple(normalized))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.node_count, dtype=np.int64)
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def max_degree(self) -> int:
        if not self.edges:
            return 0
        return int(self.degrees().max())


@dataclass(frozen=True, eq=False)
class QapInstance:
    """Flow/distance matrices for a facility-location assignment problem.

    The flow diagonal may be nonzero: flow[i, i] weights dist[k, k] when
    facility i sits at location k, which prices positions themselves (the
    warehouse mapping stores entry-to-location distances there). Plain
    pairwise instances keep both diagonals at zero.
    """

    flow: np.ndarray
    dist: np.ndarray

    def __post_init__(self) -> None:
        f = np.asarray(self.flow, dtype=np.float64)
        d = np.asarray(self.dist, dtype=np.float64)
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise DimensionError(f"flow must be square, got shape {f.shape}")
        if d.shape != f.shape:
            raise DimensionError(
                f"distance shape {d.shape} does not match flow shape {f.shape}"
            )
        if f.shape[0] < 1:
            raise DimensionError("assignment instance needs at least one facility")
        if not np.isfinite(f).all() or not np.isfinite(d).all():
            raise DomainError("flow and distance entries must be finite")
        if not np.allclose(f, f.T, atol=1e-9):
            raise DomainError("flow matrix must be symmetric")
        if (d < 0).any():
            raise DomainError("distance entries must be nonnegative")
        f.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "flow", f)
        object.__setattr__(self, "dist", d)

    @property
    def n(self) -> int:
        return self.flow.shape[0]


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    """Linear one-hot system A x = b with its quadratic penalty weight."""

    a: np.ndarray
    b: np.ndarray
    penalty: float

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if a.ndim != 2 or b.ndim != 1 or a.shape[0] != b.shape[0]:
            raise DimensionError("constraint system shapes are inconsistent")
        if self.penalty <= 0:
            raise ParameterError("penalty weight must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def scaled(self) -> tuple[np.ndarray, np.ndarray]:
        root = math.sqrt(self.penalty)
        return self.a * root, self.b * root


# ---- Problem wrapper ----


@dataclass(frozen=True, eq=False)
class QuboProblem:
    """A QUBO plus the source-problem context needed to judge samples."""

    qubo: QuboMatrix
    kind: str
    sense: str = "min"
    total_constraints: int = 0
    graph: WeightedGraph | None = None
    qap: QapInstance | None = None
    alpha: float = 0.0
    penalty: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("maxcut", "mvc", "qap", "raw"):
            raise ParameterError(f"unknown problem kind {self.kind!r}")
        if self.sense not in ("min", "max"):
            raise ParameterError(f"sense must be 'min' or 'max', got {self.sense!r}")

    @classmethod
    def from_matrix(cls, q: QuboMatrix) -> "QuboProblem":
        return cls(qubo=q, kind="raw")

    @property
    def num_variables(self) -> int:
        return self.qubo.n

    def violations(self, x: np.ndarray) -> int:
        if self.kind == "mvc":
            return mvc_violations(self.graph, x)
        if self.kind == "qap":
            return qap_violations(self.qap.n, x)
        return 0

    def feasible(self, x: np.ndarray) -> bool:
        return self.violations(x) == 0

    def energy(self, x: np.ndarray) -> float:
        return qubo_energy(self.qubo, x)

    def penalty_energy(self, x: np.ndarray) -> float:
        """Value of the constraint-penalty part of the energy on x."""
        if self.kind == "mvc":
            return self.alpha * mvc_violations(self.graph, x)
        if self.kind == "qap":
            return self.penalty * _onehot_residual(self.qap.n, x)
        return 0.0

    def objective(self, x: np.ndarray) -> float:
        """Source-problem objective: cut weight, cover size, or flow cost."""
        if self.kind == "maxcut":
            return -self.energy(x)
        if self.kind == "mvc":
            return float(np.asarray(x).sum())
        if self.kind == "qap":
            return self.energy(x) - self.penalty_energy(x)
        return self.energy(x)

    def report_energy(self, e: float) -> float:
        """Map a QUBO energy to the reported scale for this problem's sense."""
        return -e if self.sense == "max" else e

    def decode(self, x: np.ndarray):
        """Problem-domain view of a sample, or None when infeasible."""
        if self.kind == "maxcut":
            bits = np.asarray(x)
            side = np.flatnonzero(bits == 1)
            return (np.flatnonzero(bits == 0), side)
        if self.kind == "mvc":
            return np.flatnonzero(np.asarray(x) == 1)
        if self.kind == "qap":
            return decode_permutation(x, self.qap.n)
        return None


# ---- Max-cut ----


def maxcut_to_qubo(g: WeightedGraph) -> QuboProblem:
    """Minimization QUBO whose energy is the negated cut weight.

    Each edge (u, v, w) contributes -w * (x_u + x_v - 2 x_u x_v), the
    weighted indicator that the edge crosses the partition.
    """
    if g.edge_count == 0:
        raise EmptyInputError("max-cut needs at least one edge")
    coeffs: dict[tuple[int, int], float] = {}
    for u, v, w in g.edges:
        coeffs[(u, u)] = coeffs.get((u, u), 0.0) - w
        coeffs[(v, v)] = coeffs.get((v, v), 0.0) - w
        coeffs[(u, v)] = coeffs.get((u, v), 0.0) + 2.0 * w
    q = QuboMatrix(n=g.node_count, coeffs=coeffs, offset=0.0)
    return QuboProblem(qubo=q, kind="maxcut", sense="max", graph=g)


# ---- Minimum vertex cover ----


def mvc_to_qubo(g: WeightedGraph, alpha: float | str = "auto") -> QuboProblem:
    """Cover-size objective plus alpha-weighted uncovered-edge penalties.

    The energy is sum_i x_i + alpha * sum_{(u,v) in E} (1 - x_u)(1 - x_v),
    which expands to linear terms 1 - alpha*deg(i), pair terms +alpha, and
    a constant alpha*|E|.  Soundness requires alpha > 1.
    """
    if g.edge_count == 0:
        raise EmptyInputError("vertex cover needs at least one edge")
    if alpha == "auto":
        alpha = float(g.max_degree())
    alpha = float(alpha)
    if alpha <= 1.0:
        raise ParameterError(f"penalty alpha must exceed 1, got {alpha}")
    deg = g.degrees()
    coeffs: dict[tuple[int, int], float] = {
        (i, i): 1.0 - alpha * float(deg[i]) for i in range(g.node_count)
    }
    for u, v, _ in g.edges:
        coeffs[(u, v)] = coeffs.get((u, v), 0.0) + alpha
    q = QuboMatrix(n=g.node_count, coeffs=coeffs, offset=alpha * g.edge_count)
    return QuboProblem(
        qubo=q,
        kind="mvc",
        sense="min",
        total_constraints=g.edge_count,
        graph=g,
        alpha=alpha,
    )


def mvc_violations(g: WeightedGraph, x: np.ndarray) -> int:
    """Number of edges with both endpoints outside the chosen set."""
    bits = np.asarray(x)
    if bits.shape[0] != g.node_count:
        raise DimensionError(
            f"expected {g.node_count} bits, got {bits.shape[0]}"
        )
    return sum(1 for u, v, _ in g.edges if bits[u] == 0 and bits[v] == 0)


# ---- Assignment (flow x distance) ----


def find_index(i: int, k: int, n: int) -> int:
    """Flattened variable index for facility i at location k (row-major)."""
    if not (0 <= i < n and 0 <= k < n):
        raise DimensionError(f"facility/location pair ({i},{k}) outside 0..{n - 1}")
    return i * n + k


def qap_energy(inst: QapInstance, perm: Sequence[int] | np.ndarray) -> float:
    """Assignment cost sum_{i,j} flow[i,j] * dist[perm[i], perm[j]]."""
    p = np.asarray(perm, dtype=np.int64)
    n = inst.n
    if p.shape != (n,) or sorted(p.tolist()) != list(range(n)):
        raise DomainError(f"not a permutation of 0..{n - 1}: {perm!r}")
    d = inst.dist[np.ix_(p, p)]
    return float(np.einsum("ij,ij->", inst.flow, d))


def qap_objective_qubo(inst: QapInstance) -> QuboMatrix:
    """Quadratic coefficients flow[i,j] * dist[k,l] on variable pairs.

    The flattened coefficient matrix is the Kronecker product of flow and
    distance. Diagonal kron entries (nonzero only when both the flow and
    distance diagonals are) become linear coefficients on x_{ik}.
    """
    n = inst.n
    kron = np.kron(inst.flow, inst.dist)
    coeffs: dict[tuple[int, int], float] = {}
    nz = np.argwhere(kron != 0.0)
    for p, q in nz:
        p, q = int(p), int(q)
        if p < q:
            coeffs[(p, q)] = coeffs.get((p, q), 0.0) + kron[p, q] + kron[q, p]
    for p in range(n * n):
        if kron[p, p] != 0.0:
            coeffs[(p, p)] = kron[p, p]
    return QuboMatrix(n=n * n, coeffs=coeffs, offset=0.0)


def prepare_matrix_a(n: int) -> np.ndarray:
    """0/1 one-hot constraint matrix: n row constraints then n column ones.

    Shape is (max(2n, n*n), n*n); rows beyond the first 2n stay zero.  For
    n=1 the single row constraint and single column constraint coincide,
    giving a duplicated [1] row.
    """
    if n < 1:
        raise DimensionError("need at least one facility")
    rows = max(2 * n, n * n)
    a = np.zeros((rows, n * n), dtype=np.float64)
    for i in range(n):
        for k in range(n):
            a[i, find_index(i, k, n)] = 1.0
    for k in range(n):
        for i in range(n):
            a[n + k if n > 1 else 1, find_index(i, k, n)] = 1.0
    return a


def prepare_vector_b(n: int) -> np.ndarray:
    """Right-hand side: ones for the 2n one-hot constraints, zeros after."""
    if n < 1:
        raise DimensionError("need at least one facility")
    b = np.zeros(max(2 * n, n * n), dtype=np.float64)
    b[: 2 * n] = 1.0
    return b


def a_to_q(a: np.ndarray, b: np.ndarray, penalty: float) -> QuboMatrix:
    """Quadratic penalty matrix for ||A x - b||^2 scaled by the weight.

    Both A and b are scaled by sqrt(penalty); the QUBO is A'^T A' - 2 D
    with D = diag(b'^T A'), plus the recorded constant offset b'^T b'.
    For binary x the energy equals penalty * ||A x - b||^2 exactly.
    """
    system = ConstraintSystem(a=a, b=b, penalty=penalty)
    a_s, b_s = system.scaled()
    ata = a_s.T @ a_s
    bta = b_s @ a_s
    m = ata - 2.0 * np.diag(bta)
    nvars = a_s.shape[1]
    coeffs: dict[tuple[int, int], float] = {}
    for p in range(nvars):
        if m[p, p] != 0.0:
            coeffs[(p, p)] = float(m[p, p])
        for q in range(p + 1, nvars):
            w = m[p, q] + m[q, p]
            if w != 0.0:
                coeffs[(p, q)] = float(w)
    return QuboMatrix(n=nvars, coeffs=coeffs, offset=float(b_s @ b_s))


def _merge(a: QuboMatrix, b: QuboMatrix) -> QuboMatrix:
    if a.n != b.n:
        raise DimensionError("cannot merge QUBOs of different sizes")
    coeffs = dict(a.coeffs)
    for key, v in b.coeffs.items():
        coeffs[key] = coeffs.get(key, 0.0) + v
    return QuboMatrix(n=a.n, coeffs=coeffs, offset=a.offset + b.offset)


def qap_to_qubo(inst: QapInstance, penalty: float | str = "auto") -> QuboProblem:
    """Assignment objective plus one-hot penalties as a single QUBO.

    penalty="auto" uses n times the largest absolute objective coefficient
    max |flow[i,j] * dist[k,l]|.
    """
    n = inst.n
    if penalty == "auto":
        scale = float(np.abs(inst.flow).max() * np.abs(inst.dist).max())
        if scale == 0.0:
            scale = 1.0
        penalty = n * scale
    penalty = float(penalty)
    if penalty <= 0:
        raise ParameterError(f"penalty weight must be positive, got {penalty}")
    objective = qap_objective_qubo(inst)
    pen = a_to_q(prepare_matrix_a(n), prepare_vector_b(n), penalty)
    q = _merge(objective, pen)
    return QuboProblem(
        qubo=q,
        kind="qap",
        sense="min",
        total_constraints=2 * n,
        qap=inst,
        penalty=penalty,
    )


def _bits_matrix(n: int, x: np.ndarray) -> np.ndarray:
    bits = np.asarray(x)
    if bits.shape[0] != n * n:
        raise DimensionError(f"expected {n * n} bits, got {bits.shape[0]}")
    return bits.reshape(n, n)


def _onehot_residual(n: int, x: np.ndarray) -> float:
    m = _bits_matrix(n, x).astype(np.float64)
    rows = m.sum(axis=1) - 1.0
    cols = m.sum(axis=0) - 1.0
    return float((rows**2).sum() + (cols**2).sum())


def qap_violations(n: int, x: np.ndarray) -> int:
    """Count of one-hot constraints (rows then columns) that are not met."""
    m = _bits_matrix(n, x)
    rows = int((m.sum(axis=1) != 1).sum())
    cols = int((m.sum(axis=0) != 1).sum())
    return rows + cols


def decode_permutation(x: np.ndarray, n: int) -> np.ndarray | None:
    """Location of each facility when x is a permutation matrix, else None."""
    m = _bits_matrix(n, x)
    if (m.sum(axis=1) != 1).any() or (m.sum(axis=0) != 1).any():
        return None
    return np.argmax(m, axis=1).astype(np.int64)


def permutation_to_bits(perm: Sequence[int] | np.ndarray) -> np.ndarray:
    """Flattened permutation-matrix bits for a facility-to-location map."""
    p = np.asarray(perm, dtype=np.int64)
    n = p.shape[0]
    if sorted(p.tolist()) != list(range(n)):
        raise DomainError(f"not a permutation of 0..{n - 1}: {perm!r}")
    bits = np.zeros((n, n), dtype=np.uint8)
    bits[np.arange(n), p] = 1
    return bits.reshape(-1)
