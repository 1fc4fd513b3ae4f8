"""Annealing-style samplers and exact oracles for QUBO and assignment problems.

All solvers are deterministic functions of (problem, config): seeds fan out
into per-read or per-replica streams derived from the config seed, so the
returned samples never depend on scheduling or thread counts.  Per-sample
energies are re-evaluated exactly after the compiled kernels return.
"""
from __future__ import annotations

import time
import zlib
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .core import BinarySample, QuboMatrix, SampleSet, energies
from .errors import (
    CapacityError,
    DimensionError,
    DomainError,
    EmptyInputError,
    ParameterError,
)
from .formulations import QapInstance, QuboProblem, qap_energy

__all__ = [
    "SaConfig",
    "PtConfig",
    "TabuConfig",
    "RandomConfig",
    "PermAnnealConfig",
    "TraceRecorder",
    "child_seeds",
    "auto_beta_range",
    "simulated_annealing",
    "parallel_tempering",
    "tabu_search",
    "random_sampler",
    "brute_force_qubo",
    "brute_force_qap",
    "permutation_annealer",
    "anneal_permutation",
]

_TRACE_CAP = 65536


# ---- Seed streams ----


def child_seeds(seed: int, tag: str, count: int = 1) -> np.ndarray:
    """Derive `count` independent 32-bit seeds from (seed, purpose tag)."""
    if count < 1:
        raise ParameterError("seed count must be positive")
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(tag.encode("utf-8"))]
    return np.random.SeedSequence(entropy).generate_state(count, dtype=np.uint32)


def child_rng(seed: int, tag: str) -> np.random.Generator:
    """A PCG64 stream keyed by (seed, purpose tag)."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(tag.encode("utf-8"))]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


# ---- Shared plumbing ----


@dataclass
class TraceRecorder:
    """Best-so-far improvements captured during one solver invocation."""

    iterations: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    energies: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.float64))

    def set(self, its: np.ndarray, es: np.ndarray) -> None:
        self.iterations = its
        self.energies = es


def _as_problem(problem: QuboProblem | QuboMatrix) -> QuboProblem:
    if isinstance(problem, QuboMatrix):
        return QuboProblem.from_matrix(problem)
    if isinstance(problem, QuboProblem):
        return problem
    raise ParameterError(f"expected a QUBO problem or matrix, got {type(problem)!r}")


def auto_beta_range(q: QuboMatrix) -> tuple[float, float]:
    """Inverse-temperature endpoints from coefficient magnitudes.

    The hot end accepts the largest possible uphill move with probability
    one half; the cold end accepts the smallest nonzero move with
    probability one percent.
    """
    lin, indptr, _, data = q.kernel_arrays()
    fields = np.abs(lin).astype(np.float64)
    for i in range(q.n):
        fields[i] += np.abs(data[indptr[i]:indptr[i + 1]]).sum()
    de_max = float(fields.max())
    if de_max <= 0.0:
        raise EmptyInputError("QUBO has no nonzero coefficients")
    de_min = q.min_abs_nonzero_coefficient()
    return float(np.log(2.0) / de_max), float(np.log(100.0) / de_min)


def _initial_state(q: QuboMatrix, state) -> tuple[np.ndarray, bool]:
    if state is None:
        return np.zeros(q.n, dtype=np.uint8), False
    arr = np.asarray(state, dtype=np.uint8)
    if arr.shape != (q.n,):
        raise DimensionError(f"initial state must have shape ({q.n},)")
    if ((arr != 0) & (arr != 1)).any():
        raise DomainError("initial state entries must be 0 or 1")
    return arr, True


def _build_sample_set(
    prob: QuboProblem,
    bits: np.ndarray,
    solver: str,
    seconds: float,
) -> SampleSet:
    exact = energies(prob.qubo, bits)
    samples = []
    for row, e in zip(bits, exact):
        v = prob.violations(row)
        samples.append(
            BinarySample(
                bits=row.astype(np.uint8),
                energy=float(e),
                feasible=(v == 0),
                violations=v,
            )
        )
    return SampleSet(
        samples=tuple(samples),
        solver=solver,
        solve_seconds=seconds,
        total_constraints=prob.total_constraints,
    )


def _trace_buffers() -> tuple[np.ndarray, np.ndarray]:
    return np.zeros(_TRACE_CAP, dtype=np.int64), np.zeros(_TRACE_CAP, dtype=np.float64)


# ---- Simulated annealing ----


@dataclass(frozen=True)
class SaConfig:
    """Sweep-based annealing settings with a geometric beta ladder."""

    num_reads: int = 100
    sweeps: int = 1000
    beta_range: tuple[float, float] | str = "auto"
    betas: tuple[float, ...] | None = None
    seed: int = 0
    initial_state: Sequence[int] | None = None

    def __post_init__(self) -> None:
        if self.num_reads < 1:
            raise ParameterError("num_reads must be positive")
        if self.sweeps < 1:
            raise ParameterError("sweeps must be positive")


def _sa_betas(q: QuboMatrix, cfg: SaConfig) -> np.ndarray:
    if cfg.betas is not None:
        betas = np.asarray(cfg.betas, dtype=np.float64)
        if betas.ndim != 1 or betas.size < 1 or (betas <= 0).any():
            raise ParameterError("explicit betas must be a positive sequence")
        return betas
    if cfg.beta_range == "auto":
        hot, cold = auto_beta_range(q)
    else:
        hot, cold = cfg.beta_range
        if hot <= 0 or cold <= 0:
            raise ParameterError("beta endpoints must be positive")
    if cfg.sweeps == 1:
        return np.array([cold], dtype=np.float64)
    return np.geomspace(hot, cold, cfg.sweeps)


def simulated_annealing(
    problem: QuboProblem | QuboMatrix,
    cfg: SaConfig = SaConfig(),
    trace: TraceRecorder | None = None,
) -> SampleSet:
    """Metropolis single-flip annealing; records one sample per read."""
    prob = _as_problem(problem)
    q = prob.qubo
    betas = _sa_betas(q, cfg)
    lin, indptr, indices, data = q.kernel_arrays()
    seeds = child_seeds(cfg.seed, "sa.read", cfg.num_reads).astype(np.int64)
    x0, use_x0 = _initial_state(q, cfg.initial_state)
    t_it, t_e = _trace_buffers()
    start = time.perf_counter()
    bits, ntrace = _kernels.sa_kernel(
        lin, indptr, indices, data, betas, seeds, x0, use_x0, t_it, t_e
    )
    seconds = time.perf_counter() - start
    if trace is not None:
        trace.set(t_it[:ntrace].copy(), t_e[:ntrace] + q.offset)
    return _build_sample_set(prob, bits, "sa", seconds)


# ---- Parallel tempering ----


@dataclass(frozen=True)
class PtConfig:
    """Replica-exchange settings for the parallel-trial sampler.

    ``iterations`` is the total step budget summed over replicas: the
    sampler runs ceil(iterations / replicas) rounds, each advancing every
    replica by one parallel-trial step.  Budgets therefore compare directly
    across replica counts.
    """

    replicas: int = 128
    iterations: int = 100000
    beta_ladder: Sequence[float] | str = "auto"
    swap_interval: int = 10
    offset_increase_rate: float = 0.0
    seed: int = 0
    initial_state: Sequence[int] | None = None

    def __post_init__(self) -> None:
        if self.replicas < 1:
            raise ParameterError("replicas must be positive")
        if self.iterations < 1:
            raise ParameterError("iterations must be positive")
        if self.swap_interval < 0:
            raise ParameterError("swap_interval cannot be negative")
        if self.offset_increase_rate < 0:
            raise ParameterError("offset_increase_rate cannot be negative")


def _pt_betas(q: QuboMatrix, cfg: PtConfig) -> np.ndarray:
    if isinstance(cfg.beta_ladder, str):
        if cfg.beta_ladder != "auto":
            raise ParameterError(f"unknown beta ladder {cfg.beta_ladder!r}")
        hot, cold = auto_beta_range(q)
        if cfg.replicas == 1:
            return np.array([cold], dtype=np.float64)
        return np.geomspace(hot, cold, cfg.replicas)
    betas = np.asarray(cfg.beta_ladder, dtype=np.float64)
    if betas.shape != (cfg.replicas,) or (betas <= 0).any():
        raise ParameterError("beta ladder must hold one positive beta per replica")
    return betas


def parallel_tempering(
    problem: QuboProblem | QuboMatrix,
    cfg: PtConfig = PtConfig(),
    trace: TraceRecorder | None = None,
) -> SampleSet:
    """Parallel-trial replica exchange; one best-seen sample per replica.

    Each MC step evaluates all single-flip moves of a replica, runs the
    Metropolis test on delta minus the replica's dynamic offset, and flips
    one uniformly-chosen accepted candidate.  When nothing is accepted the
    offset grows by offset_increase_rate times the mean absolute
    coefficient; any acceptance resets it.  The iteration budget is spread
    over the replicas (see PtConfig); adjacent replicas attempt
    configuration swaps every swap_interval rounds.
    """
    prob = _as_problem(problem)
    q = prob.qubo
    betas = _pt_betas(q, cfg)
    lin, indptr, indices, data = q.kernel_arrays()
    mean_abs = float(np.mean([abs(v) for v in q.coeffs.values()])) if q.coeffs else 0.0
    offset_step = cfg.offset_increase_rate * mean_abs
    seed = int(child_seeds(cfg.seed, "pt")[0])
    x0, use_x0 = _initial_state(q, cfg.initial_state)
    t_it, t_e = _trace_buffers()
    rounds = -(-cfg.iterations // cfg.replicas)
    start = time.perf_counter()
    bits, ntrace = _kernels.pt_kernel(
        lin,
        indptr,
        indices,
        data,
        betas,
        rounds,
        cfg.swap_interval,
        offset_step,
        seed,
        x0,
        use_x0,
        t_it,
        t_e,
    )
    seconds = time.perf_counter() - start
    if trace is not None:
        trace.set(t_it[:ntrace].copy(), t_e[:ntrace] + q.offset)
    return _build_sample_set(prob, bits, "pt", seconds)


# ---- Tabu search ----


@dataclass(frozen=True)
class TabuConfig:
    """Recency-tabu search settings; one sample per seeded restart."""

    restarts: int = 10
    iterations: int = 10000
    tenure: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.restarts < 1 or self.iterations < 1:
            raise ParameterError("restarts and iterations must be positive")
        if self.tenure < 1:
            raise ParameterError("tenure must be positive")


def tabu_search(
    problem: QuboProblem | QuboMatrix,
    cfg: TabuConfig = TabuConfig(),
) -> SampleSet:
    """Best-admissible flip search with aspiration; best-seen per restart."""
    prob = _as_problem(problem)
    q = prob.qubo
    lin, indptr, indices, data = q.kernel_arrays()
    seeds = child_seeds(cfg.seed, "tabu.restart", cfg.restarts).astype(np.int64)
    start = time.perf_counter()
    bits = _kernels.tabu_kernel(
        lin, indptr, indices, data, cfg.iterations, cfg.tenure, seeds
    )
    seconds = time.perf_counter() - start
    return _build_sample_set(prob, bits, "tabu", seconds)


# ---- Random baseline ----


@dataclass(frozen=True)
class RandomConfig:
    reads: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.reads < 1:
            raise ParameterError("reads must be positive")


def random_sampler(
    problem: QuboProblem | QuboMatrix,
    cfg: RandomConfig = RandomConfig(),
) -> SampleSet:
    """Uniform bits, or uniform permutation matrices for assignment QUBOs."""
    prob = _as_problem(problem)
    rng = child_rng(cfg.seed, "random.sampler")
    start = time.perf_counter()
    if prob.kind == "qap":
        n = prob.qap.n
        rows = np.zeros((cfg.reads, n * n), dtype=np.uint8)
        for r in range(cfg.reads):
            perm = rng.permutation(n)
            rows[r].reshape(n, n)[np.arange(n), perm] = 1
    else:
        rows = rng.integers(0, 2, size=(cfg.reads, prob.qubo.n)).astype(np.uint8)
    seconds = time.perf_counter() - start
    return _build_sample_set(prob, rows, "random", seconds)


# ---- Exact oracles ----


def brute_force_qubo(
    problem: QuboProblem | QuboMatrix,
    max_n: int = 24,
) -> tuple[np.ndarray, float]:
    """Exact QUBO optimum for n <= max_n; lexicographic tie-breaking."""
    prob = _as_problem(problem)
    q = prob.qubo
    if q.n > max_n:
        raise CapacityError(f"exhaustive search capped at {max_n} variables, n={q.n}")
    lin, indptr, indices, data = q.kernel_arrays()
    bits, best = _kernels.brute_gray_kernel(lin, indptr, indices, data, q.offset, q.n)
    return bits, float(best)


def brute_force_qap(inst: QapInstance, max_n: int = 10) -> tuple[np.ndarray, float]:
    """Exact assignment optimum for n <= max_n; lexicographic tie-breaking."""
    if inst.n > max_n:
        raise CapacityError(f"exhaustive search capped at {max_n} facilities, n={inst.n}")
    perm, best = _kernels.qap_brute_kernel(inst.flow, inst.dist)
    return perm, float(best)


# ---- Permutation annealing ----


@dataclass(frozen=True)
class PermAnnealConfig:
    """Pairwise-swap annealing settings over permutations."""

    iterations: int = 100000
    t0: float | str = "auto"
    t1: float | str = "auto"
    seed: int = 0
    initial_perm: Sequence[int] | None = None

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ParameterError("iterations must be positive")


def _temperature_range(cfg: PermAnnealConfig, scale: float) -> tuple[float, float]:
    t0 = scale if cfg.t0 == "auto" else float(cfg.t0)
    if t0 <= 0:
        t0 = 1.0
    t1 = t0 * 1e-3 if cfg.t1 == "auto" else float(cfg.t1)
    if t1 <= 0 or t1 > t0:
        raise ParameterError("need 0 < t1 <= t0")
    return t0, t1


def _start_perm(n: int, cfg: PermAnnealConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.initial_perm is None:
        return rng.permutation(n).astype(np.int64)
    p = np.asarray(cfg.initial_perm, dtype=np.int64)
    if sorted(p.tolist()) != list(range(n)):
        raise DomainError("initial_perm is not a permutation")
    return p


def permutation_annealer(
    inst: QapInstance,
    cfg: PermAnnealConfig = PermAnnealConfig(),
) -> tuple[np.ndarray, float]:
    """Swap-move annealing over assignments; returns (permutation, cost)."""
    rng = child_rng(cfg.seed, "perm.init")
    p0 = _start_perm(inst.n, cfg, rng)
    if inst.n == 1:
        return p0, qap_energy(inst, p0)
    scale = float(np.abs(inst.flow).max() * np.abs(inst.dist).max()) * inst.n
    t0, t1 = _temperature_range(cfg, scale if scale > 0 else 1.0)
    seed = int(child_seeds(cfg.seed, "perm.anneal")[0])
    perm, _ = _kernels.perm_anneal_kernel(
        inst.flow, inst.dist, cfg.iterations, t0, t1, seed, p0
    )
    return perm, qap_energy(inst, perm)


def anneal_permutation(
    n: int,
    objective: Callable[[np.ndarray], float],
    cfg: PermAnnealConfig = PermAnnealConfig(),
    delta: Callable[[np.ndarray, int, int], float] | None = None,
) -> tuple[np.ndarray, float]:
    """Swap annealing against an arbitrary permutation functional.

    ``delta(perm, i, j)`` may supply the objective change of swapping
    positions i and j cheaply; without it the objective is re-evaluated.
    The returned value is an exact re-evaluation of the best permutation.
    """
    if n < 1:
        raise DimensionError("need at least one element")
    rng = child_rng(cfg.seed, "perm.generic")
    perm = _start_perm(n, cfg, rng)
    current = float(objective(perm))
    best = perm.copy()
    best_val = current
    if n == 1:
        return best, best_val
    scale = max(abs(current), 1.0)
    t0, t1 = _temperature_range(cfg, scale)
    ratio = (t1 / t0) ** (1.0 / (cfg.iterations - 1)) if cfg.iterations > 1 else 1.0
    t = t0
    for _ in range(cfg.iterations):
        a = int(rng.integers(0, n))
        b = int(rng.integers(0, n - 1))
        if b >= a:
            b += 1
        if delta is not None:
            d = float(delta(perm, a, b))
        else:
            perm[a], perm[b] = perm[b], perm[a]
            d = float(objective(perm)) - current
            perm[a], perm[b] = perm[b], perm[a]
        accept = d <= 0.0 or (d / t < 50.0 and rng.random() < np.exp(-d / t))
        if accept:
            perm[a], perm[b] = perm[b], perm[a]
            current += d
            if current < best_val:
                best_val = current
                best = perm.copy()
        t *= ratio
    return best, float(objective(best))
