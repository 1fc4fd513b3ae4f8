"""Block decomposition of assignment problems.

Splits a large quadratic assignment instance into k sub-instances: items
are grouped to keep heavy interactions together, locations are grouped to
keep cheap travel together, groups are matched pairwise, each sub-instance
is solved on its own, and the pieces recombine into one global assignment.

When the distance matrix is block constant (one off-diagonal value delta
inside location groups, one value big_m across them, delta <= big_m), the
assignment cost depends only on how much interaction lands inside groups,
so an exhaustively optimal partition yields an exactly optimal assignment.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import QuboMatrix, SampleSet
from .errors import CapacityError, DimensionError, ParameterError
from .formulations import (
    QapInstance,
    QuboProblem,
    decode_permutation,
    permutation_to_bits,
    qap_energy,
    qap_to_qubo,
)
from .solvers import (
    PermAnnealConfig,
    PtConfig,
    child_rng,
    child_seeds,
    parallel_tempering,
    permutation_annealer,
)

__all__ = [
    "Partition",
    "SubQap",
    "DecompositionPlan",
    "DecompositionConfig",
    "DecompositionResult",
    "ExteriorPenaltyResult",
    "intra_subset_sum",
    "total_interaction",
    "predicted_block_energy",
    "partition_items",
    "partition_locations",
    "match_subsets",
    "exterior_penalty_solve",
    "build_plan",
    "solve_decomposed",
    "verify_block_structure",
    "plan_to_json",
    "plan_from_json",
]

_EXHAUSTIVE_PARTITION_LIMIT = 200_000
_EXHAUSTIVE_MATCH_LIMIT = 8
_ANNEAL_SIZE_LIMIT = 512


@dataclass(frozen=True)
class Partition:
    """Equal-capacity grouping of n elements into k subsets.

    assignment[i] is the subset index (0..k-1) of element i; every subset
    holds exactly s = n // k elements.
    """

    assignment: tuple[int, ...]
    k: int

    def __post_init__(self) -> None:
        n = len(self.assignment)
        if self.k < 1 or n < 1:
            raise ParameterError("partition needs at least one element and one subset")
        if n % self.k != 0:
            raise ParameterError(f"subset count {self.k} does not divide {n} elements")
        counts = [0] * self.k
        for g in self.assignment:
            if not 0 <= g < self.k:
                raise ParameterError(f"subset index {g} out of range")
            counts[g] += 1
        s = n // self.k
        if any(c != s for c in counts):
            raise ParameterError(f"every subset must hold exactly {s} elements")

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def s(self) -> int:
        return len(self.assignment) // self.k

    def groups(self) -> tuple[tuple[int, ...], ...]:
        """Subset members in index order, one tuple per subset."""
        out: list[list[int]] = [[] for _ in range(self.k)]
        for i, g in enumerate(self.assignment):
            out[g].append(i)
        return tuple(tuple(members) for members in out)


def intra_subset_sum(matrix: np.ndarray, part: Partition) -> float:
    """Sum of matrix[i, j] over ordered pairs i != j in the same subset."""
    m = np.asarray(matrix, dtype=np.float64)
    total = 0.0
    for members in part.groups():
        sub = m[np.ix_(members, members)]
        total += float(sub.sum() - np.trace(sub))
    return total


def total_interaction(matrix: np.ndarray) -> float:
    """Sum of matrix[i, j] over all ordered pairs i != j."""
    m = np.asarray(matrix, dtype=np.float64)
    return float(m.sum() - np.trace(m))


def predicted_block_energy(
    flow: np.ndarray, part: Partition, delta: float, big_m: float
) -> float:
    """Assignment cost implied by a partition under block-constant distances.

    Every intra-subset pair travels delta, every cross-subset pair travels
    big_m, so the cost is big_m * total + (delta - big_m) * intra.
    """
    total = total_interaction(flow)
    intra = intra_subset_sum(flow, part)
    return big_m * total + (delta - big_m) * intra


# ---------------------------------------------------------------------------
# Partitioning


def _score(matrix: np.ndarray, members: Sequence[int]) -> float:
    sub = matrix[np.ix_(members, members)]
    return float(sub.sum() - np.trace(sub))


def _greedy_groups(sym: np.ndarray, k: int, maximize: bool) -> list[list[int]]:
    n = sym.shape[0]
    s = n // k
    if s == 1:
        return [[i] for i in range(n)]
    sign = -1.0 if maximize else 1.0
    pairs = sorted(
        ((i, j) for i in range(n) for j in range(i + 1, n)),
        key=lambda p: (sign * sym[p[0], p[1]], p[0], p[1]),
    )
    groups: list[list[int]] = []
    free = np.ones(n, dtype=bool)
    for i, j in pairs:
        if len(groups) == k:
            break
        if free[i] and free[j]:
            groups.append([i, j])
            free[i] = free[j] = False
    # Marginal cost of adding each element to each group, updated as we go.
    marg = np.zeros((n, k))
    for g, members in enumerate(groups):
        marg[:, g] = sym[:, members].sum(axis=1)
    fill = np.array([len(m) for m in groups])
    order = sorted(np.flatnonzero(free), key=lambda i: (-sym[i].sum(), i))
    for i in order:
        open_groups = np.flatnonzero(fill < s)
        vals = sign * marg[i, open_groups]
        g = int(open_groups[int(np.argmin(vals))])
        groups[g].append(i)
        fill[g] += 1
        marg[:, g] += sym[:, i]
    return groups


def _partition_qubo(
    sym: np.ndarray, k: int, penalty: float, maximize: bool
) -> QuboMatrix:
    n = sym.shape[0]
    s = n // k
    sign = -1.0 if maximize else 1.0
    coeffs: dict[tuple[int, int], float] = {}

    def add(a: int, b: int, v: float) -> None:
        key = (a, b) if a <= b else (b, a)
        coeffs[key] = coeffs.get(key, 0.0) + v

    for g in range(k):
        for i in range(n):
            vi = i * k + g
            add(vi, vi, penalty * (1.0 - 2.0 * s) - penalty)
            for j in range(i + 1, n):
                vj = j * k + g
                w = sym[i, j]
                if w != 0.0:
                    add(vi, vj, sign * w)
                add(vi, vj, 2.0 * penalty)
    for i in range(n):
        base = i * k
        for g in range(k):
            for h in range(g + 1, k):
                add(base + g, base + h, 2.0 * penalty)
    offset = penalty * n + penalty * k * float(s) ** 2
    return QuboMatrix(n=n * k, coeffs=coeffs, offset=offset)


def _encode_groups(groups: Sequence[Sequence[int]], n: int, k: int) -> np.ndarray:
    bits = np.zeros(n * k, dtype=np.uint8)
    for g, members in enumerate(groups):
        for i in members:
            bits[i * k + g] = 1
    return bits


def _decode_groups(
    bits: np.ndarray, sym: np.ndarray, k: int, maximize: bool
) -> list[list[int]]:
    n = sym.shape[0]
    s = n // k
    sign = -1.0 if maximize else 1.0
    rows = bits.reshape(n, k)
    groups: list[list[int]] = [[] for _ in range(k)]
    fill = np.zeros(k, dtype=np.int64)
    leftover = []
    for i in range(n):
        ones = np.flatnonzero(rows[i])
        if len(ones) == 1 and fill[ones[0]] < s:
            g = int(ones[0])
            groups[g].append(i)
            fill[g] += 1
        else:
            leftover.append(i)
    marg = np.zeros((n, k))
    for g, members in enumerate(groups):
        if members:
            marg[:, g] = sym[:, members].sum(axis=1)
    for i in leftover:
        open_groups = np.flatnonzero(fill < s)
        vals = sign * marg[i, open_groups]
        g = int(open_groups[int(np.argmin(vals))])
        groups[g].append(i)
        fill[g] += 1
        marg[:, g] += sym[:, i]
    return groups


def _anneal_groups(
    raw: np.ndarray, sym: np.ndarray, k: int, seed: int, maximize: bool, tag: str
) -> list[list[int]]:
    n = sym.shape[0]
    # Scale the one-hot penalty by the pairwise weights only: the matrix
    # diagonal shifts every balanced partition by the same constant, and
    # letting it into the scale would drown the actual grouping signal.
    penalty = float(n * np.abs(sym).max() / 2.0)
    if penalty <= 0.0:
        penalty = 1.0
    q = _partition_qubo(sym, k, penalty, maximize)
    start = _greedy_groups(sym, k, maximize)
    cfg = PtConfig(
        replicas=16,
        iterations=320_000,
        swap_interval=10,
        seed=int(child_seeds(seed, f"part.{tag}")[0]),
        initial_state=_encode_groups(start, n, k),
    )
    result = parallel_tempering(q, cfg)
    groups = _decode_groups(result.best().bits, sym, k, maximize)
    # The annealed grouping must never lose to its own warm start.
    sign = -1.0 if maximize else 1.0
    if sign * sum(_score(sym, g) for g in groups) > sign * sum(
        _score(sym, g) for g in start
    ):
        return start
    return groups


def _balanced_splits(elems: tuple[int, ...], s: int):
    if not elems:
        yield ()
        return
    head, rest = elems[0], elems[1:]
    for combo in itertools.combinations(rest, s - 1):
        chosen = set(combo)
        remaining = tuple(x for x in rest if x not in chosen)
        group = (head,) + combo
        for tail in _balanced_splits(remaining, s):
            yield (group,) + tail


def _count_balanced(n: int, s: int) -> int:
    k = n // s
    total = math.factorial(n)
    return total // (math.factorial(s) ** k * math.factorial(k))


def _exhaustive_groups(sym: np.ndarray, k: int, maximize: bool) -> list[list[int]]:
    n = sym.shape[0]
    s = n // k
    count = _count_balanced(n, s)
    if count > _EXHAUSTIVE_PARTITION_LIMIT:
        raise CapacityError(
            f"{count} balanced partitions exceed the exhaustive limit "
            f"of {_EXHAUSTIVE_PARTITION_LIMIT}"
        )
    sign = -1.0 if maximize else 1.0
    best = None
    best_val = math.inf
    for groups in _balanced_splits(tuple(range(n)), s):
        val = sign * sum(_score(sym, g) for g in groups)
        if val < best_val - 1e-12:
            best_val = val
            best = groups
    return [list(g) for g in best]


def _build_partition(
    matrix: np.ndarray,
    k: int,
    method: str,
    seed: int,
    maximize: bool,
    order_key: Callable[[list[int]], tuple],
    tag: str,
) -> Partition:
    raw = np.asarray(matrix, dtype=np.float64)
    if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
        raise DimensionError("interaction matrix must be square")
    n = raw.shape[0]
    if k < 1 or n % k != 0:
        raise ParameterError(f"subset count {k} does not divide {n} elements")
    sym = raw + raw.T
    np.fill_diagonal(sym, 0.0)
    if method == "auto":
        method = "anneal" if n <= _ANNEAL_SIZE_LIMIT else "greedy"
    if method == "greedy":
        groups = _greedy_groups(sym, k, maximize)
    elif method == "anneal":
        groups = _anneal_groups(raw, sym, k, seed, maximize, tag)
    elif method == "exhaustive":
        groups = _exhaustive_groups(sym, k, maximize)
    else:
        raise ParameterError(f"unknown partition method {method!r}")
    groups = [sorted(g) for g in groups]
    groups.sort(key=order_key)
    assignment = [0] * n
    for g, members in enumerate(groups):
        for i in members:
            assignment[i] = g
    return Partition(assignment=tuple(assignment), k=k)


def partition_items(
    flow: np.ndarray, k: int, method: str = "auto", seed: int = 0
) -> Partition:
    """Group items to maximize interaction kept inside subsets.

    Methods: "greedy" seeds each subset with a heavy disjoint pair and fills
    by marginal gain; "anneal" encodes the capacitated assignment as a QUBO
    solved by parallel tempering (warm-started from greedy); "exhaustive"
    scans every balanced partition; "auto" picks anneal up to 512 elements
    and greedy beyond. Subsets are numbered by descending internal
    interaction, heaviest first.
    """
    raw = np.asarray(flow, dtype=np.float64)
    sym = raw + raw.T
    np.fill_diagonal(sym, 0.0)

    def key(members: list[int]) -> tuple:
        return (-_score(sym, members), members[0])

    return _build_partition(raw, k, method, seed, True, key, "items")


def partition_locations(
    dist: np.ndarray, k: int, method: str = "auto", seed: int = 0
) -> Partition:
    """Group locations to minimize travel kept inside subsets.

    Mirror image of partition_items with the objective minimized. Subsets
    are numbered by ascending mean depot distance (the matrix diagonal),
    so subset 0 sits closest to the depot when that information exists.
    """
    raw = np.asarray(dist, dtype=np.float64)
    diag = np.diag(raw)

    def key(members: list[int]) -> tuple:
        return (float(diag[members].mean()), members[0])

    return _build_partition(raw, k, method, seed, False, key, "locations")


# ---------------------------------------------------------------------------
# Matching and sub-instance extraction


def match_subsets(
    flow: np.ndarray,
    dist: np.ndarray,
    items: Partition,
    locations: Partition,
    mode: str = "random",
    seed: int = 0,
) -> tuple[int, ...]:
    """Pair each item subset with a location subset.

    Returns m where item subset g is assigned location subset m[g].
    "random" draws a seeded uniform bijection. "exhaustive" (k <= 8) scores
    every bijection by placing each item subset into the candidate location
    subset under one fixed seeded arrangement and summing flow * distance,
    keeping the first minimizer in lexicographic order.
    """
    if items.k != locations.k or items.s != locations.s:
        raise DimensionError("item and location partitions must have equal shape")
    k = items.k
    if mode == "random":
        rng = child_rng(seed, "match.random")
        return tuple(int(v) for v in rng.permutation(k))
    if mode != "exhaustive":
        raise ParameterError(f"unknown matching mode {mode!r}")
    if k > _EXHAUSTIVE_MATCH_LIMIT:
        raise CapacityError(
            f"exhaustive matching supports at most {_EXHAUSTIVE_MATCH_LIMIT} subsets"
        )
    f = np.asarray(flow, dtype=np.float64)
    d = np.asarray(dist, dtype=np.float64)
    item_groups = items.groups()
    loc_groups = locations.groups()
    rng = child_rng(seed, "match.proxy")
    sigmas = [rng.permutation(items.s) for _ in range(k)]
    cost = np.zeros((k, k))
    for g in range(k):
        fg = f[np.ix_(item_groups[g], item_groups[g])]
        sg = sigmas[g]
        for h in range(k):
            dh = d[np.ix_(loc_groups[h], loc_groups[h])]
            cost[g, h] = float((fg * dh[np.ix_(sg, sg)]).sum())
    best = None
    best_val = math.inf
    for m in itertools.permutations(range(k)):
        val = sum(cost[g, m[g]] for g in range(k))
        if val < best_val - 1e-12:
            best_val = val
            best = m
    return tuple(best)


@dataclass(frozen=True)
class SubQap:
    """One sub-instance: rows of flow and dist restricted to matched subsets."""

    inst: QapInstance
    item_ids: tuple[int, ...]
    location_ids: tuple[int, ...]

    @property
    def item_localindex(self) -> dict[int, int]:
        return {orig: p for p, orig in enumerate(self.item_ids)}

    @property
    def location_localindex(self) -> dict[int, int]:
        return {orig: p for p, orig in enumerate(self.location_ids)}


@dataclass(frozen=True)
class DecompositionPlan:
    """Everything needed to reproduce one decomposed solve."""

    item_partition: Partition
    location_partition: Partition
    matching: tuple[int, ...]
    sub_qaps: tuple[SubQap, ...]
    sub_seeds: tuple[int, ...]

    def __post_init__(self) -> None:
        k = self.item_partition.k
        if sorted(self.matching) != list(range(k)):
            raise ParameterError("matching must be a bijection on subsets")


def _extract_subs(
    inst: QapInstance,
    items: Partition,
    locations: Partition,
    matching: tuple[int, ...],
) -> tuple[SubQap, ...]:
    item_groups = items.groups()
    loc_groups = locations.groups()
    subs = []
    for g in range(items.k):
        ids = item_groups[g]
        locs = loc_groups[matching[g]]
        sub_inst = QapInstance(
            flow=inst.flow[np.ix_(ids, ids)],
            dist=inst.dist[np.ix_(locs, locs)],
        )
        subs.append(SubQap(inst=sub_inst, item_ids=ids, location_ids=locs))
    return tuple(subs)


# ---------------------------------------------------------------------------
# Exterior penalty loop


@dataclass(frozen=True)
class ExteriorPenaltyResult:
    permutation: np.ndarray
    energy: float
    feasible: bool
    repaired: bool
    rounds: int
    alpha: float


def _repair_to_permutation(bits: np.ndarray, n: int) -> np.ndarray:
    """Row-wise sweep keeping set bits where possible, first free column otherwise."""
    mat = np.asarray(bits, dtype=np.uint8).reshape(n, n)
    taken = np.zeros(n, dtype=bool)
    perm = np.empty(n, dtype=np.int64)
    for i in range(n):
        ones = np.flatnonzero((mat[i] == 1) & ~taken)
        col = int(ones[0]) if ones.size else int(np.flatnonzero(~taken)[0])
        perm[i] = col
        taken[col] = True
    return perm


def _default_sub_solver(seed: int) -> Callable[[QuboProblem, object], SampleSet]:
    def run(problem: QuboProblem, initial_state) -> SampleSet:
        cfg = PtConfig(
            replicas=16,
            iterations=max(320_000, 6_400 * problem.qubo.n),
            swap_interval=10,
            seed=seed,
            initial_state=initial_state,
        )
        return parallel_tempering(problem, cfg)

    return run


def exterior_penalty_solve(
    inst: QapInstance,
    alpha0: float = 10_000.0,
    beta: float = 1.5,
    solver: Callable[[QuboProblem, object], SampleSet] | None = None,
    max_rounds: int = 12,
    seed: int = 0,
    initial_state=None,
) -> ExteriorPenaltyResult:
    """Escalating-penalty loop for constrained binary assignment.

    Each round converts the instance to a QUBO at the current penalty
    weight, samples it, and accepts the best sample if it decodes to a
    permutation; otherwise the weight grows by beta and the next round is
    warm-started from that sample. If no round produces a feasible sample,
    the least-violating one is repaired row by row into a permutation and
    flagged.
    """
    if alpha0 <= 0 or beta <= 1.0:
        raise ParameterError("penalty weight must be positive and growth above 1")
    if max_rounds < 1:
        raise ParameterError("need at least one round")
    if solver is None:
        solver = _default_sub_solver(int(child_seeds(seed, "exterior")[0]))
    n = inst.n
    alpha = float(alpha0)
    state = initial_state
    fallback_bits = None
    fallback_rank = (math.inf, math.inf)
    rounds = 0
    for _ in range(max_rounds):
        problem = qap_to_qubo(inst, penalty=alpha)
        result = solver(problem, state)
        rounds += 1
        best = result.best()
        perm = decode_permutation(best.bits, n)
        if perm is not None:
            return ExteriorPenaltyResult(
                permutation=perm,
                energy=qap_energy(inst, perm),
                feasible=True,
                repaired=False,
                rounds=rounds,
                alpha=alpha,
            )
        rank = (best.violations, problem.objective(best.bits))
        if rank < fallback_rank:
            fallback_rank = rank
            fallback_bits = best.bits
        state = best.bits
        alpha *= beta
    perm = _repair_to_permutation(fallback_bits, n)
    return ExteriorPenaltyResult(
        permutation=perm,
        energy=qap_energy(inst, perm),
        feasible=False,
        repaired=True,
        rounds=rounds,
        alpha=alpha / beta,
    )


# ---------------------------------------------------------------------------
# Full pipeline


@dataclass(frozen=True)
class DecompositionConfig:
    partition_method: str = "auto"
    match_mode: str = "auto"
    seed: int = 0
    alpha0: float = 10_000.0
    beta: float = 1.5
    max_rounds: int = 12
    sub_qubo_limit: int = 16
    sub_iterations: int | None = None

    def resolved_match_mode(self, k: int) -> str:
        if self.match_mode == "auto":
            return "exhaustive" if k <= _EXHAUSTIVE_MATCH_LIMIT else "random"
        return self.match_mode


@dataclass(frozen=True)
class DecompositionResult:
    permutation: np.ndarray
    energy: float
    plan: DecompositionPlan
    sub_energies: tuple[float, ...]
    sub_feasible: tuple[bool, ...]


def build_plan(
    inst: QapInstance, k: int, config: DecompositionConfig | None = None
) -> DecompositionPlan:
    """Partition, match, and extract sub-instances without solving them."""
    cfg = config or DecompositionConfig()
    items = partition_items(inst.flow, k, method=cfg.partition_method, seed=cfg.seed)
    locations = partition_locations(
        inst.dist, k, method=cfg.partition_method, seed=cfg.seed
    )
    matching = match_subsets(
        inst.flow,
        inst.dist,
        items,
        locations,
        mode=cfg.resolved_match_mode(k),
        seed=cfg.seed,
    )
    subs = _extract_subs(inst, items, locations, matching)
    seeds = tuple(int(v) for v in child_seeds(cfg.seed, "decomp.sub", k))
    return DecompositionPlan(
        item_partition=items,
        location_partition=locations,
        matching=matching,
        sub_qaps=subs,
        sub_seeds=seeds,
    )


def _solve_sub(
    sub: SubQap, seed: int, cfg: DecompositionConfig
) -> tuple[np.ndarray, float, bool]:
    s = sub.inst.n
    if s == 1:
        return np.zeros(1, dtype=np.int64), qap_energy(sub.inst, [0]), True
    if s <= cfg.sub_qubo_limit:
        rng = child_rng(seed, "sub.start")
        start = permutation_to_bits(rng.permutation(s))
        res = exterior_penalty_solve(
            sub.inst,
            alpha0=cfg.alpha0,
            beta=cfg.beta,
            max_rounds=cfg.max_rounds,
            seed=seed,
            initial_state=start,
        )
        return res.permutation, res.energy, res.feasible
    iterations = cfg.sub_iterations or max(100_000, 500 * s * s)
    perm, energy = permutation_annealer(
        sub.inst, PermAnnealConfig(iterations=iterations, seed=seed)
    )
    return perm, energy, True


def solve_decomposed(
    inst: QapInstance,
    k: int,
    config: DecompositionConfig | None = None,
    plan: DecompositionPlan | None = None,
) -> DecompositionResult:
    """Solve an assignment instance by k-way decomposition.

    Builds (or reuses) a plan, solves every sub-instance independently,
    and splices the local assignments back together. Sub-instances up to
    sub_qubo_limit go through the exterior penalty QUBO loop; larger ones
    use direct swap annealing over permutations. The reported energy is
    always evaluated on the full instance.
    """
    cfg = config or DecompositionConfig()
    if plan is None:
        plan = build_plan(inst, k, cfg)
    perm = np.full(inst.n, -1, dtype=np.int64)
    sub_energies = []
    sub_feasible = []
    for sub, seed in zip(plan.sub_qaps, plan.sub_seeds):
        local, e, ok = _solve_sub(sub, seed, cfg)
        sub_energies.append(e)
        sub_feasible.append(ok)
        for p, item in enumerate(sub.item_ids):
            perm[item] = sub.location_ids[local[p]]
    return DecompositionResult(
        permutation=perm,
        energy=qap_energy(inst, perm),
        plan=plan,
        sub_energies=tuple(sub_energies),
        sub_feasible=tuple(sub_feasible),
    )


def verify_block_structure(
    dist: np.ndarray, columns: Sequence[int]
) -> tuple[bool, float | None, float | None]:
    """Check whether off-diagonal distances are block constant.

    columns[i] labels the block of location i. Returns (True, delta, big_m)
    when all intra-block entries share one value and all cross-block entries
    share another; (False, None, None) otherwise. With no cross pairs big_m
    falls back to delta, and the other way around.
    """
    d = np.asarray(dist, dtype=np.float64)
    c = np.asarray(columns)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or c.shape[0] != d.shape[0]:
        raise DimensionError("distance matrix and column labels must agree")
    n = d.shape[0]
    off = ~np.eye(n, dtype=bool)
    same = (c[:, None] == c[None, :]) & off
    cross = (c[:, None] != c[None, :]) & off
    intra_vals = d[same]
    cross_vals = d[cross]

    def constant(vals: np.ndarray) -> float | None:
        if vals.size == 0:
            return None
        lo, hi = float(vals.min()), float(vals.max())
        if hi - lo <= 1e-9 * max(1.0, abs(hi)):
            return lo
        return None

    delta = constant(intra_vals)
    big_m = constant(cross_vals)
    if intra_vals.size and delta is None:
        return False, None, None
    if cross_vals.size and big_m is None:
        return False, None, None
    if delta is None and big_m is None:
        return True, 0.0, 0.0
    if delta is None:
        delta = big_m
    if big_m is None:
        big_m = delta
    return True, delta, big_m


# ---------------------------------------------------------------------------
# Plan serialization


def plan_to_json(plan: DecompositionPlan) -> str:
    """Render a plan as a replayable JSON manifest."""
    doc = {
        "item_assignment": list(plan.item_partition.assignment),
        "location_assignment": list(plan.location_partition.assignment),
        "k": plan.item_partition.k,
        "matching": list(plan.matching),
        "sub_seeds": list(plan.sub_seeds),
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def plan_from_json(inst: QapInstance, text: str) -> DecompositionPlan:
    """Rebuild a plan against the instance it was made for."""
    doc = json.loads(text)
    items = Partition(assignment=tuple(doc["item_assignment"]), k=int(doc["k"]))
    locations = Partition(
        assignment=tuple(doc["location_assignment"]), k=int(doc["k"])
    )
    matching = tuple(int(v) for v in doc["matching"])
    subs = _extract_subs(inst, items, locations, matching)
    return DecompositionPlan(
        item_partition=items,
        location_partition=locations,
        matching=matching,
        sub_qaps=subs,
        sub_seeds=tuple(int(v) for v in doc["sub_seeds"]),
    )
