"""Seeded dataset generators.

Every generator is a pure function of its arguments: calling it twice with
the same parameters and seed yields an identical artifact.  Randomness comes
from per-purpose child streams derived from the caller's seed, so adding a
new draw to one generator never shifts the output of another.

Families:

* hardware-like graphs: ``gen_chimera`` synthesizes the grid-of-bipartite-
  cells coupler graph; ``subgraph_sample`` induces random node subsets of
  any host graph (used for size ladders over ingested device graphs).
* ``gnm_random_graph`` plus ``gnm_degree_sweep`` for connectivity studies.
* ``gen_tinyqap`` for small random assignment instances.
* ``gen_hamming_graph`` for the distance-threshold hypercube benchmark
  family (deterministic, no seed).
* ``gen_orders`` / ``gen_warehouse_dataset`` for skewed order-picking
  workloads.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, FormatError, ParameterError
from .formulations import QapInstance, WeightedGraph
from .solvers import child_rng, child_seeds
from .warehouse import Layout, OrderSet, WarehouseDataset

__all__ = [
    "GeneratorSpec",
    "gen_chimera",
    "subgraph_sample",
    "gnm_random_graph",
    "gnm_degree_sweep",
    "gen_tinyqap",
    "gen_hamming_graph",
    "gen_orders",
    "gen_warehouse_dataset",
    "generate",
]

WEIGHT_MODES = ("unit", "pm1", "uniform01")


@dataclass(frozen=True)
class GeneratorSpec:
    """Self-contained recipe for one generated artifact.

    ``parameters`` is stored as a sorted tuple of (name, value) pairs so that
    equal specs compare and serialize identically.
    """

    family: str
    parameters: tuple[tuple[str, int | float | str], ...]
    seed: int = 0

    @classmethod
    def make(cls, family: str, seed: int = 0, **parameters) -> "GeneratorSpec":
        return cls(
            family=family,
            parameters=tuple(sorted(parameters.items())),
            seed=int(seed),
        )

    def parameter_dict(self) -> dict:
        return dict(self.parameters)

    def to_json(self) -> str:
        return json.dumps(
            {
                "family": self.family,
                "parameters": self.parameter_dict(),
                "seed": self.seed,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "GeneratorSpec":
        try:
            raw = json.loads(text)
            return cls.make(raw["family"], raw["seed"], **raw["parameters"])
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"invalid generator spec: {exc}") from exc


# ---- Hardware-like graphs ----


def _chimera_node(r: int, c: int, shore: int, k: int, m: int, t: int) -> int:
    return ((r * m + c) * 2 + shore) * t + k


def gen_chimera(m: int, t: int = 4) -> WeightedGraph:
    """Grid of complete-bipartite cells with unit couplers.

    An m-by-m grid of cells, each a K_{t,t} between a left and a right shore.
    Left-shore qubits couple to the same shore position in the cell below;
    right-shore qubits couple to the same position in the cell to the right.
    m=16, t=4 gives the familiar 2048-node, 6016-coupler graph.
    """
    if m < 1 or t < 1:
        raise ParameterError("cell grid needs m >= 1 and t >= 1")
    edges: list[tuple[int, int, float]] = []
    for r in range(m):
        for c in range(m):
            for k in range(t):
                left = _chimera_node(r, c, 0, k, m, t)
                for k2 in range(t):
                    edges.append((left, _chimera_node(r, c, 1, k2, m, t), 1.0))
            if r + 1 < m:
                for k in range(t):
                    edges.append(
                        (
                            _chimera_node(r, c, 0, k, m, t),
                            _chimera_node(r + 1, c, 0, k, m, t),
                            1.0,
                        )
                    )
            if c + 1 < m:
                for k in range(t):
                    edges.append(
                        (
                            _chimera_node(r, c, 1, k, m, t),
                            _chimera_node(r, c + 1, 1, k, m, t),
                            1.0,
                        )
                    )
    return WeightedGraph(node_count=2 * t * m * m, edges=tuple(edges))


def subgraph_sample(
    g: WeightedGraph, n: int, seed: int = 0, weight_mode: str = "unit"
) -> WeightedGraph:
    """Induced subgraph on n uniformly chosen nodes, relabeled to 0..n-1.

    Survivor labels keep their original relative order.  Edge weights are
    reassigned per ``weight_mode``: all 1.0 ("unit"), a fair coin over
    {+1, -1} ("pm1"), or uniform on (0, 1] ("uniform01").
    """
    if weight_mode not in WEIGHT_MODES:
        raise ParameterError(f"unknown weight mode {weight_mode!r}")
    if n < 1:
        raise DimensionError("sample needs at least one node")
    if n > g.node_count:
        raise DimensionError(
            f"cannot sample {n} nodes from a {g.node_count}-node graph"
        )
    rng = child_rng(seed, "subgraph.nodes")
    survivors = np.sort(rng.choice(g.node_count, size=n, replace=False))
    relabel = {int(old): new for new, old in enumerate(survivors)}
    kept = [
        (relabel[u], relabel[v])
        for u, v, _ in g.edges
        if u in relabel and v in relabel
    ]
    wrng = child_rng(seed, "subgraph.weights")
    if weight_mode == "unit":
        weights = np.ones(len(kept))
    elif weight_mode == "pm1":
        weights = np.where(wrng.random(len(kept)) < 0.5, 1.0, -1.0)
    else:
        weights = 1.0 - wrng.random(len(kept))
    edges = tuple((u, v, float(w)) for (u, v), w in zip(kept, weights))
    return WeightedGraph(node_count=n, edges=edges)


# ---- Random graphs ----


def _decode_pair(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Map linear indices over {(u,v): u<v} in lexicographic order to pairs."""
    # offsets[u] = number of pairs whose first endpoint precedes u.
    u_range = np.arange(n, dtype=np.int64)
    offsets = u_range * n - (u_range * (u_range + 1)) // 2
    u = np.searchsorted(offsets, idx, side="right") - 1
    v = idx - offsets[u] + u + 1
    return u, v


def gnm_random_graph(n: int, m: int, seed: int = 0) -> WeightedGraph:
    """Uniform random graph with exactly m distinct unit-weight edges."""
    if n < 1:
        raise DimensionError("graph needs at least one node")
    total = n * (n - 1) // 2
    if m < 0 or m > total:
        raise ParameterError(
            f"edge count {m} outside the feasible range 0..{total} for n={n}"
        )
    rng = child_rng(seed, "gnm.edges")
    idx = np.sort(rng.choice(total, size=m, replace=False))
    u, v = _decode_pair(idx.astype(np.int64), n)
    edges = tuple((int(a), int(b), 1.0) for a, b in zip(u, v))
    return WeightedGraph(node_count=n, edges=edges)


SWEEP_DEGREES = tuple(range(1, 21)) + tuple(range(30, 141, 10))


def gnm_degree_sweep(
    n: int = 145, seed: int = 0
) -> tuple[tuple[int, WeightedGraph], ...]:
    """Connectivity sweep: one G(n, m) per target average degree.

    Degrees run 1..20 then 30..140 in steps of 10 (32 instances), with
    m = floor(n * degree / 2) so the realized average degree 2m/n matches
    the target up to rounding.
    """
    seeds = child_seeds(seed, "gnm.sweep", len(SWEEP_DEGREES))
    out = []
    for deg, s in zip(SWEEP_DEGREES, seeds):
        m = (n * deg) // 2
        out.append((deg, gnm_random_graph(n, m, seed=int(s))))
    return tuple(out)


def gen_hamming_graph(bits: int = 8, min_distance: int = 4) -> WeightedGraph:
    """Graph on all ``bits``-length binary words; edges join words whose
    Hamming distance is at least ``min_distance``.  Deterministic.
    """
    if bits < 1 or not (1 <= min_distance <= bits):
        raise ParameterError("need bits >= 1 and 1 <= min_distance <= bits")
    n = 1 << bits
    edges = [
        (u, v, 1.0)
        for u in range(n)
        for v in range(u + 1, n)
        if (u ^ v).bit_count() >= min_distance
    ]
    return WeightedGraph(node_count=n, edges=tuple(edges))


# ---- Assignment instances ----


def gen_tinyqap(n: int, seed: int = 1234) -> QapInstance:
    """Random assignment instance on n Euclidean points.

    Distances come from n points drawn uniformly in the unit square; flow is
    the symmetrized part (M + M^T)/2 of a uniform random matrix with the
    diagonal forced to zero.  Uses the legacy fixed-state generator so that
    archived instances stay reproducible.
    """
    if n < 3:
        raise ParameterError(f"instance size must be at least 3, got {n}")
    rs = np.random.RandomState(seed)
    points = rs.rand(n, 2)
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    raw = rs.rand(n, n)
    flow = (raw + raw.T) / 2.0
    np.fill_diagonal(flow, 0.0)
    return QapInstance(flow=flow, dist=dist)


# ---- Warehouse workloads ----


def _popularity_weights(n_skus: int, skew: str) -> np.ndarray:
    if skew == "none":
        return np.full(n_skus, 1.0 / n_skus)
    if skew == "pareto8020":
        head = max(1, math.ceil(0.2 * n_skus))
        if head >= n_skus:
            return np.full(n_skus, 1.0 / n_skus)
        w = np.empty(n_skus)
        w[:head] = 0.8 / head
        w[head:] = 0.2 / (n_skus - head)
        return w
    raise ParameterError(f"unknown skew {skew!r}")


def gen_orders(
    n_skus: int,
    n_orders: int,
    lines_per_order: int,
    skew: str = "none",
    seed: int = 0,
) -> OrderSet:
    """Random order set with distinct products per order.

    Each order draws ``lines_per_order`` distinct products, either uniformly
    (skew="none") or with 80% of the draw probability concentrated on the
    first 20% of product ids (skew="pareto8020").  Lower product ids are
    never less popular than higher ones.
    """
    if n_skus < 1:
        raise ParameterError("need at least one product")
    if n_orders < 0:
        raise ParameterError("order count must be nonnegative")
    if not (1 <= lines_per_order <= n_skus):
        raise ParameterError(
            f"lines per order must lie in 1..{n_skus}, got {lines_per_order}"
        )
    base = _popularity_weights(n_skus, skew)
    rng = child_rng(seed, "orders")
    orders = []
    for _ in range(n_orders):
        avail = base.copy()
        lines = []
        for _ in range(lines_per_order):
            cum = np.cumsum(avail)
            r = rng.random() * cum[-1]
            sku = int(np.searchsorted(cum, r, side="right"))
            lines.append(sku)
            avail[sku] = 0.0
        orders.append(tuple(lines))
    return OrderSet(orders=tuple(orders), n_skus=n_skus)


def gen_warehouse_dataset(
    rows: int,
    columns: int,
    n_orders: int,
    lines_per_order: int,
    skew: str = "pareto8020",
    seed: int = 0,
    copies: int = 1,
    row_spacing: float = 1.0,
    column_spacing: float = 3.0,
) -> WarehouseDataset:
    """Complete picking scenario: layout, skewed orders, and an item catalog.

    With ``copies`` = c, every product is stocked on c items and the catalog
    fills all rows*columns storage locations, so the product count is
    rows*columns / c (which must divide evenly).
    """
    if copies < 1:
        raise ParameterError("copies per product must be at least 1")
    layout = Layout(
        rows=rows,
        columns=columns,
        row_spacing=row_spacing,
        column_spacing=column_spacing,
    )
    if layout.n_locations % copies:
        raise ParameterError(
            f"{copies} copies per product cannot fill {layout.n_locations} "
            "locations exactly"
        )
    n_skus = layout.n_locations // copies
    orders = gen_orders(n_skus, n_orders, lines_per_order, skew=skew, seed=seed)
    item_sku = tuple(int(i) for i in np.repeat(np.arange(n_skus), copies))
    return WarehouseDataset(layout=layout, orders=orders, item_sku=item_sku)


# ---- Spec dispatch ----


_FAMILIES = {
    "chimera": gen_chimera,
    "hardware_subgraph": None,  # handled below: compose chimera + sample
    "gnm": gnm_random_graph,
    "hamming": gen_hamming_graph,
    "tinyqap": gen_tinyqap,
    "orders": gen_orders,
    "warehouse": gen_warehouse_dataset,
}


def generate(spec: GeneratorSpec):
    """Build the artifact a GeneratorSpec describes.

    Families: chimera(m, t), hardware_subgraph(m, t, n, weight_mode),
    gnm(n, m), hamming(bits, min_distance), tinyqap(n), orders(n_skus,
    n_orders, lines_per_order, skew), warehouse(rows, columns, n_orders,
    lines_per_order, skew, copies).  Seeded families take their seed from
    the spec.
    """
    params = spec.parameter_dict()
    try:
        if spec.family == "chimera":
            return gen_chimera(**params)
        if spec.family == "hardware_subgraph":
            n = params.pop("n")
            weight_mode = params.pop("weight_mode", "unit")
            host = gen_chimera(**params)
            return subgraph_sample(host, n, seed=spec.seed, weight_mode=weight_mode)
        if spec.family == "gnm":
            return gnm_random_graph(seed=spec.seed, **params)
        if spec.family == "hamming":
            return gen_hamming_graph(**params)
        if spec.family == "tinyqap":
            return gen_tinyqap(seed=spec.seed, **params)
        if spec.family == "orders":
            return gen_orders(seed=spec.seed, **params)
        if spec.family == "warehouse":
            return gen_warehouse_dataset(seed=spec.seed, **params)
    except TypeError as exc:
        raise ParameterError(
            f"bad parameters for family {spec.family!r}: {exc}"
        ) from exc
    raise ParameterError(f"unknown generator family {spec.family!r}")
