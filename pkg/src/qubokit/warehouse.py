"""Warehouse model: layout, orders, routing simulation, slotting policies.

Locations are numbered column-major: location = column * rows + row. The
depot sits at the bottom of the leftmost column; every pair of adjacent
columns shares one picking aisle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .decomposition import (
    DecompositionConfig,
    DecompositionPlan,
    Partition,
    _extract_subs,
    match_subsets,
    partition_items,
    solve_decomposed,
)
from .errors import (
    DimensionError,
    DomainError,
    InventoryError,
    ParameterError,
)
from .formulations import QapInstance
from .solvers import child_rng, child_seeds

__all__ = [
    "Layout",
    "OrderSet",
    "WarehouseDataset",
    "Assignment",
    "OosConfig",
    "build_frequency_matrix",
    "build_distance_matrix",
    "sshape_route_length",
    "route_lengths",
    "total_pick_distance",
    "sku_popularity",
    "policy_random",
    "policy_coi",
    "policy_abc",
    "policy_oos",
    "policy_qap_decomp",
]


@dataclass(frozen=True)
class Layout:
    """Shelving grid served by aisles between column pairs.

    rows is the shelf count per column; columns must be even so each aisle
    serves the pair on its two sides. The depot is at row 0 of column 0.
    """

    rows: int
    columns: int
    row_spacing: float = 1.0
    column_spacing: float = 3.0

    def __post_init__(self) -> None:
        if self.rows < 1 or self.columns < 1:
            raise ParameterError("layout needs at least one row and one column")
        if self.columns % 2 != 0:
            raise ParameterError("column count must be even, one aisle per pair")
        if self.row_spacing <= 0 or self.column_spacing <= 0:
            raise ParameterError("spacings must be positive")

    @property
    def n_locations(self) -> int:
        return self.rows * self.columns

    @property
    def n_aisles(self) -> int:
        return self.columns // 2

    @property
    def crossover_cost(self) -> float:
        """Walk between consecutive aisles: two column widths."""
        return 2.0 * self.column_spacing

    def location_column(self, loc: int) -> int:
        return loc // self.rows

    def location_row(self, loc: int) -> int:
        return loc % self.rows

    def location_aisle(self, loc: int) -> int:
        """1-based aisle index serving the location's column."""
        return self.location_column(loc) // 2 + 1

    def io_distance(self, loc: int) -> float:
        c, r = self.location_column(loc), self.location_row(loc)
        return c * self.column_spacing + r * self.row_spacing

    def io_distances(self) -> np.ndarray:
        locs = np.arange(self.n_locations)
        return (
            (locs // self.rows) * self.column_spacing
            + (locs % self.rows) * self.row_spacing
        )


@dataclass(frozen=True)
class OrderSet:
    """Pick lists over a fixed product universe; lines are distinct per order."""

    orders: tuple[tuple[int, ...], ...]
    n_skus: int

    def __post_init__(self) -> None:
        if self.n_skus < 1:
            raise ParameterError("need at least one product")
        orders = tuple(tuple(int(s) for s in order) for order in self.orders)
        object.__setattr__(self, "orders", orders)
        for order in orders:
            if len(set(order)) != len(order):
                raise DomainError("an order lists each product at most once")
            for s in order:
                if not 0 <= s < self.n_skus:
                    raise DomainError(f"product id {s} outside universe")

    def __len__(self) -> int:
        return len(self.orders)


def sku_popularity(orders: OrderSet) -> np.ndarray:
    """Number of orders that include each product."""
    counts = np.zeros(orders.n_skus, dtype=np.int64)
    for order in orders.orders:
        for s in order:
            counts[s] += 1
    return counts


@dataclass(frozen=True)
class WarehouseDataset:
    """One slotting scenario: shelving, demand, and stock on hand."""

    layout: Layout
    orders: OrderSet
    item_sku: tuple[int, ...]

    def __post_init__(self) -> None:
        item_sku = tuple(int(s) for s in self.item_sku)
        object.__setattr__(self, "item_sku", item_sku)
        if len(item_sku) != self.layout.n_locations:
            raise DimensionError("need exactly one item per location")
        for s in item_sku:
            if not 0 <= s < self.orders.n_skus:
                raise DomainError(f"item product id {s} outside universe")

    @property
    def n_items(self) -> int:
        return len(self.item_sku)


@dataclass(frozen=True)
class Assignment:
    """Bijection item -> location, with each item's product id alongside."""

    item_location: tuple[int, ...]
    item_sku: tuple[int, ...]

    def __post_init__(self) -> None:
        locs = tuple(int(v) for v in self.item_location)
        skus = tuple(int(v) for v in self.item_sku)
        object.__setattr__(self, "item_location", locs)
        object.__setattr__(self, "item_sku", skus)
        n = len(locs)
        if len(skus) != n:
            raise DimensionError("item_location and item_sku lengths differ")
        if sorted(locs) != list(range(n)):
            raise DomainError("item_location must be a bijection onto locations")

    @property
    def n(self) -> int:
        return len(self.item_location)

    def permutation(self) -> np.ndarray:
        return np.asarray(self.item_location, dtype=np.int64)


def build_frequency_matrix(
    orders: OrderSet, item_sku: Sequence[int]
) -> np.ndarray:
    """Item-level co-demand counts.

    Entry (i, j) is the number of orders listing both products, zero when
    the items carry the same product and on the diagonal.
    """
    item_sku = np.asarray(item_sku, dtype=np.int64)
    incidence = np.zeros((len(orders.orders), orders.n_skus), dtype=np.float64)
    for o, order in enumerate(orders.orders):
        for s in order:
            incidence[o, s] = 1.0
    co = incidence.T @ incidence
    f = co[np.ix_(item_sku, item_sku)]
    same = item_sku[:, None] == item_sku[None, :]
    f[same] = 0.0
    return f


def build_distance_matrix(
    layout: Layout, mode: str = "exact", delta: float = 1.0, big_m: float = 8.0
) -> np.ndarray:
    """Pairwise travel estimates between locations; diagonal = depot distance.

    Exact mode prices same-column pairs at the shelf gap and cross-column
    pairs at the column offset plus the over-the-top row travel a serpentine
    walk implies. Block mode collapses those to the two constants delta
    (same column) and big_m (different columns).
    """
    n = layout.n_locations
    locs = np.arange(n)
    col = locs // layout.rows
    row = locs % layout.rows
    if mode == "block":
        if delta > big_m:
            raise ParameterError("within-column constant cannot exceed the cross one")
        d = np.where(col[:, None] == col[None, :], float(delta), float(big_m))
    elif mode == "exact":
        same = col[:, None] == col[None, :]
        vertical = layout.row_spacing * np.abs(row[:, None] - row[None, :])
        over_top = layout.row_spacing * (
            (layout.rows - row[:, None]) + (layout.rows - row[None, :])
        )
        horizontal = layout.column_spacing * np.abs(col[:, None] - col[None, :])
        d = np.where(same, vertical, horizontal + over_top)
    else:
        raise ParameterError(f"unknown distance mode {mode!r}")
    np.fill_diagonal(d, 0.0)
    d = d.astype(np.float64)
    np.fill_diagonal(d, layout.io_distances())
    return d


# ---------------------------------------------------------------------------
# Routing simulation


def _route_arrays(assignment: Assignment, layout: Layout, n_skus: int):
    item_sku = np.asarray(assignment.item_sku, dtype=np.int64)
    perm = assignment.permutation()
    order_counts = np.bincount(item_sku, minlength=n_skus)
    sku_item_ptr = np.zeros(n_skus + 1, dtype=np.int64)
    np.cumsum(order_counts, out=sku_item_ptr[1:])
    sku_item_idx = np.argsort(item_sku, kind="stable").astype(np.int64)
    locs = np.arange(layout.n_locations)
    loc_io = layout.io_distances().astype(np.float64)
    loc_aisle = (locs // layout.rows) // 2 + 1
    loc_row = locs % layout.rows
    return perm, sku_item_ptr, sku_item_idx, loc_io, loc_aisle.astype(np.int64), loc_row.astype(np.int64)


def _orders_csr(orders: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(orders) + 1, dtype=np.int64)
    flat = []
    for o, order in enumerate(orders):
        flat.extend(int(s) for s in order)
        ptr[o + 1] = len(flat)
    return ptr, np.asarray(flat, dtype=np.int64)


def _check_stock(orders: Sequence[Sequence[int]], item_sku: Sequence[int]) -> None:
    stocked = set(item_sku)
    for order in orders:
        for s in order:
            if s not in stocked:
                raise InventoryError(f"no stored item provides product {s}")


def sshape_route_length(
    order: Sequence[int], assignment: Assignment, layout: Layout
) -> float:
    """Walk length to pick one order and return to the depot.

    Each required product is fetched from its stored copy nearest the
    depot. All aisles up to the farthest required one are swept end to end
    with crossovers between them; the farthest aisle is walked in and back
    out to its deepest required shelf, then the picker heads straight home.
    """
    _check_stock([order], assignment.item_sku)
    n_skus = max(assignment.item_sku) + 1
    ptr, flat = _orders_csr([order])
    perm, sip, sii, loc_io, loc_aisle, loc_row = _route_arrays(
        assignment, layout, n_skus
    )
    return float(
        _kernels.order_route(
            ptr[0], ptr[1], flat, sip, sii, perm,
            loc_io, loc_aisle, loc_row,
            layout.rows, layout.row_spacing, layout.column_spacing,
        )
    )


def route_lengths(
    orders: OrderSet, assignment: Assignment, layout: Layout
) -> np.ndarray:
    """Per-order walk lengths, in order order."""
    if assignment.n != layout.n_locations:
        raise DimensionError("assignment size must match the location count")
    _check_stock(orders.orders, assignment.item_sku)
    ptr, flat = _orders_csr(orders.orders)
    perm, sip, sii, loc_io, loc_aisle, loc_row = _route_arrays(
        assignment, layout, orders.n_skus
    )
    out = np.empty(len(orders.orders), dtype=np.float64)
    _kernels.total_route(
        ptr, flat, sip, sii, perm, loc_io, loc_aisle, loc_row,
        layout.rows, layout.row_spacing, layout.column_spacing, out,
    )
    return out


def total_pick_distance(
    orders: OrderSet, assignment: Assignment, layout: Layout
) -> float:
    """Total walk length over all orders."""
    return float(route_lengths(orders, assignment, layout).sum())


# ---------------------------------------------------------------------------
# Slotting policies


def _item_popularity(dataset: WarehouseDataset) -> np.ndarray:
    pop = sku_popularity(dataset.orders)
    return pop[np.asarray(dataset.item_sku, dtype=np.int64)]


def policy_random(dataset: WarehouseDataset, seed: int = 0) -> Assignment:
    """Uniform seeded slotting; the baseline every other policy must beat."""
    rng = child_rng(seed, "wh.random")
    perm = rng.permutation(dataset.n_items)
    return Assignment(item_location=tuple(int(v) for v in perm), item_sku=dataset.item_sku)


def policy_coi(dataset: WarehouseDataset) -> Assignment:
    """Most-demanded items nearest the depot, ties by item then location id."""
    pop = _item_popularity(dataset)
    items = sorted(range(dataset.n_items), key=lambda i: (-pop[i], i))
    io = dataset.layout.io_distances()
    locs = sorted(range(dataset.layout.n_locations), key=lambda l: (io[l], l))
    placement = [0] * dataset.n_items
    for item, loc in zip(items, locs):
        placement[item] = loc
    return Assignment(item_location=tuple(placement), item_sku=dataset.item_sku)


def policy_abc(
    dataset: WarehouseDataset,
    classes: tuple[float, ...] = (0.2, 0.3, 0.5),
    seed: int = 0,
) -> Assignment:
    """Popularity classes in nested depot-distance bands, shuffled inside.

    Products are ranked by popularity and split so each class carries the
    given share of total demand mass; class bands of locations are filled
    nearest-first and items land randomly within their band.
    """
    if abs(sum(classes) - 1.0) > 1e-9 or any(c <= 0 for c in classes):
        raise ParameterError("class shares must be positive and sum to 1")
    pop = sku_popularity(dataset.orders).astype(np.float64)
    order = sorted(range(dataset.orders.n_skus), key=lambda s: (-pop[s], s))
    total = float(pop.sum())
    sku_class = np.zeros(dataset.orders.n_skus, dtype=np.int64)
    bounds = np.cumsum(classes) * total
    cum = 0.0
    cls = 0
    for s in order:
        sku_class[s] = cls
        cum += pop[s]
        while cls < len(classes) - 1 and cum >= bounds[cls] - 1e-12:
            cls += 1
    item_class = sku_class[np.asarray(dataset.item_sku, dtype=np.int64)]
    io = dataset.layout.io_distances()
    locs_sorted = sorted(range(dataset.layout.n_locations), key=lambda l: (io[l], l))
    rng = child_rng(seed, "wh.abc")
    placement = [0] * dataset.n_items
    cursor = 0
    for c in range(len(classes)):
        members = [i for i in range(dataset.n_items) if item_class[i] == c]
        band = locs_sorted[cursor : cursor + len(members)]
        cursor += len(members)
        shuffled = list(rng.permutation(len(members)))
        for slot, i in zip(shuffled, members):
            placement[i] = band[slot]
    return Assignment(item_location=tuple(placement), item_sku=dataset.item_sku)


@dataclass(frozen=True)
class OosConfig:
    """Budget and schedule for swap annealing on simulated pick distance."""

    iterations: int = 200_000
    t0: float | None = None
    t1: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ParameterError("iterations must be positive")
        if self.t0 is not None and self.t0 <= 0:
            raise ParameterError("t0 must be positive")
        if self.t1 is not None and (self.t1 <= 0 or (self.t0 and self.t1 > self.t0)):
            raise ParameterError("t1 must be positive and not above t0")


def policy_oos(dataset: WarehouseDataset, cfg: OosConfig = OosConfig()) -> Assignment:
    """Anneal pairwise item swaps directly against total pick distance."""
    _check_stock(dataset.orders.orders, dataset.item_sku)
    rng = child_rng(cfg.seed, "wh.oos.start")
    perm0 = rng.permutation(dataset.n_items).astype(np.int64)
    start = Assignment(
        item_location=tuple(int(v) for v in perm0), item_sku=dataset.item_sku
    )
    ptr, flat = _orders_csr(dataset.orders.orders)
    _, sip, sii, loc_io, loc_aisle, loc_row = _route_arrays(
        start, dataset.layout, dataset.orders.n_skus
    )
    item_sku = np.asarray(dataset.item_sku, dtype=np.int64)
    sku_order_counts = np.zeros(dataset.orders.n_skus, dtype=np.int64)
    for order in dataset.orders.orders:
        for s in order:
            sku_order_counts[s] += 1
    sku_order_ptr = np.zeros(dataset.orders.n_skus + 1, dtype=np.int64)
    np.cumsum(sku_order_counts, out=sku_order_ptr[1:])
    fill = sku_order_ptr[:-1].copy()
    sku_order_idx = np.empty(int(sku_order_ptr[-1]), dtype=np.int64)
    for o, order in enumerate(dataset.orders.orders):
        for s in order:
            sku_order_idx[fill[s]] = o
            fill[s] += 1
    lens = route_lengths(dataset.orders, start, dataset.layout)
    mean_route = float(lens.mean()) if lens.size else 1.0
    t0 = cfg.t0 if cfg.t0 is not None else max(mean_route, 1e-6)
    t1 = cfg.t1 if cfg.t1 is not None else max(1e-3 * t0, 1e-9)
    seed = int(child_seeds(cfg.seed, "wh.oos")[0])
    best_perm, _ = _kernels.oos_kernel(
        ptr, flat, sku_order_ptr, sku_order_idx, sip, sii, item_sku,
        loc_io, loc_aisle, loc_row,
        dataset.layout.rows, dataset.layout.row_spacing,
        dataset.layout.column_spacing,
        perm0, cfg.iterations, t0, t1, seed,
    )
    return Assignment(
        item_location=tuple(int(v) for v in best_perm), item_sku=dataset.item_sku
    )


def _interval_partition(n: int, k: int) -> Partition:
    """Contiguous equal chunks in location-id order (column-major runs)."""
    s = n // k
    return Partition(assignment=tuple(i // s for i in range(n)), k=k)


def policy_qap_decomp(
    dataset: WarehouseDataset,
    k: int,
    cfg: DecompositionConfig = DecompositionConfig(),
    dist_mode: str = "exact",
    delta: float = 1.0,
    big_m: float = 8.0,
) -> Assignment:
    """Slot via decomposed assignment on co-demand flow and shelf distances.

    Items are partitioned by co-demand; locations use contiguous column-major
    intervals. On top of the pairwise co-demand counts, every item carries
    its product's order count as self-flow, which multiplies the depot
    distance stored on the distance diagonal: popular items are priced
    toward shallow shelves and the subset matching lands heavy groups near
    the depot.
    """
    n = dataset.n_items
    if n % k != 0:
        raise ParameterError(f"subset count {k} does not divide {n} items")
    flow = build_frequency_matrix(dataset.orders, dataset.item_sku)
    orders_per_sku = np.zeros(dataset.orders.n_skus, dtype=np.float64)
    for order in dataset.orders.orders:
        for s in set(order):
            orders_per_sku[s] += 1.0
    np.fill_diagonal(flow, orders_per_sku[np.asarray(dataset.item_sku)])
    dist = build_distance_matrix(
        dataset.layout, mode=dist_mode, delta=delta, big_m=big_m
    )
    inst = QapInstance(flow=flow, dist=dist)
    items = partition_items(flow, k, method=cfg.partition_method, seed=cfg.seed)
    locations = _interval_partition(n, k)
    matching = match_subsets(
        flow, dist, items, locations,
        mode=cfg.resolved_match_mode(k), seed=cfg.seed,
    )
    subs = _extract_subs(inst, items, locations, matching)
    seeds = tuple(int(v) for v in child_seeds(cfg.seed, "decomp.sub", k))
    plan = DecompositionPlan(
        item_partition=items,
        location_partition=locations,
        matching=matching,
        sub_qaps=subs,
        sub_seeds=seeds,
    )
    result = solve_decomposed(inst, k, cfg, plan=plan)
    return Assignment(
        item_location=tuple(int(v) for v in result.permutation),
        item_sku=dataset.item_sku,
    )
