"""Text formats for problem artifacts and results.

All writers are deterministic: identical inputs produce byte-identical
files (sorted JSON keys, fixed row order, shortest-roundtrip float text, no
timestamps).  Generated datasets carry their recipe in a ``# spec:`` header
comment so a file is traceable back to the GeneratorSpec that made it.

Formats:

* edge list (``nodes N`` header then ``u v w`` rows) for weighted graphs,
* DIMACS (``p edge N M`` / ``e u v``, 1-based) for benchmark graphs,
* whitespace-token matrix pairs for assignment instances,
* ``order_id,sku`` CSV for order sets,
* ``item_id,location_id,sku`` CSV for slotting assignments,
* ground-truth JSON records.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError
from .formulations import QapInstance, WeightedGraph
from .generators import GeneratorSpec
from .warehouse import Assignment, OrderSet

__all__ = [
    "GroundTruth",
    "read_provenance",
    "write_edge_list",
    "read_edge_list",
    "write_dimacs",
    "read_dimacs",
    "write_qap_dat",
    "read_qap_dat",
    "write_orders_csv",
    "read_orders_csv",
    "write_assignment_csv",
    "read_assignment_csv",
    "write_route_lengths_csv",
    "write_ground_truth",
    "read_ground_truth",
]


def _spec_comment(spec: GeneratorSpec | None, prefix: str = "#") -> list[str]:
    if spec is None:
        return []
    return [f"{prefix} spec: {spec.to_json()}"]


def read_provenance(path: str | Path) -> GeneratorSpec | None:
    """Return the GeneratorSpec embedded in a file's header, if any."""
    for line in Path(path).read_text().splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if stripped[0] not in "#c":
            break
        marker = stripped.lstrip("#c").strip()
        if marker.startswith("spec:"):
            return GeneratorSpec.from_json(marker[len("spec:"):].strip())
    return None


# ---- Edge lists ----


def write_edge_list(
    path: str | Path, g: WeightedGraph, spec: GeneratorSpec | None = None
) -> None:
    lines = _spec_comment(spec)
    lines.append(f"nodes {g.node_count}")
    for u, v, w in g.edges:
        lines.append(f"{u} {v} {w!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path: str | Path) -> WeightedGraph:
    node_count = None
    edges: list[tuple[int, int, float]] = []
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "nodes":
            if node_count is not None or len(parts) != 2:
                raise FormatError(f"line {ln}: malformed nodes header")
            try:
                node_count = int(parts[1])
            except ValueError as exc:
                raise FormatError(f"line {ln}: bad node count") from exc
            continue
        if node_count is None:
            raise FormatError(f"line {ln}: edge before nodes header")
        if len(parts) != 3:
            raise FormatError(f"line {ln}: expected 'u v w'")
        try:
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise FormatError(f"line {ln}: bad edge tokens") from exc
    if node_count is None:
        raise FormatError("missing nodes header")
    return WeightedGraph(node_count=node_count, edges=tuple(edges))


# ---- DIMACS graphs ----


def write_dimacs(
    path: str | Path, g: WeightedGraph, spec: GeneratorSpec | None = None
) -> None:
    """1-based unweighted DIMACS edge format."""
    lines = _spec_comment(spec, prefix="c")
    lines.append(f"p edge {g.node_count} {g.edge_count}")
    for u, v, _ in g.edges:
        lines.append(f"e {u + 1} {v + 1}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_dimacs(path: str | Path) -> WeightedGraph:
    """Parse a DIMACS edge-format graph; weights default to 1."""
    node_count = None
    declared_edges = None
    edges: list[tuple[int, int, float]] = []
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if node_count is not None or len(parts) != 4:
                raise FormatError(f"line {ln}: malformed problem line")
            try:
                node_count, declared_edges = int(parts[2]), int(parts[3])
            except ValueError as exc:
                raise FormatError(f"line {ln}: bad problem line") from exc
        elif parts[0] == "e":
            if node_count is None:
                raise FormatError(f"line {ln}: edge before problem line")
            if len(parts) not in (3, 4):
                raise FormatError(f"line {ln}: expected 'e u v [w]'")
            try:
                u, v = int(parts[1]) - 1, int(parts[2]) - 1
                w = float(parts[3]) if len(parts) == 4 else 1.0
            except ValueError as exc:
                raise FormatError(f"line {ln}: bad edge tokens") from exc
            edges.append((u, v, w))
        else:
            raise FormatError(f"line {ln}: unknown directive {parts[0]!r}")
    if node_count is None:
        raise FormatError("missing problem line")
    if declared_edges != len(edges):
        raise FormatError(
            f"problem line declares {declared_edges} edges, found {len(edges)}"
        )
    return WeightedGraph(node_count=node_count, edges=tuple(edges))


# ---- Assignment instances ----


def write_qap_dat(
    path: str | Path, inst: QapInstance, spec: GeneratorSpec | None = None
) -> None:
    """Size line, then the flow matrix, then the distance matrix."""
    lines = _spec_comment(spec)
    lines.append(str(inst.n))
    for mat in (inst.flow, inst.dist):
        lines.append("")
        for row in mat:
            lines.append(" ".join(repr(float(x)) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_qap_dat(path: str | Path) -> QapInstance:
    tokens: list[str] = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens.extend(line.split())
    if not tokens:
        raise FormatError("empty instance file")
    try:
        n = int(tokens[0])
    except ValueError as exc:
        raise FormatError("first token must be the size") from exc
    want = 1 + 2 * n * n
    if len(tokens) != want:
        raise FormatError(
            f"expected {want} tokens for size {n}, found {len(tokens)}"
        )
    try:
        values = np.array([float(t) for t in tokens[1:]])
    except ValueError as exc:
        raise FormatError("non-numeric matrix entry") from exc
    flow = values[: n * n].reshape(n, n)
    dist = values[n * n:].reshape(n, n)
    return QapInstance(flow=flow, dist=dist)


# ---- Warehouse artifacts ----


def write_orders_csv(
    path: str | Path, orders: OrderSet, spec: GeneratorSpec | None = None
) -> None:
    lines = _spec_comment(spec)
    lines.append(f"# n_skus: {orders.n_skus}")
    lines.append(f"# n_orders: {len(orders.orders)}")
    lines.append("order_id,sku")
    for oid, order in enumerate(orders.orders):
        for sku in order:
            lines.append(f"{oid},{sku}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_orders_csv(path: str | Path) -> OrderSet:
    n_skus = None
    n_orders = None
    rows: list[tuple[int, int]] = []
    saw_header = False
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("n_skus:"):
                n_skus = int(body.split(":", 1)[1])
            elif body.startswith("n_orders:"):
                n_orders = int(body.split(":", 1)[1])
            continue
        if not saw_header:
            if line != "order_id,sku":
                raise FormatError(f"line {ln}: expected header 'order_id,sku'")
            saw_header = True
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise FormatError(f"line {ln}: expected 'order_id,sku'")
        try:
            rows.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise FormatError(f"line {ln}: bad integer") from exc
    if n_skus is None or not saw_header:
        raise FormatError("missing n_skus header or column header")
    count = n_orders if n_orders is not None else (
        max((oid for oid, _ in rows), default=-1) + 1
    )
    grouped: list[list[int]] = [[] for _ in range(count)]
    for oid, sku in rows:
        if not (0 <= oid < count):
            raise FormatError(f"order id {oid} outside 0..{count - 1}")
        grouped[oid].append(sku)
    return OrderSet(orders=tuple(tuple(o) for o in grouped), n_skus=n_skus)


def write_assignment_csv(path: str | Path, assignment: Assignment) -> None:
    lines = ["item_id,location_id,sku"]
    for item, (loc, sku) in enumerate(
        zip(assignment.item_location, assignment.item_sku)
    ):
        lines.append(f"{item},{loc},{sku}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_assignment_csv(path: str | Path) -> Assignment:
    locs: list[int] = []
    skus: list[int] = []
    saw_header = False
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not saw_header:
            if line != "item_id,location_id,sku":
                raise FormatError(
                    f"line {ln}: expected header 'item_id,location_id,sku'"
                )
            saw_header = True
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise FormatError(f"line {ln}: expected three columns")
        try:
            item, loc, sku = (int(p) for p in parts)
        except ValueError as exc:
            raise FormatError(f"line {ln}: bad integer") from exc
        if item != len(locs):
            raise FormatError(f"line {ln}: items must appear in order")
        locs.append(loc)
        skus.append(sku)
    if not saw_header:
        raise FormatError("missing header")
    return Assignment(item_location=tuple(locs), item_sku=tuple(skus))


def write_route_lengths_csv(path: str | Path, lengths) -> None:
    lines = ["order_id,route_length"]
    for oid, value in enumerate(lengths):
        lines.append(f"{oid},{float(value)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


# ---- Ground truth ----


@dataclass(frozen=True)
class GroundTruth:
    """Reference optimum for one instance.

    ``source`` records how the value was obtained: "oracle" for exhaustive
    enumeration, "file" for an ingested published value, "best_known" for
    the best value seen across runs (an upper bound for minimization, not a
    certificate).
    """

    instance: str
    kind: str
    value: float
    solution: tuple[int, ...]
    source: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "instance": self.instance,
                "kind": self.kind,
                "value": self.value,
                "solution": list(self.solution),
                "source": self.source,
            },
            sort_keys=True,
        )


def write_ground_truth(path: str | Path, record: GroundTruth) -> None:
    Path(path).write_text(record.to_json() + "\n")


def read_ground_truth(path: str | Path) -> GroundTruth:
    try:
        raw = json.loads(Path(path).read_text())
        return GroundTruth(
            instance=str(raw["instance"]),
            kind=str(raw["kind"]),
            value=float(raw["value"]),
            solution=tuple(int(v) for v in raw["solution"]),
            source=str(raw["source"]),
        )
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"invalid ground-truth file: {exc}") from exc
