"""Benchmark harness: manifests, solver runs, reports, policy comparisons.

A RunManifest pins everything an experiment needs (problem source,
formulation parameters, solver settings, repetition count, master seed), so
replaying a manifest reproduces its sample files byte for byte.  Each
repetition draws its own child seed from the master seed; repetitions may
execute on a thread pool without changing any output, because results are
assembled in repetition order and the kernels run with the interpreter lock
released.

Reports are pure functions of stored result files.  Every energy printed in
a report is recomputed from the per-sample rows and checked against the
record's summary before anything is emitted.
"""
from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import MetricsSummary, SampleSet, qubo_from_text, summarize
from .decomposition import DecompositionConfig
from .errors import FormatError, ParameterError
from .formulations import (
    QuboProblem,
    maxcut_to_qubo,
    mvc_to_qubo,
    qap_to_qubo,
)
from .generators import GeneratorSpec, generate
from .io import (
    GroundTruth,
    read_dimacs,
    read_edge_list,
    read_ground_truth,
    read_orders_csv,
    read_qap_dat,
    write_ground_truth,
)
from .solvers import (
    PtConfig,
    RandomConfig,
    SaConfig,
    TabuConfig,
    brute_force_qap,
    brute_force_qubo,
    child_seeds,
    parallel_tempering,
    random_sampler,
    simulated_annealing,
    tabu_search,
)
from .warehouse import (
    OosConfig,
    WarehouseDataset,
    policy_abc,
    policy_coi,
    policy_oos,
    policy_qap_decomp,
    policy_random,
    total_pick_distance,
)

__all__ = [
    "RunManifest",
    "ResultRecord",
    "WarehouseManifest",
    "load_problem",
    "solve_manifest",
    "report_results",
    "warehouse_table",
    "oracle_ground_truth",
    "generate_files",
    "POLICY_ORDER",
]

ORACLE_LIMIT = 24

SOLVERS = {
    "sa": (SaConfig, simulated_annealing),
    "pt": (PtConfig, parallel_tempering),
    "tabu": (TabuConfig, tabu_search),
    "random": (RandomConfig, random_sampler),
}


def _params_tuple(params: dict | None) -> tuple:
    items = []
    for key, value in sorted((params or {}).items()):
        if isinstance(value, list):
            value = tuple(value)
        items.append((key, value))
    return tuple(items)


@dataclass(frozen=True)
class RunManifest:
    """Complete, replayable description of one solver experiment."""

    label: str
    kind: str
    solver: str
    problem_file: str | None = None
    problem_spec: GeneratorSpec | None = None
    formulation: tuple = ()
    solver_params: tuple = ()
    repetitions: int = 1
    seed: int = 0
    normalize: str = "auto"

    def __post_init__(self) -> None:
        if (self.problem_file is None) == (self.problem_spec is None):
            raise ParameterError(
                "manifest needs exactly one of problem_file or problem_spec"
            )
        if self.kind not in ("maxcut", "mvc", "qap", "raw"):
            raise ParameterError(f"unknown problem kind {self.kind!r}")
        if self.solver not in SOLVERS:
            raise ParameterError(f"unknown solver {self.solver!r}")
        if self.repetitions < 1:
            raise ParameterError("repetitions must be positive")
        if self.normalize not in ("auto", "none", "oracle") and not (
            self.normalize.startswith("file:")
        ):
            raise ParameterError(
                "normalize must be auto, none, oracle, or file:<path>"
            )
        object.__setattr__(self, "formulation", _params_tuple(dict(self.formulation)))
        object.__setattr__(
            self, "solver_params", _params_tuple(dict(self.solver_params))
        )

    @classmethod
    def make(
        cls,
        label: str,
        kind: str,
        solver: str,
        *,
        problem_file: str | None = None,
        problem_spec: GeneratorSpec | None = None,
        formulation: dict | None = None,
        solver_params: dict | None = None,
        repetitions: int = 1,
        seed: int = 0,
        normalize: str = "auto",
    ) -> "RunManifest":
        return cls(
            label=label,
            kind=kind,
            solver=solver,
            problem_file=problem_file,
            problem_spec=problem_spec,
            formulation=_params_tuple(formulation),
            solver_params=_params_tuple(solver_params),
            repetitions=repetitions,
            seed=seed,
            normalize=normalize,
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "label": self.label,
                "kind": self.kind,
                "solver": self.solver,
                "problem_file": self.problem_file,
                "problem_spec": (
                    None
                    if self.problem_spec is None
                    else json.loads(self.problem_spec.to_json())
                ),
                "formulation": {k: v for k, v in self.formulation},
                "solver_params": {
                    k: (list(v) if isinstance(v, tuple) else v)
                    for k, v in self.solver_params
                },
                "repetitions": self.repetitions,
                "seed": self.seed,
                "normalize": self.normalize,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        try:
            raw = json.loads(text)
            spec = raw.get("problem_spec")
            return cls.make(
                label=raw["label"],
                kind=raw["kind"],
                solver=raw["solver"],
                problem_file=raw.get("problem_file"),
                problem_spec=(
                    None if spec is None else GeneratorSpec.from_json(json.dumps(spec))
                ),
                formulation=raw.get("formulation") or {},
                solver_params=raw.get("solver_params") or {},
                repetitions=raw.get("repetitions", 1),
                seed=raw.get("seed", 0),
                normalize=raw.get("normalize", "auto"),
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"invalid manifest: {exc}") from exc

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


# ---- Problem loading ----


_GRAPH_SUFFIXES = {".edgelist", ".el"}
_DIMACS_SUFFIXES = {".clq", ".col", ".dimacs", ".mis"}


def _load_source(manifest: RunManifest):
    if manifest.problem_spec is not None:
        return generate(manifest.problem_spec)
    path = Path(manifest.problem_file)
    suffix = path.suffix.lower()
    if suffix in _GRAPH_SUFFIXES:
        return read_edge_list(path)
    if suffix in _DIMACS_SUFFIXES:
        return read_dimacs(path)
    if suffix == ".dat":
        return read_qap_dat(path)
    if suffix == ".qubo":
        return qubo_from_text(path.read_text())
    raise FormatError(f"cannot infer problem format from suffix {suffix!r}")


def load_problem(manifest: RunManifest) -> QuboProblem:
    """Materialize the manifest's problem as a minimization QUBO."""
    source = _load_source(manifest)
    params = dict(manifest.formulation)
    if manifest.kind == "maxcut":
        return maxcut_to_qubo(source)
    if manifest.kind == "mvc":
        return mvc_to_qubo(source, alpha=params.get("alpha", "auto"))
    if manifest.kind == "qap":
        return qap_to_qubo(source, penalty=params.get("penalty", "auto"))
    if isinstance(source, QuboProblem):
        return source
    return QuboProblem.from_matrix(source)


def _run_repetition(problem: QuboProblem, manifest: RunManifest, seed: int) -> SampleSet:
    config_cls, solver_fn = SOLVERS[manifest.solver]
    params = dict(manifest.solver_params)
    for key, value in params.items():
        if isinstance(value, tuple):
            params[key] = tuple(value)
    return solver_fn(problem, config_cls(seed=seed, **params))


# ---- Ground truth ----


def _reference_energy(gt: GroundTruth, problem: QuboProblem) -> float:
    """Map a stored objective value onto the QUBO energy scale."""
    return -gt.value if problem.sense == "max" else gt.value


def _resolve_reference(
    manifest: RunManifest, problem: QuboProblem, merged: SampleSet
) -> tuple[float | None, str | None]:
    mode = manifest.normalize
    if mode == "none":
        return None, None
    if mode.startswith("file:"):
        gt = read_ground_truth(mode[len("file:"):])
        return _reference_energy(gt, problem), "file"
    if mode == "oracle":
        _, energy = brute_force_qubo(problem)
        return energy, "oracle"
    if problem.num_variables <= ORACLE_LIMIT:
        _, energy = brute_force_qubo(problem)
        return energy, "oracle"
    mask = merged.feasible_mask()
    pool = merged.energies()[mask] if mask.any() else merged.energies()
    return float(pool.min()), "best_known"


# ---- Records ----


@dataclass(frozen=True)
class ResultRecord:
    """Everything one manifest run produced, minus the raw bit vectors."""

    manifest_digest: str
    label: str
    kind: str
    sense: str
    solver: str
    samples: tuple  # (rep, energy, feasible, violations) rows
    summary: MetricsSummary
    reference_energy: float | None
    reference_source: str | None
    total_constraints: int
    wall_seconds: float
    samples_csv: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "manifest_digest": self.manifest_digest,
                "label": self.label,
                "kind": self.kind,
                "sense": self.sense,
                "solver": self.solver,
                "samples": [list(row) for row in self.samples],
                "summary": {
                    "mean_energy": self.summary.mean_energy,
                    "best_energy": self.summary.best_energy,
                    "std_energy": self.summary.std_energy,
                    "p_f": self.summary.p_f,
                    "mean_violation_pct": self.summary.mean_violation_pct,
                    "none_feasible": self.summary.none_feasible,
                    "normalized_mean": self.summary.normalized_mean,
                    "normalized_best": self.summary.normalized_best,
                },
                "reference_energy": self.reference_energy,
                "reference_source": self.reference_source,
                "total_constraints": self.total_constraints,
                "wall_seconds": self.wall_seconds,
                "samples_csv": self.samples_csv,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        try:
            raw = json.loads(text)
            summary = MetricsSummary(**raw["summary"])
            return cls(
                manifest_digest=raw["manifest_digest"],
                label=raw["label"],
                kind=raw["kind"],
                sense=raw["sense"],
                solver=raw["solver"],
                samples=tuple(
                    (int(r), float(e), bool(f), int(v))
                    for r, e, f, v in raw["samples"]
                ),
                summary=summary,
                reference_energy=raw["reference_energy"],
                reference_source=raw["reference_source"],
                total_constraints=raw["total_constraints"],
                wall_seconds=raw["wall_seconds"],
                samples_csv=raw["samples_csv"],
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"invalid result record: {exc}") from exc


def _samples_csv_text(rep_sets: list[SampleSet]) -> str:
    lines = ["rep,index,energy,feasible,violations,bits"]
    for rep, sset in enumerate(rep_sets):
        for idx, sample in enumerate(sset.samples):
            bits = "".join(str(int(b)) for b in sample.bits)
            lines.append(
                f"{rep},{idx},{sample.energy!r},{int(sample.feasible)},"
                f"{sample.violations},{bits}"
            )
    return "\n".join(lines) + "\n"


def solve_manifest(
    manifest: RunManifest, out_dir: str | Path, workers: int = 1
) -> ResultRecord:
    """Run a manifest and write its record JSON plus samples CSV.

    ``workers`` only sets the thread-pool width; outputs are identical for
    any value because each repetition is a pure function of its child seed
    and rows are written in repetition order.
    """
    if workers < 1:
        raise ParameterError("workers must be positive")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    problem = load_problem(manifest)
    seeds = child_seeds(manifest.seed, "bench.rep", manifest.repetitions)
    start = time.perf_counter()
    if workers == 1:
        rep_sets = [
            _run_repetition(problem, manifest, int(s)) for s in seeds
        ]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rep_sets = list(
                pool.map(
                    lambda s: _run_repetition(problem, manifest, int(s)), seeds
                )
            )
    wall = time.perf_counter() - start
    merged = SampleSet(
        samples=tuple(s for sset in rep_sets for s in sset.samples),
        solver=manifest.solver,
        solve_seconds=sum(s.solve_seconds for s in rep_sets),
        total_constraints=rep_sets[0].total_constraints,
    )
    reference, source = _resolve_reference(manifest, problem, merged)
    # Stored sample energies are always on the minimization-QUBO scale;
    # the problem's sense only affects how report tables display them.
    summary = summarize(merged, reference_energy=reference, sense="min")
    rows = tuple(
        (rep, s.energy, s.feasible, s.violations)
        for rep, sset in enumerate(rep_sets)
        for s in sset.samples
    )
    base = f"{manifest.label}-{manifest.solver}"
    csv_name = f"{base}.samples.csv"
    (out / csv_name).write_text(_samples_csv_text(rep_sets))
    record = ResultRecord(
        manifest_digest=manifest.digest(),
        label=manifest.label,
        kind=manifest.kind,
        sense=problem.sense,
        solver=manifest.solver,
        samples=rows,
        summary=summary,
        reference_energy=reference,
        reference_source=source,
        total_constraints=merged.total_constraints,
        wall_seconds=wall,
        samples_csv=csv_name,
    )
    (out / f"{base}.result.json").write_text(record.to_json() + "\n")
    (out / f"{base}.manifest.json").write_text(manifest.to_json() + "\n")
    return record


# ---- Reporting ----


def _verify_record(record: ResultRecord, path: Path) -> None:
    """Recompute the summary from stored rows; reject any drift."""
    energies = np.array([row[1] for row in record.samples])
    feasible = np.array([row[2] for row in record.samples], dtype=bool)
    if energies.size == 0:
        raise FormatError(f"{path}: record has no samples")
    csv_path = path.parent / record.samples_csv
    if csv_path.exists():
        got = _read_samples_csv(csv_path)
        if not np.allclose(got["energy"], energies, rtol=0, atol=0):
            raise FormatError(f"{path}: samples CSV disagrees with record")
    pool = energies[feasible] if feasible.any() else energies
    best = float(pool.min())
    mean = float(pool.mean())
    p_f = 100.0 * float(feasible.sum()) / energies.size
    s = record.summary
    checks = (
        (best, s.best_energy),
        (mean, s.mean_energy),
        (p_f, s.p_f),
    )
    for got_value, stored in checks:
        if abs(got_value - stored) > 1e-9 * max(1.0, abs(stored)):
            raise FormatError(
                f"{path}: stored summary does not match its samples "
                f"(recomputed {got_value!r}, stored {stored!r})"
            )


def _read_samples_csv(path: Path) -> dict:
    energies = []
    feasible = []
    header = None
    for ln, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            header = line
            if header != "rep,index,energy,feasible,violations,bits":
                raise FormatError(f"{path} line {ln}: unexpected header")
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise FormatError(f"{path} line {ln}: expected six columns")
        energies.append(float(parts[2]))
        feasible.append(parts[3] == "1")
    return {"energy": np.array(energies), "feasible": np.array(feasible)}


def _triple(record: ResultRecord) -> str:
    """Best-energy / seconds / feasibility-fraction cell."""
    best = record.summary.best_energy
    if record.sense == "max":
        best = -best
    pf = record.summary.p_f / 100.0
    return f"{best:g}/{record.wall_seconds:.3f}/{pf:g}"


def report_results(paths) -> str:
    """Merge result records into one CSV table, verifying as it goes."""
    records = []
    for p in paths:
        p = Path(p)
        record = ResultRecord.from_json(p.read_text())
        _verify_record(record, p)
        records.append(record)
    if not records:
        raise ParameterError("report needs at least one result file")
    senses = {r.sense for r in records}
    if len(senses) > 1:
        raise FormatError(f"cannot mix senses in one table: {sorted(senses)}")
    lines = [
        "instance,solver,best_energy,mean_energy,normalized_best,"
        "normalized_mean,p_f,seconds,energy_timing_pf"
    ]
    for r in sorted(records, key=lambda r: (r.label, r.solver)):
        s = r.summary
        best = -s.best_energy if r.sense == "max" else s.best_energy
        mean = -s.mean_energy if r.sense == "max" else s.mean_energy
        norm_best = "" if s.normalized_best is None else repr(s.normalized_best)
        norm_mean = "" if s.normalized_mean is None else repr(s.normalized_mean)
        lines.append(
            f"{r.label},{r.solver},{best!r},{mean!r},{norm_best},{norm_mean},"
            f"{s.p_f!r},{r.wall_seconds:.3f},{_triple(r)}"
        )
    return "\n".join(lines) + "\n"


# ---- Oracle ----


def oracle_ground_truth(
    manifest: RunManifest, out_path: str | Path
) -> GroundTruth:
    """Brute-force the manifest's problem and store a certificate."""
    if manifest.kind == "qap" and (
        manifest.problem_file or ""
    ).endswith(".dat"):
        inst = read_qap_dat(manifest.problem_file)
        perm, value = brute_force_qap(inst)
        record = GroundTruth(
            instance=manifest.label,
            kind="qap",
            value=value,
            solution=tuple(int(v) for v in perm),
            source="oracle",
        )
    else:
        problem = load_problem(manifest)
        bits, energy = brute_force_qubo(problem)
        record = GroundTruth(
            instance=manifest.label,
            kind=manifest.kind,
            value=problem.report_energy(energy),
            solution=tuple(int(b) for b in bits),
            source="oracle",
        )
    write_ground_truth(out_path, record)
    return record


# ---- Dataset generation ----


_SUFFIX_BY_FAMILY = {
    "chimera": ".edgelist",
    "hardware_subgraph": ".edgelist",
    "gnm": ".edgelist",
    "hamming": ".clq",
    "tinyqap": ".dat",
    "orders": ".csv",
}


def generate_files(specs, out_dir: str | Path) -> list[Path]:
    """Write one artifact file per spec, named from the spec's fields."""
    from .io import write_dimacs, write_edge_list, write_orders_csv, write_qap_dat

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for spec in specs:
        suffix = _SUFFIX_BY_FAMILY.get(spec.family)
        if suffix is None:
            raise ParameterError(
                f"family {spec.family!r} has no file serialization"
            )
        params = "-".join(
            f"{k}{v}" for k, v in spec.parameters if not isinstance(v, str)
        )
        name = f"{spec.family}-{params}-s{spec.seed}{suffix}"
        path = out / name
        artifact = generate(spec)
        if suffix == ".edgelist":
            write_edge_list(path, artifact, spec=spec)
        elif suffix == ".clq":
            write_dimacs(path, artifact, spec=spec)
        elif suffix == ".dat":
            write_qap_dat(path, artifact, spec=spec)
        else:
            write_orders_csv(path, artifact, spec=spec)
        written.append(path)
    return written


# ---- Warehouse comparison ----


POLICY_ORDER = ("abc", "coi", "oos", "random", "qap_decomp")


@dataclass(frozen=True)
class WarehouseManifest:
    """Replayable description of one five-policy comparison run."""

    label: str
    dataset_spec: GeneratorSpec | None = None
    orders_file: str | None = None
    layout: tuple = ()
    k: int = 1
    repetitions: int = 1
    seed: int = 0
    oos_iterations: int = 200_000
    dist_mode: str = "exact"
    partition_method: str = "auto"

    def __post_init__(self) -> None:
        if (self.dataset_spec is None) == (self.orders_file is None):
            raise ParameterError(
                "manifest needs exactly one of dataset_spec or orders_file"
            )
        if self.orders_file is not None and not dict(self.layout):
            raise ParameterError("orders_file mode needs layout rows/columns")
        if self.repetitions < 1:
            raise ParameterError("repetitions must be positive")
        object.__setattr__(self, "layout", _params_tuple(dict(self.layout)))

    def to_json(self) -> str:
        return json.dumps(
            {
                "label": self.label,
                "dataset_spec": (
                    None
                    if self.dataset_spec is None
                    else json.loads(self.dataset_spec.to_json())
                ),
                "orders_file": self.orders_file,
                "layout": {k: v for k, v in self.layout},
                "k": self.k,
                "repetitions": self.repetitions,
                "seed": self.seed,
                "oos_iterations": self.oos_iterations,
                "dist_mode": self.dist_mode,
                "partition_method": self.partition_method,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "WarehouseManifest":
        try:
            raw = json.loads(text)
            spec = raw.get("dataset_spec")
            return cls(
                label=raw["label"],
                dataset_spec=(
                    None if spec is None else GeneratorSpec.from_json(json.dumps(spec))
                ),
                orders_file=raw.get("orders_file"),
                layout=_params_tuple(raw.get("layout") or {}),
                k=raw.get("k", 1),
                repetitions=raw.get("repetitions", 1),
                seed=raw.get("seed", 0),
                oos_iterations=raw.get("oos_iterations", 200_000),
                dist_mode=raw.get("dist_mode", "exact"),
                partition_method=raw.get("partition_method", "auto"),
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"invalid warehouse manifest: {exc}") from exc


def _load_dataset(manifest: WarehouseManifest) -> WarehouseDataset:
    if manifest.dataset_spec is not None:
        ds = generate(manifest.dataset_spec)
        if not isinstance(ds, WarehouseDataset):
            raise ParameterError(
                f"family {manifest.dataset_spec.family!r} is not a picking dataset"
            )
        return ds
    orders = read_orders_csv(manifest.orders_file)
    layout_params = dict(manifest.layout)
    from .warehouse import Layout

    layout = Layout(
        rows=layout_params["rows"],
        columns=layout_params["columns"],
        row_spacing=layout_params.get("row_spacing", 1.0),
        column_spacing=layout_params.get("column_spacing", 3.0),
    )
    if orders.n_skus != layout.n_locations:
        raise ParameterError(
            "orders_file mode stocks one product per location; product count "
            f"{orders.n_skus} must equal location count {layout.n_locations}"
        )
    return WarehouseDataset(
        layout=layout, orders=orders, item_sku=tuple(range(orders.n_skus))
    )


def _policy_assignment(name, dataset, manifest, rep_seed):
    if name == "random":
        return policy_random(dataset, seed=rep_seed)
    if name == "coi":
        return policy_coi(dataset)
    if name == "abc":
        return policy_abc(dataset, seed=rep_seed)
    if name == "oos":
        return policy_oos(
            dataset, OosConfig(iterations=manifest.oos_iterations, seed=rep_seed)
        )
    cfg = DecompositionConfig(
        seed=rep_seed, partition_method=manifest.partition_method
    )
    return policy_qap_decomp(
        dataset, manifest.k, cfg, dist_mode=manifest.dist_mode
    )


def warehouse_table(
    manifest: WarehouseManifest, out_dir: str | Path | None = None
) -> str:
    """Total pick distance per policy and repetition, plus a mean row."""
    dataset = _load_dataset(manifest)
    seeds = child_seeds(manifest.seed, "bench.wh", manifest.repetitions)
    lines = ["rep," + ",".join(POLICY_ORDER)]
    totals = {name: 0.0 for name in POLICY_ORDER}
    for rep, rep_seed in enumerate(seeds):
        cells = []
        for name in POLICY_ORDER:
            asg = _policy_assignment(name, dataset, manifest, int(rep_seed))
            dist = total_pick_distance(dataset.orders, asg, dataset.layout)
            totals[name] += dist
            cells.append(repr(dist))
        lines.append(f"{rep}," + ",".join(cells))
    mean_cells = [repr(totals[name] / manifest.repetitions) for name in POLICY_ORDER]
    lines.append("mean," + ",".join(mean_cells))
    text = "\n".join(lines) + "\n"
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{manifest.label}.warehouse.csv").write_text(text)
        (out / f"{manifest.label}.warehouse-manifest.json").write_text(
            manifest.to_json() + "\n"
        )
    return text
