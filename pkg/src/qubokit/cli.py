"""Command-line entry point.

Subcommands: ``gen`` (write dataset files), ``solve`` (run a manifest),
``report`` (merge result records into one table), ``warehouse`` (five-policy
comparison), ``oracle`` (brute-force a ground-truth certificate).  A manifest
file, when given, overrides individual flags.  Failures exit nonzero and
print a one-line JSON error object to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    RunManifest,
    WarehouseManifest,
    generate_files,
    oracle_ground_truth,
    report_results,
    solve_manifest,
    warehouse_table,
)
from .errors import ParameterError, QubokitError
from .generators import GeneratorSpec


def _parse_value(text: str):
    try:
        return json.loads(text)
    except ValueError:
        return text


def _parse_params(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ParameterError(f"expected key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        out[key] = _parse_value(value)
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qubokit",
        description="Dataset generation, annealing benchmarks, and "
        "warehouse policy comparisons.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write dataset files from generator specs")
    gen.add_argument("--family", help="generator family for a single artifact")
    gen.add_argument("--param", action="append", metavar="KEY=VALUE")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--tinyqap-ladder", metavar="LO:HI",
                     help="write one instance per size in the range")
    gen.add_argument("--gnm-sweep", action="store_true",
                     help="write the 32-instance connectivity sweep at n=145")
    gen.add_argument("--out", required=True, help="output directory")

    solve = sub.add_parser("solve", help="run one solver manifest")
    solve.add_argument("--manifest", help="manifest JSON file (overrides flags)")
    solve.add_argument("--label")
    solve.add_argument("--kind", choices=["maxcut", "mvc", "qap", "raw"])
    solve.add_argument("--solver", choices=["sa", "pt", "tabu", "random"])
    solve.add_argument("--problem-file")
    solve.add_argument("--spec-json", help="inline GeneratorSpec JSON")
    solve.add_argument("--solver-param", action="append", metavar="KEY=VALUE")
    solve.add_argument("--formulation-param", action="append", metavar="KEY=VALUE")
    solve.add_argument("--reps", type=int, default=1)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--normalize", default="auto")
    solve.add_argument("--workers", type=int, default=1)
    solve.add_argument("--out", default=".", help="output directory")

    report = sub.add_parser("report", help="merge result records into a table")
    report.add_argument("results", nargs="+", help="result JSON files")
    report.add_argument("--out", help="write the table here instead of stdout")

    wh = sub.add_parser("warehouse", help="compare slotting policies")
    wh.add_argument("--manifest", help="manifest JSON file (overrides flags)")
    wh.add_argument("--label", default="warehouse")
    wh.add_argument("--rows", type=int)
    wh.add_argument("--columns", type=int)
    wh.add_argument("--orders", type=int)
    wh.add_argument("--lines", type=int)
    wh.add_argument("--skew", default="pareto8020", choices=["none", "pareto8020"])
    wh.add_argument("--k", type=int, default=1)
    wh.add_argument("--reps", type=int, default=1)
    wh.add_argument("--seed", type=int, default=0)
    wh.add_argument("--oos-iterations", type=int, default=200_000)
    wh.add_argument("--dist-mode", default="exact", choices=["exact", "block"])
    wh.add_argument("--out", help="output directory")

    oracle = sub.add_parser("oracle", help="write a brute-force certificate")
    oracle.add_argument("--label", required=True)
    oracle.add_argument("--kind", required=True,
                        choices=["maxcut", "mvc", "qap", "raw"])
    oracle.add_argument("--problem-file")
    oracle.add_argument("--spec-json")
    oracle.add_argument("--out", required=True, help="ground-truth JSON path")
    return parser


def _cmd_gen(args) -> int:
    specs = []
    if args.tinyqap_ladder:
        lo, _, hi = args.tinyqap_ladder.partition(":")
        for n in range(int(lo), int(hi) + 1):
            specs.append(GeneratorSpec.make("tinyqap", seed=1234, n=n))
    if args.gnm_sweep:
        from .generators import SWEEP_DEGREES
        from .solvers import child_seeds

        seeds = child_seeds(args.seed, "gnm.sweep", len(SWEEP_DEGREES))
        for deg, s in zip(SWEEP_DEGREES, seeds):
            specs.append(
                GeneratorSpec.make(
                    "gnm", seed=int(s), n=145, m=(145 * deg) // 2
                )
            )
    if args.family:
        specs.append(
            GeneratorSpec.make(args.family, seed=args.seed,
                               **_parse_params(args.param))
        )
    if not specs:
        raise ParameterError(
            "nothing to generate: pass --family, --tinyqap-ladder, or --gnm-sweep"
        )
    for path in generate_files(specs, args.out):
        print(path)
    return 0


def _solve_manifest_from_args(args) -> RunManifest:
    if args.manifest:
        return RunManifest.from_json(Path(args.manifest).read_text())
    if not (args.label and args.kind and args.solver):
        raise ParameterError(
            "solve needs --manifest or all of --label/--kind/--solver"
        )
    spec = GeneratorSpec.from_json(args.spec_json) if args.spec_json else None
    return RunManifest.make(
        label=args.label,
        kind=args.kind,
        solver=args.solver,
        problem_file=args.problem_file,
        problem_spec=spec,
        formulation=_parse_params(args.formulation_param),
        solver_params=_parse_params(args.solver_param),
        repetitions=args.reps,
        seed=args.seed,
        normalize=args.normalize,
    )


def _cmd_solve(args) -> int:
    manifest = _solve_manifest_from_args(args)
    record = solve_manifest(manifest, args.out, workers=args.workers)
    s = record.summary
    print(
        json.dumps(
            {
                "label": record.label,
                "solver": record.solver,
                "best_energy": s.best_energy,
                "mean_energy": s.mean_energy,
                "p_f": s.p_f,
                "reference_source": record.reference_source,
                "wall_seconds": record.wall_seconds,
                "result_file": str(
                    Path(args.out) / f"{manifest.label}-{manifest.solver}.result.json"
                ),
            },
            sort_keys=True,
        )
    )
    return 0


def _cmd_report(args) -> int:
    table = report_results(args.results)
    if args.out:
        Path(args.out).write_text(table)
        print(args.out)
    else:
        print(table, end="")
    return 0


def _warehouse_manifest_from_args(args) -> WarehouseManifest:
    if args.manifest:
        return WarehouseManifest.from_json(Path(args.manifest).read_text())
    if not (args.rows and args.columns and args.orders and args.lines):
        raise ParameterError(
            "warehouse needs --manifest or all of --rows/--columns/--orders/--lines"
        )
    spec = GeneratorSpec.make(
        "warehouse",
        seed=args.seed,
        rows=args.rows,
        columns=args.columns,
        n_orders=args.orders,
        lines_per_order=args.lines,
        skew=args.skew,
    )
    return WarehouseManifest(
        label=args.label,
        dataset_spec=spec,
        k=args.k,
        repetitions=args.reps,
        seed=args.seed,
        oos_iterations=args.oos_iterations,
        dist_mode=args.dist_mode,
    )


def _cmd_warehouse(args) -> int:
    manifest = _warehouse_manifest_from_args(args)
    table = warehouse_table(manifest, out_dir=args.out)
    print(table, end="")
    return 0


def _cmd_oracle(args) -> int:
    spec = GeneratorSpec.from_json(args.spec_json) if args.spec_json else None
    manifest = RunManifest.make(
        label=args.label,
        kind=args.kind,
        solver="random",
        problem_file=args.problem_file,
        problem_spec=spec,
        normalize="none",
    )
    record = oracle_ground_truth(manifest, args.out)
    print(record.to_json())
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "report": _cmd_report,
    "warehouse": _cmd_warehouse,
    "oracle": _cmd_oracle,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (QubokitError, OSError) as exc:
        print(
            json.dumps(
                {"error": type(exc).__name__, "message": str(exc)},
                sort_keys=True,
            ),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
