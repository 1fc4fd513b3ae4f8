"""Tests for the benchmark harness and the command-line entry point."""
from __future__ import annotations

import itertools
import json

import numpy as np
import pytest

from qubokit.bench import (
    POLICY_ORDER,
    ResultRecord,
    RunManifest,
    WarehouseManifest,
    generate_files,
    load_problem,
    oracle_ground_truth,
    report_results,
    solve_manifest,
    warehouse_table,
)
from qubokit.cli import main
from qubokit.errors import FormatError, ParameterError
from qubokit.formulations import WeightedGraph, qap_energy
from qubokit.generators import GeneratorSpec, gen_tinyqap
from qubokit.io import (
    GroundTruth,
    read_ground_truth,
    read_provenance,
    write_edge_list,
    write_ground_truth,
    write_qap_dat,
)
from qubokit.solvers import brute_force_qap


def path_graph_file(tmp_path, nodes=3):
    edges = tuple((i, i + 1, 1.0) for i in range(nodes - 1))
    g = WeightedGraph(node_count=nodes, edges=edges)
    p = tmp_path / "path.edgelist"
    write_edge_list(p, g)
    return p


def triangle_file(tmp_path):
    g = WeightedGraph(
        node_count=3, edges=((0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0))
    )
    p = tmp_path / "triangle.edgelist"
    write_edge_list(p, g)
    return p


class TestRunManifest:
    def test_roundtrip(self):
        m = RunManifest.make(
            "gnm-20", "maxcut", "sa",
            problem_spec=GeneratorSpec.make("gnm", seed=3, n=20, m=40),
            solver_params={"num_reads": 10, "sweeps": 50},
            repetitions=2, seed=9, normalize="none",
        )
        again = RunManifest.from_json(m.to_json())
        assert again == m
        assert again.digest() == m.digest()

    def test_exactly_one_source(self):
        with pytest.raises(ParameterError):
            RunManifest.make("x", "mvc", "sa")
        with pytest.raises(ParameterError):
            RunManifest.make(
                "x", "mvc", "sa", problem_file="a.clq",
                problem_spec=GeneratorSpec.make("gnm", n=4, m=2),
            )

    def test_field_validation(self):
        spec = GeneratorSpec.make("gnm", n=4, m=2)
        with pytest.raises(ParameterError):
            RunManifest.make("x", "tsp", "sa", problem_spec=spec)
        with pytest.raises(ParameterError):
            RunManifest.make("x", "mvc", "gurobi", problem_spec=spec)
        with pytest.raises(ParameterError):
            RunManifest.make("x", "mvc", "sa", problem_spec=spec,
                             normalize="maybe")


class TestLoadProblem:
    def test_from_spec(self):
        m = RunManifest.make(
            "c1", "maxcut", "sa",
            problem_spec=GeneratorSpec.make("chimera", m=1, t=2),
        )
        problem = load_problem(m)
        assert problem.kind == "maxcut"
        assert problem.num_variables == 4

    def test_from_edge_list_mvc(self, tmp_path):
        p = path_graph_file(tmp_path)
        m = RunManifest.make("path", "mvc", "sa", problem_file=str(p))
        problem = load_problem(m)
        assert problem.kind == "mvc"
        assert problem.alpha == 2.0

    def test_alpha_override(self, tmp_path):
        p = path_graph_file(tmp_path)
        m = RunManifest.make(
            "path", "mvc", "sa", problem_file=str(p),
            formulation={"alpha": 3.5},
        )
        assert load_problem(m).alpha == 3.5

    def test_from_qap_dat(self, tmp_path):
        inst = gen_tinyqap(4)
        p = tmp_path / "tiny.dat"
        write_qap_dat(p, inst)
        m = RunManifest.make("tiny", "qap", "pt", problem_file=str(p))
        problem = load_problem(m)
        assert problem.kind == "qap"
        assert problem.num_variables == 16

    def test_unknown_suffix(self, tmp_path):
        p = tmp_path / "mystery.bin"
        p.write_text("")
        m = RunManifest.make("x", "mvc", "sa", problem_file=str(p))
        with pytest.raises(FormatError):
            load_problem(m)


class TestSolveManifest:
    def test_mvc_path_graph_sa(self, tmp_path):
        p = path_graph_file(tmp_path)
        m = RunManifest.make(
            "path", "mvc", "sa", problem_file=str(p),
            solver_params={"num_reads": 20, "sweeps": 200},
            repetitions=2, seed=1,
        )
        record = solve_manifest(m, tmp_path / "out")
        assert record.summary.best_energy == pytest.approx(1.0)
        assert record.summary.p_f == pytest.approx(100.0)
        assert record.reference_source == "oracle"
        assert record.reference_energy == pytest.approx(1.0)
        assert (tmp_path / "out" / "path-sa.samples.csv").exists()
        assert (tmp_path / "out" / "path-sa.result.json").exists()

    def test_record_roundtrip(self, tmp_path):
        p = path_graph_file(tmp_path)
        m = RunManifest.make(
            "path", "mvc", "sa", problem_file=str(p),
            solver_params={"num_reads": 5, "sweeps": 50}, seed=1,
        )
        record = solve_manifest(m, tmp_path / "out")
        text = (tmp_path / "out" / "path-sa.result.json").read_text()
        assert ResultRecord.from_json(text) == record

    def test_replay_identical_samples(self, tmp_path):
        m = RunManifest.make(
            "g", "maxcut", "sa",
            problem_spec=GeneratorSpec.make("gnm", seed=5, n=12, m=20),
            solver_params={"num_reads": 8, "sweeps": 60},
            repetitions=3, seed=4,
        )
        solve_manifest(m, tmp_path / "a")
        solve_manifest(m, tmp_path / "b")
        assert (tmp_path / "a" / "g-sa.samples.csv").read_bytes() == (
            tmp_path / "b" / "g-sa.samples.csv"
        ).read_bytes()

    def test_thread_count_does_not_change_samples(self, tmp_path):
        m = RunManifest.make(
            "g", "maxcut", "pt",
            problem_spec=GeneratorSpec.make("gnm", seed=5, n=12, m=20),
            solver_params={"replicas": 4, "iterations": 400},
            repetitions=4, seed=4,
        )
        solve_manifest(m, tmp_path / "a", workers=1)
        solve_manifest(m, tmp_path / "b", workers=4)
        assert (tmp_path / "a" / "g-pt.samples.csv").read_bytes() == (
            tmp_path / "b" / "g-pt.samples.csv"
        ).read_bytes()

    def test_reference_from_file(self, tmp_path):
        p = path_graph_file(tmp_path)
        gt = tmp_path / "gt.json"
        write_ground_truth(
            gt,
            GroundTruth(instance="path", kind="mvc", value=1.0,
                        solution=(0, 1, 0), source="oracle"),
        )
        m = RunManifest.make(
            "path", "mvc", "sa", problem_file=str(p),
            solver_params={"num_reads": 4, "sweeps": 50},
            normalize=f"file:{gt}", seed=2,
        )
        record = solve_manifest(m, tmp_path / "out")
        assert record.reference_source == "file"
        assert record.summary.normalized_best == pytest.approx(1.0)

    def test_best_known_fallback_above_oracle_capacity(self, tmp_path):
        m = RunManifest.make(
            "big", "maxcut", "random",
            problem_spec=GeneratorSpec.make("gnm", seed=2, n=30, m=60),
            solver_params={"reads": 40}, seed=3,
        )
        record = solve_manifest(m, tmp_path / "out")
        assert record.reference_source == "best_known"
        assert record.reference_energy == pytest.approx(
            min(row[1] for row in record.samples)
        )

    def test_normalize_none(self, tmp_path):
        p = path_graph_file(tmp_path)
        m = RunManifest.make(
            "path", "mvc", "sa", problem_file=str(p),
            solver_params={"num_reads": 4, "sweeps": 50},
            normalize="none", seed=2,
        )
        record = solve_manifest(m, tmp_path / "out")
        assert record.reference_energy is None
        assert record.summary.normalized_best is None

    def test_qap_pt_feasible_near_oracle(self, tmp_path):
        inst = gen_tinyqap(5)
        p = tmp_path / "tiny5.dat"
        write_qap_dat(p, inst)
        m = RunManifest.make(
            "tiny5", "qap", "pt", problem_file=str(p),
            solver_params={"replicas": 8, "iterations": 20_000},
            seed=1,
        )
        record = solve_manifest(m, tmp_path / "out")
        assert record.summary.p_f > 0.0
        _, best = brute_force_qap(inst)
        assert record.summary.best_energy <= best * 1.05 + 1e-9


class TestOracle:
    def test_maxcut_triangle_value(self, tmp_path):
        p = triangle_file(tmp_path)
        m = RunManifest.make("triangle", "maxcut", "random", problem_file=str(p))
        out = tmp_path / "gt.json"
        record = oracle_ground_truth(m, out)
        assert record.value == pytest.approx(2.0)
        assert read_ground_truth(out) == record

    def test_qap_dat_uses_permutation_oracle(self, tmp_path):
        inst = gen_tinyqap(4)
        p = tmp_path / "tiny.dat"
        write_qap_dat(p, inst)
        m = RunManifest.make("tiny", "qap", "random", problem_file=str(p))
        record = oracle_ground_truth(m, tmp_path / "gt.json")
        want = min(
            qap_energy(inst, perm) for perm in itertools.permutations(range(4))
        )
        assert record.value == pytest.approx(want)
        assert sorted(record.solution) == [0, 1, 2, 3]


class TestReport:
    def _record_path(self, tmp_path, label="path", seed=1):
        p = path_graph_file(tmp_path)
        m = RunManifest.make(
            label, "mvc", "sa", problem_file=str(p),
            solver_params={"num_reads": 5, "sweeps": 50}, seed=seed,
        )
        solve_manifest(m, tmp_path / "out")
        return tmp_path / "out" / f"{label}-sa.result.json"

    def test_single_result_single_row(self, tmp_path):
        path = self._record_path(tmp_path)
        table = report_results([path])
        lines = table.strip().splitlines()
        assert len(lines) == 2
        assert lines[0].startswith("instance,solver,")
        assert lines[1].startswith("path,sa,")

    def test_triple_format(self, tmp_path):
        path = self._record_path(tmp_path)
        table = report_results([path])
        triple = table.strip().splitlines()[1].split(",")[-1]
        energy, seconds, pf = triple.split("/")
        assert float(energy) == 1.0
        assert float(seconds) >= 0.0
        assert pf == "1"

    def test_mixed_senses_rejected(self, tmp_path):
        mvc = self._record_path(tmp_path)
        t = triangle_file(tmp_path)
        m = RunManifest.make(
            "triangle", "maxcut", "sa", problem_file=str(t),
            solver_params={"num_reads": 5, "sweeps": 50}, seed=1,
        )
        solve_manifest(m, tmp_path / "out")
        cut = tmp_path / "out" / "triangle-sa.result.json"
        with pytest.raises(FormatError):
            report_results([mvc, cut])

    def test_tampered_summary_rejected(self, tmp_path):
        path = self._record_path(tmp_path)
        raw = json.loads(path.read_text())
        raw["summary"]["best_energy"] = 0.0
        path.write_text(json.dumps(raw, sort_keys=True))
        with pytest.raises(FormatError):
            report_results([path])

    def test_tampered_samples_csv_rejected(self, tmp_path):
        path = self._record_path(tmp_path)
        csv = path.parent / "path-sa.samples.csv"
        lines = csv.read_text().splitlines()
        parts = lines[1].split(",")
        parts[2] = "123.0"
        lines[1] = ",".join(parts)
        csv.write_text("\n".join(lines) + "\n")
        with pytest.raises(FormatError):
            report_results([path])

    def test_maxcut_reported_on_cut_scale(self, tmp_path):
        t = triangle_file(tmp_path)
        m = RunManifest.make(
            "triangle", "maxcut", "sa", problem_file=str(t),
            solver_params={"num_reads": 5, "sweeps": 50}, seed=1,
        )
        solve_manifest(m, tmp_path / "out")
        table = report_results([tmp_path / "out" / "triangle-sa.result.json"])
        row = table.strip().splitlines()[1].split(",")
        assert float(row[2]) == pytest.approx(2.0)


class TestGenerateFiles:
    def test_ladder_and_idempotence(self, tmp_path):
        specs = [
            GeneratorSpec.make("tinyqap", seed=1234, n=n) for n in range(3, 13)
        ]
        first = generate_files(specs, tmp_path / "d")
        assert len(first) == 10
        blobs = [p.read_bytes() for p in first]
        again = generate_files(specs, tmp_path / "d")
        assert [p.read_bytes() for p in again] == blobs
        assert read_provenance(first[0]).family == "tinyqap"


class TestWarehouseTable:
    def test_wh8_smoke(self, tmp_path):
        manifest = WarehouseManifest(
            label="wh8",
            dataset_spec=GeneratorSpec.make(
                "warehouse", seed=2, rows=4, columns=2, n_orders=30,
                lines_per_order=2, skew="pareto8020",
            ),
            k=1, repetitions=2, seed=7, oos_iterations=4000,
        )
        table = warehouse_table(manifest, out_dir=tmp_path)
        lines = table.strip().splitlines()
        assert lines[0] == "rep," + ",".join(POLICY_ORDER)
        assert len(lines[0].split(",")) == 6
        assert len(lines) == 4
        assert lines[-1].startswith("mean,")
        assert (tmp_path / "wh8.warehouse.csv").read_text() == table

    def test_deterministic(self, tmp_path):
        manifest = WarehouseManifest(
            label="wh8",
            dataset_spec=GeneratorSpec.make(
                "warehouse", seed=2, rows=4, columns=2, n_orders=20,
                lines_per_order=2,
            ),
            k=1, repetitions=1, seed=7, oos_iterations=2000,
        )
        assert warehouse_table(manifest) == warehouse_table(manifest)

    def test_manifest_roundtrip(self):
        manifest = WarehouseManifest(
            label="x",
            dataset_spec=GeneratorSpec.make(
                "warehouse", seed=1, rows=4, columns=2, n_orders=5,
                lines_per_order=2,
            ),
            k=2, repetitions=3, seed=5,
        )
        assert WarehouseManifest.from_json(manifest.to_json()) == manifest

    def test_source_validation(self):
        with pytest.raises(ParameterError):
            WarehouseManifest(label="x")


class TestCli:
    def test_gen_solve_report_pipeline(self, tmp_path, capsys):
        data = tmp_path / "data"
        out = tmp_path / "runs"
        assert main([
            "gen", "--family", "gnm", "--seed", "3",
            "--param", "n=12", "--param", "m=20", "--out", str(data),
        ]) == 0
        produced = capsys.readouterr().out.strip().splitlines()
        assert len(produced) == 1
        assert main([
            "solve", "--label", "g12", "--kind", "maxcut", "--solver", "sa",
            "--problem-file", produced[0],
            "--solver-param", "num_reads=5", "--solver-param", "sweeps=60",
            "--reps", "2", "--seed", "1", "--out", str(out),
        ]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["p_f"] == 100.0
        assert main([
            "report", str(out / "g12-sa.result.json"),
            "--out", str(tmp_path / "table.csv"),
        ]) == 0
        capsys.readouterr()
        table = (tmp_path / "table.csv").read_text()
        assert table.splitlines()[1].startswith("g12,sa,")

    def test_gen_ladder_counts(self, tmp_path, capsys):
        assert main([
            "gen", "--tinyqap-ladder", "3:12", "--out", str(tmp_path / "d"),
        ]) == 0
        assert len(capsys.readouterr().out.strip().splitlines()) == 10

    def test_gen_sweep_counts(self, tmp_path, capsys):
        assert main([
            "gen", "--gnm-sweep", "--out", str(tmp_path / "d"),
        ]) == 0
        assert len(capsys.readouterr().out.strip().splitlines()) == 32

    def test_oracle_command(self, tmp_path, capsys):
        t = triangle_file(tmp_path)
        gt = tmp_path / "gt.json"
        assert main([
            "oracle", "--label", "tri", "--kind", "maxcut",
            "--problem-file", str(t), "--out", str(gt),
        ]) == 0
        capsys.readouterr()
        assert read_ground_truth(gt).value == pytest.approx(2.0)

    def test_warehouse_command(self, tmp_path, capsys):
        assert main([
            "warehouse", "--label", "whsmoke", "--rows", "4", "--columns", "2",
            "--orders", "15", "--lines", "2", "--k", "1", "--reps", "1",
            "--seed", "3", "--oos-iterations", "2000",
            "--out", str(tmp_path),
        ]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "rep," + ",".join(POLICY_ORDER)

    def test_error_json_on_stderr(self, tmp_path, capsys):
        assert main([
            "solve", "--label", "x", "--kind", "mvc", "--solver", "sa",
            "--problem-file", str(tmp_path / "missing.clq"),
            "--out", str(tmp_path),
        ]) == 1
        err = json.loads(capsys.readouterr().err)
        assert "error" in err and "message" in err

    def test_bad_param_error(self, tmp_path, capsys):
        assert main([
            "gen", "--family", "gnm", "--param", "n12",
            "--out", str(tmp_path),
        ]) == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ParameterError"
