"""Tests for graph and assignment formulations against enumeration oracles."""
from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qubokit.core import QuboMatrix, energies, energy
from qubokit.errors import (
    DimensionError,
    DomainError,
    EmptyInputError,
    ParameterError,
)
from qubokit.formulations import (
    QapInstance,
    QuboProblem,
    WeightedGraph,
    a_to_q,
    decode_permutation,
    find_index,
    maxcut_to_qubo,
    mvc_to_qubo,
    mvc_violations,
    permutation_to_bits,
    prepare_matrix_a,
    prepare_vector_b,
    qap_energy,
    qap_objective_qubo,
    qap_to_qubo,
    qap_violations,
)


def all_bit_vectors(n: int) -> np.ndarray:
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.uint8)


def random_graph(rng: np.random.Generator, n: int, m: int) -> WeightedGraph:
    pairs = list(itertools.combinations(range(n), 2))
    idx = rng.choice(len(pairs), size=min(m, len(pairs)), replace=False)
    edges = tuple((pairs[i][0], pairs[i][1], 1.0) for i in sorted(idx))
    return WeightedGraph(node_count=n, edges=edges)


def random_qap(rng: np.random.Generator, n: int) -> QapInstance:
    pts = rng.random((n, 2))
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    m = rng.random((n, n))
    flow = (m + m.T) / 2.0
    np.fill_diagonal(flow, 0.0)
    return QapInstance(flow=flow, dist=dist)


class TestWeightedGraph:
    def test_normalizes_and_validates(self):
        g = WeightedGraph(node_count=3, edges=((2, 0, 1.5),))
        assert g.edges == ((0, 2, 1.5),)
        with pytest.raises(DomainError):
            WeightedGraph(node_count=3, edges=((0, 0, 1.0),))
        with pytest.raises(DomainError):
            WeightedGraph(node_count=3, edges=((0, 1, 1.0), (1, 0, 2.0)))
        with pytest.raises(DomainError):
            WeightedGraph(node_count=3, edges=((0, 1, 0.0),))
        with pytest.raises(DimensionError):
            WeightedGraph(node_count=2, edges=((0, 2, 1.0),))

    def test_degrees(self):
        g = WeightedGraph(node_count=4, edges=((0, 1, 1.0), (1, 2, 1.0)))
        assert g.degrees().tolist() == [1, 2, 1, 0]
        assert g.max_degree() == 2


class TestMaxCut:
    def cut_weight(self, g: WeightedGraph, bits) -> float:
        return sum(w for u, v, w in g.edges if bits[u] != bits[v])

    def test_negated_energy_is_cut_weight_exhaustive(self):
        rng = np.random.default_rng(42)
        for _ in range(15):
            n = int(rng.integers(2, 8))
            g = random_graph(rng, n, int(rng.integers(1, n * (n - 1) // 2 + 1)))
            if g.edge_count == 0:
                continue
            prob = maxcut_to_qubo(g)
            assert prob.sense == "max"
            assert prob.total_constraints == 0
            for bits in all_bit_vectors(n):
                assert -energy(prob.qubo, bits) == pytest.approx(
                    self.cut_weight(g, bits), abs=1e-12
                )

    def test_weighted_triangle_optimum(self):
        g = WeightedGraph(
            node_count=3, edges=((0, 1, 1.0), (0, 2, 2.0), (1, 2, 3.0))
        )
        prob = maxcut_to_qubo(g)
        xs = all_bit_vectors(3)
        cuts = -energies(prob.qubo, xs)
        assert cuts.max() == pytest.approx(5.0)
        best = xs[int(np.argmax(cuts))]
        assert self.cut_weight(g, best) == pytest.approx(5.0)

    def test_negative_weights_accepted(self):
        g = WeightedGraph(node_count=2, edges=((0, 1, -1.0),))
        prob = maxcut_to_qubo(g)
        assert -energy(prob.qubo, [0, 1]) == pytest.approx(-1.0)

    def test_empty_graph_rejected(self):
        g = WeightedGraph(node_count=3, edges=())
        with pytest.raises(EmptyInputError):
            maxcut_to_qubo(g)

    def test_objective_and_decode(self):
        g = WeightedGraph(node_count=3, edges=((0, 1, 1.0), (1, 2, 1.0)))
        prob = maxcut_to_qubo(g)
        x = np.array([0, 1, 0], dtype=np.uint8)
        assert prob.objective(x) == pytest.approx(2.0)
        left, right = prob.decode(x)
        assert left.tolist() == [0, 2] and right.tolist() == [1]


class TestVertexCover:
    def min_cover_size(self, g: WeightedGraph) -> int:
        best = g.node_count
        for bits in all_bit_vectors(g.node_count):
            if mvc_violations(g, bits) == 0:
                best = min(best, int(bits.sum()))
        return best

    def test_minimizers_are_minimum_covers(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            n = int(rng.integers(3, 9))
            g = random_graph(rng, n, int(rng.integers(n, n * (n - 1) // 2 + 1)))
            if g.max_degree() < 2:
                continue
            prob = mvc_to_qubo(g, alpha="auto")
            xs = all_bit_vectors(n)
            es = energies(prob.qubo, xs)
            opt = self.min_cover_size(g)
            assert es.min() == pytest.approx(opt, abs=1e-9)
            for x in xs[np.isclose(es, es.min(), atol=1e-9)]:
                assert mvc_violations(g, x) == 0
                assert int(x.sum()) == opt

    def test_alpha_one_is_rejected(self):
        g = WeightedGraph(node_count=2, edges=((0, 1, 1.0),))
        with pytest.raises(ParameterError):
            mvc_to_qubo(g, alpha=1.0)

    def test_alpha_auto_is_max_degree(self):
        g = WeightedGraph(
            node_count=4, edges=((0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0))
        )
        prob = mvc_to_qubo(g)
        assert prob.alpha == 3.0
        assert prob.total_constraints == 3

    def test_energy_splits_into_objective_plus_penalty(self):
        rng = np.random.default_rng(17)
        g = random_graph(rng, 7, 10)
        prob = mvc_to_qubo(g, alpha=4.0)
        for bits in all_bit_vectors(7)[:: 5]:
            total = energy(prob.qubo, bits)
            assert total == pytest.approx(
                prob.objective(bits) + prob.penalty_energy(bits), abs=1e-9
            )
            assert prob.penalty_energy(bits) == pytest.approx(
                4.0 * mvc_violations(g, bits)
            )

    def test_violations_counts_uncovered_edges(self):
        g = WeightedGraph(node_count=3, edges=((0, 1, 1.0), (1, 2, 1.0)))
        assert mvc_violations(g, np.array([0, 0, 0])) == 2
        assert mvc_violations(g, np.array([0, 1, 0])) == 0
        assert mvc_violations(g, np.array([1, 0, 0])) == 1


class TestFindIndex:
    def test_row_major_bijection(self):
        n = 5
        seen = set()
        for i in range(n):
            for k in range(n):
                v = find_index(i, k, n)
                assert v == i * n + k
                seen.add(v)
        assert seen == set(range(n * n))

    def test_bounds(self):
        with pytest.raises(DimensionError):
            find_index(0, 3, 3)
        with pytest.raises(DimensionError):
            find_index(-1, 0, 3)


class TestQapObjective:
    def quadruple_sum(self, inst: QapInstance, bits: np.ndarray) -> float:
        n = inst.n
        m = bits.reshape(n, n)
        total = 0.0
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for ell in range(n):
                        total += inst.flow[i, j] * inst.dist[k, ell] * m[i, k] * m[j, ell]
        return total

    def test_matches_quadruple_sum_on_arbitrary_bits(self):
        rng = np.random.default_rng(23)
        for n in (2, 3):
            inst = random_qap(rng, n)
            q = qap_objective_qubo(inst)
            assert q.n == n * n
            for bits in all_bit_vectors(n * n)[:: max(1, 2 ** (n * n) // 40)]:
                assert energy(q, bits) == pytest.approx(
                    self.quadruple_sum(inst, bits), abs=1e-9
                )

    def test_permutation_energy_matches(self):
        rng = np.random.default_rng(31)
        inst = random_qap(rng, 4)
        q = qap_objective_qubo(inst)
        for perm in itertools.permutations(range(4)):
            bits = permutation_to_bits(perm)
            assert energy(q, bits) == pytest.approx(
                qap_energy(inst, perm), abs=1e-9
            )

    def test_flow_validation(self):
        with pytest.raises(DomainError):
            QapInstance(flow=np.array([[0.0, 1.0], [2.0, 0.0]]), dist=np.zeros((2, 2)))
        with pytest.raises(DimensionError):
            QapInstance(flow=np.zeros((2, 2)), dist=np.zeros((3, 3)))

    def test_flow_diagonal_prices_positions(self):
        # Self-flow weights the distance diagonal: facility 0 carries weight
        # 3, so parking it at the location with diagonal cost 10 instead of 2
        # raises the objective by 3 * (10 - 2) on an otherwise flat instance.
        flow = np.array([[3.0, 0.0], [0.0, 1.0]])
        dist = np.array([[2.0, 5.0], [5.0, 10.0]])
        inst = QapInstance(flow=flow, dist=dist)
        near = qap_energy(inst, [0, 1])
        far = qap_energy(inst, [1, 0])
        assert near == pytest.approx(3.0 * 2.0 + 1.0 * 10.0)
        assert far == pytest.approx(3.0 * 10.0 + 1.0 * 2.0)
        for perm in ([0, 1], [1, 0]):
            bits = permutation_to_bits(perm)
            q = qap_objective_qubo(inst)
            assert energy(q, bits) == pytest.approx(qap_energy(inst, perm))


class TestConstraintSystem:
    def test_structure_small(self):
        a = prepare_matrix_a(2)
        b = prepare_vector_b(2)
        assert a.shape == (4, 4) and b.shape == (4,)
        # Row constraints for facilities 0 and 1, then column constraints.
        assert a[0].tolist() == [1, 1, 0, 0]
        assert a[1].tolist() == [0, 0, 1, 1]
        assert a[2].tolist() == [1, 0, 1, 0]
        assert a[3].tolist() == [0, 1, 0, 1]
        assert b.tolist() == [1, 1, 1, 1]

    def test_single_facility_duplicates_row(self):
        a = prepare_matrix_a(1)
        b = prepare_vector_b(1)
        assert a.shape == (2, 1)
        assert a.tolist() == [[1.0], [1.0]]
        assert b.tolist() == [1.0, 1.0]

    def test_exactly_2n_nonzero_rows(self):
        for n in (2, 3, 5):
            a = prepare_matrix_a(n)
            nonzero_rows = int((np.abs(a).sum(axis=1) > 0).sum())
            assert nonzero_rows == 2 * n
            assert prepare_vector_b(n).sum() == 2 * n

    def test_ax_equals_b_iff_permutation(self):
        n = 3
        a = prepare_matrix_a(n)
        b = prepare_vector_b(n)
        perms = {tuple(permutation_to_bits(p)) for p in itertools.permutations(range(n))}
        for bits in all_bit_vectors(n * n):
            satisfied = np.array_equal(a @ bits, b)
            assert satisfied == (tuple(bits) in perms)


class TestAToQ:
    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(min_value=1, max_value=5),
        st.floats(min_value=0.5, max_value=1e4),
        st.integers(min_value=0, max_value=2**31 - 1),
    )
    def test_residual_identity(self, n, penalty, seed):
        a = prepare_matrix_a(n)
        b = prepare_vector_b(n)
        q = a_to_q(a, b, penalty)
        rng = np.random.default_rng(seed)
        for _ in range(25):
            x = rng.integers(0, 2, n * n)
            resid = a @ x - b
            lhs = energy(q, x)
            rhs = penalty * float(resid @ resid)
            assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)

    def test_diag_btA_is_twice_penalty(self):
        n = 4
        p = 7.0
        a = prepare_matrix_a(n) * np.sqrt(p)
        b = prepare_vector_b(n) * np.sqrt(p)
        np.testing.assert_allclose(b @ a, np.full(n * n, 2.0 * p))

    def test_offset_is_2n_penalty(self):
        for n in (1, 2, 4):
            q = a_to_q(prepare_matrix_a(n), prepare_vector_b(n), 3.0)
            assert q.offset == pytest.approx(2 * n * 3.0)

    def test_zero_on_permutations_positive_elsewhere(self):
        n = 3
        q = a_to_q(prepare_matrix_a(n), prepare_vector_b(n), 2.5)
        perms = {tuple(permutation_to_bits(p)) for p in itertools.permutations(range(n))}
        for bits in all_bit_vectors(n * n):
            e = energy(q, bits)
            if tuple(bits) in perms:
                assert e == pytest.approx(0.0, abs=1e-9)
            else:
                assert e > 0.5

    def test_penalty_must_be_positive(self):
        with pytest.raises(ParameterError):
            a_to_q(prepare_matrix_a(2), prepare_vector_b(2), 0.0)


class TestQapToQubo:
    def test_auto_penalty_minimizer_set_matches_feasible_optima(self):
        rng = np.random.default_rng(1234)
        for n in (3, 4):
            for _ in range(3):
                inst = random_qap(rng, n)
                prob = qap_to_qubo(inst, penalty="auto")
                assert prob.penalty == pytest.approx(
                    n * np.abs(inst.flow).max() * np.abs(inst.dist).max()
                )
                xs = all_bit_vectors(n * n)
                es = energies(prob.qubo, xs)
                perm_energies = {
                    perm: qap_energy(inst, perm)
                    for perm in itertools.permutations(range(n))
                }
                opt = min(perm_energies.values())
                scale = max(1.0, abs(opt))
                minimizers = {
                    tuple(x) for x in xs[np.isclose(es, es.min(), atol=1e-9 * scale)]
                }
                expected = {
                    tuple(permutation_to_bits(p))
                    for p, e in perm_energies.items()
                    if abs(e - opt) <= 1e-9 * scale
                }
                assert es.min() == pytest.approx(opt, rel=1e-12, abs=1e-9)
                assert minimizers == expected

    def test_feasible_energy_equals_assignment_cost(self):
        rng = np.random.default_rng(5)
        inst = random_qap(rng, 4)
        prob = qap_to_qubo(inst)
        for perm in itertools.permutations(range(4)):
            bits = permutation_to_bits(perm)
            assert prob.feasible(bits)
            assert prob.energy(bits) == pytest.approx(
                qap_energy(inst, perm), abs=1e-9
            )
            assert prob.objective(bits) == pytest.approx(
                qap_energy(inst, perm), abs=1e-9
            )

    def test_violations_and_penalty_split(self):
        rng = np.random.default_rng(8)
        inst = random_qap(rng, 3)
        prob = qap_to_qubo(inst, penalty=50.0)
        x = np.zeros(9, dtype=np.uint8)
        assert qap_violations(3, x) == 6
        assert not prob.feasible(x)
        x2 = permutation_to_bits([1, 0, 2])
        x2 = x2.copy()
        x2[0] = 1  # facility 0 now in two locations
        assert qap_violations(3, x2) == 2  # one row and one column break
        assert prob.energy(x2) == pytest.approx(
            prob.objective(x2) + prob.penalty_energy(x2), abs=1e-9
        )

    def test_single_facility(self):
        inst = QapInstance(flow=np.zeros((1, 1)), dist=np.array([[3.0]]))
        prob = qap_to_qubo(inst, penalty=2.0)
        assert prob.energy(np.array([1])) == pytest.approx(0.0)
        assert prob.energy(np.array([0])) == pytest.approx(2.0 * 2.0)


class TestDecode:
    def test_round_trip(self):
        rng = np.random.default_rng(2)
        for n in (1, 2, 5):
            perm = rng.permutation(n)
            bits = permutation_to_bits(perm)
            out = decode_permutation(bits, n)
            assert out is not None and out.tolist() == perm.tolist()

    def test_invalid_returns_none(self):
        assert decode_permutation(np.zeros(4, dtype=np.uint8), 2) is None
        assert decode_permutation(np.ones(4, dtype=np.uint8), 2) is None

    def test_qap_energy_rejects_non_permutation(self):
        inst = QapInstance(flow=np.zeros((2, 2)), dist=np.zeros((2, 2)))
        with pytest.raises(DomainError):
            qap_energy(inst, [0, 0])
