"""Tests for the QUBO container, evaluation, metrics, and text round-trip."""
from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qubokit.core import (
    BinarySample,
    MetricsSummary,
    QuboMatrix,
    SampleSet,
    delta_energy,
    energies,
    energy,
    pseudo_energy,
    qubo_from_text,
    qubo_to_text,
    summarize,
    violation_percentage,
)
from qubokit.errors import (
    DimensionError,
    DomainError,
    EmptyInputError,
    FormatError,
    ParameterError,
)


def naive_energy(q: QuboMatrix, x) -> float:
    """Independent evaluation: full double loop over the folded table."""
    total = q.offset
    for i in range(q.n):
        total += q.coeffs.get((i, i), 0.0) * x[i]
        for j in range(i + 1, q.n):
            total += q.coeffs.get((i, j), 0.0) * x[i] * x[j]
    return total


def random_qubo(rng: np.random.Generator, n: int, density: float = 0.7) -> QuboMatrix:
    coeffs = {}
    for i in range(n):
        if rng.random() < density:
            coeffs[(i, i)] = float(rng.uniform(-2, 2))
        for j in range(i + 1, n):
            if rng.random() < density:
                coeffs[(i, j)] = float(rng.uniform(-2, 2))
    return QuboMatrix(n=n, coeffs=coeffs, offset=float(rng.uniform(-1, 1)))


class TestQuboMatrix:
    def test_folds_lower_triangle_keys(self):
        q = QuboMatrix(n=3, coeffs={(1, 0): 2.0, (0, 1): 3.0, (2, 2): -1.0})
        assert q.coeffs == {(0, 1): 5.0, (2, 2): -1.0}

    def test_rejects_bad_index(self):
        with pytest.raises(DimensionError):
            QuboMatrix(n=2, coeffs={(0, 2): 1.0})

    def test_rejects_nonfinite(self):
        with pytest.raises(DomainError):
            QuboMatrix(n=2, coeffs={(0, 1): float("nan")})
        with pytest.raises(DomainError):
            QuboMatrix(n=2, coeffs={}, offset=float("inf"))

    def test_rejects_nonpositive_n(self):
        with pytest.raises(DimensionError):
            QuboMatrix(n=0, coeffs={})

    def test_explicit_zero_equals_absent(self):
        q1 = QuboMatrix(n=2, coeffs={(0, 1): 0.0, (0, 0): 1.0})
        q2 = QuboMatrix(n=2, coeffs={(0, 0): 1.0})
        for bits in itertools.product((0, 1), repeat=2):
            assert energy(q1, list(bits)) == energy(q2, list(bits))

    def test_kernel_arrays_shape(self):
        q = QuboMatrix(n=3, coeffs={(0, 1): 2.0, (1, 2): -1.0, (0, 0): 0.5})
        lin, indptr, indices, data = q.kernel_arrays()
        assert lin[0] == 0.5 and lin[1] == 0.0
        assert indptr[-1] == 4  # two pairs, stored symmetrically
        assert set(indices[indptr[0]:indptr[1]]) == {1}


class TestEnergy:
    def test_matches_naive_on_random_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            n = int(rng.integers(1, 9))
            q = random_qubo(rng, n)
            x = rng.integers(0, 2, n)
            assert energy(q, x) == pytest.approx(naive_energy(q, x), abs=1e-12)

    def test_empty_vector_energy_is_offset(self):
        q = QuboMatrix(n=4, coeffs={(0, 1): 5.0, (2, 2): 3.0}, offset=1.5)
        assert energy(q, [0, 0, 0, 0]) == pytest.approx(1.5)

    def test_length_mismatch(self):
        q = QuboMatrix(n=3, coeffs={})
        with pytest.raises(DimensionError):
            energy(q, [0, 1])

    def test_nonbinary_entry(self):
        q = QuboMatrix(n=2, coeffs={})
        with pytest.raises(DomainError):
            energy(q, [0, 2])

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(3)
        q = random_qubo(rng, 6)
        xs = rng.integers(0, 2, (20, 6))
        batch = energies(q, xs)
        for row, e in zip(xs, batch):
            assert e == pytest.approx(energy(q, row), abs=1e-12)


class TestDeltaEnergy:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1), st.integers(2, 32))
    def test_matches_full_recompute(self, seed, n):
        rng = np.random.default_rng(seed)
        q = random_qubo(rng, n, density=0.5)
        x = rng.integers(0, 2, n)
        k = int(rng.integers(0, n))
        y = x.copy()
        y[k] = 1 - y[k]
        assert delta_energy(q, x, k) == pytest.approx(
            energy(q, y) - energy(q, x), abs=1e-9
        )

    def test_index_out_of_range(self):
        q = QuboMatrix(n=2, coeffs={})
        with pytest.raises(DimensionError):
            delta_energy(q, [0, 0], 2)


class TestMetrics:
    def test_violation_percentage_basic(self):
        assert violation_percentage(0, 10) == 0.0
        assert violation_percentage(3, 12) == pytest.approx(25.0)
        assert violation_percentage(10, 10) == pytest.approx(100.0)

    def test_violation_percentage_domain(self):
        with pytest.raises(DomainError):
            violation_percentage(1, 0)
        with pytest.raises(DomainError):
            violation_percentage(5, 3)
        with pytest.raises(DomainError):
            violation_percentage(-1, 3)

    def test_pseudo_energy_is_sum(self):
        assert pseudo_energy(3.0, 4.5) == pytest.approx(7.5)
        assert pseudo_energy(-2.0, 0.0) == pytest.approx(-2.0)

    def _sample(self, bits, e, feasible, violations=0):
        return BinarySample(
            bits=np.array(bits, dtype=np.uint8),
            energy=e,
            feasible=feasible,
            violations=violations,
        )

    def test_summarize_hand_value(self):
        s = SampleSet(
            samples=(
                self._sample([0, 1], 2.0, True),
                self._sample([1, 1], 4.0, True),
                self._sample([0, 0], -1.0, False, violations=2),
            ),
            solver="t",
            solve_seconds=0.1,
            total_constraints=4,
        )
        m = summarize(s)
        assert m.mean_energy == pytest.approx(3.0)
        assert m.best_energy == pytest.approx(2.0)
        assert m.std_energy == pytest.approx(1.0)
        assert m.p_f == pytest.approx(100.0 * 2 / 3)
        assert m.mean_violation_pct == pytest.approx(100.0 * (0 + 0 + 50.0) / 3 / 100)
        assert not m.none_feasible

    def test_summarize_max_sense(self):
        s = SampleSet(
            samples=(self._sample([0], 2.0, True), self._sample([1], 5.0, True)),
        )
        m = summarize(s, sense="max")
        assert m.best_energy == pytest.approx(5.0)

    def test_summarize_none_feasible_flag(self):
        s = SampleSet(samples=(self._sample([0], 2.0, False, 0),))
        m = summarize(s)
        assert m.none_feasible
        assert m.p_f == 0.0
        assert m.best_energy == pytest.approx(2.0)

    def test_summarize_empty_errors(self):
        with pytest.raises(EmptyInputError):
            summarize(SampleSet(samples=()))

    def test_summarize_normalization(self):
        s = SampleSet(samples=(self._sample([0], 3.0, True),))
        m = summarize(s, reference_energy=2.0)
        assert m.normalized_mean == pytest.approx(1.5)
        assert m.normalized_best == pytest.approx(1.5)
        with pytest.raises(ParameterError):
            summarize(s, reference_energy=0.0)

    def test_best_energy_bound_for_min(self):
        rng = np.random.default_rng(11)
        samples = tuple(
            self._sample([int(b) for b in np.binary_repr(i, 3)], float(e), True)
            for i, e in enumerate(rng.normal(size=8))
        )
        m = summarize(SampleSet(samples=samples))
        assert m.best_energy <= m.mean_energy


class TestSampleSet:
    def test_mixed_lengths_rejected(self):
        a = BinarySample(bits=np.array([0, 1], dtype=np.uint8), energy=0.0)
        b = BinarySample(bits=np.array([0], dtype=np.uint8), energy=0.0)
        with pytest.raises(DimensionError):
            SampleSet(samples=(a, b))

    def test_best_prefers_feasible(self):
        a = BinarySample(bits=np.array([0], dtype=np.uint8), energy=-5.0, feasible=False)
        b = BinarySample(bits=np.array([1], dtype=np.uint8), energy=1.0, feasible=True)
        s = SampleSet(samples=(a, b))
        assert s.best().energy == pytest.approx(1.0)


class TestSerialization:
    def test_round_trip_bit_identical(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            q = random_qubo(rng, int(rng.integers(1, 12)))
            r = qubo_from_text(qubo_to_text(q))
            assert r.n == q.n
            assert r.offset == q.offset
            assert r.coeffs == q.coeffs

    def test_known_layout(self):
        q = QuboMatrix(n=2, coeffs={(0, 1): 1.5, (0, 0): -2.0}, offset=0.25)
        text = qubo_to_text(q)
        lines = text.strip().splitlines()
        assert lines[0] == "n 2 offset 0.25"
        assert lines[1] == "0 0 -2.0"
        assert lines[2] == "0 1 1.5"

    def test_parser_rejects_bad_header(self):
        with pytest.raises(FormatError):
            qubo_from_text("m 2 offset 0.0\n")

    def test_parser_rejects_duplicate_pair(self):
        with pytest.raises(FormatError):
            qubo_from_text("n 2 offset 0.0\n0 1 1.0\n1 0 2.0\n")

    def test_parser_skips_comments(self):
        q = qubo_from_text("# provenance\nn 2 offset 0.0\n0 1 3.0\n")
        assert q.coeffs == {(0, 1): 3.0}
