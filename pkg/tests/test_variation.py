import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from retne.genome import GenomeConfig, create, distance, mutable_cells, random_matrix
from retne.variation import (
    GOLDEN_MAJOR,
    GOLDEN_MINOR,
    MutationConfig,
    binary_combine,
    golden_combine,
    mutate_near,
)

CFG = GenomeConfig(n_inputs=2, n_outputs=1, max_nodes=10)
NULL_MUTATION = MutationConfig(
    perturb_sigma=0.5, perturb_prob=0.0, replace_prob=0.0, toggle_prob=0.0
)


def rand_individual(seed):
    return create(random_matrix(CFG, np.random.default_rng(seed)), CFG)


class TestMutationConfig:
    def test_rejects_bad_probabilities(self):
        with pytest.raises(ValueError):
            MutationConfig(perturb_prob=1.5)
        with pytest.raises(ValueError):
            MutationConfig(replace_prob=-0.1)

    def test_rejects_non_positive_sigma(self):
        with pytest.raises(ValueError):
            MutationConfig(perturb_sigma=0.0)


class TestMutateNear:
    def test_null_mutation_returns_identical_matrix(self):
        parent = rand_individual(0)
        child = mutate_near(parent, NULL_MUTATION, CFG, np.random.default_rng(1))
        assert np.array_equal(child.matrix, parent.matrix)

    def test_parent_is_unmodified(self):
        parent = rand_individual(1)
        before = parent.matrix.copy()
        mutate_near(parent, MutationConfig(), CFG, np.random.default_rng(2))
        assert np.array_equal(parent.matrix, before)

    def test_offspring_near_but_not_identical(self):
        # Children land closer to their parent than independent genomes do.
        rng = np.random.default_rng(42)
        mutation = MutationConfig()
        parent = rand_individual(7)
        child_dists, independent_dists = [], []
        for _ in range(100):
            child = mutate_near(parent, mutation, CFG, rng)
            child_dists.append(distance(parent.matrix, child.matrix))
            independent_dists.append(
                distance(random_matrix(CFG, rng), random_matrix(CFG, rng))
            )
        assert min(child_dists) > 0.0
        assert np.mean(child_dists) < np.mean(independent_dists)

    def test_dead_cells_survive_many_mutations(self):
        rng = np.random.default_rng(3)
        mutation = MutationConfig()
        ind = rand_individual(5)
        rows, cols, _ = mutable_cells(CFG)
        live = set(zip(rows.tolist(), cols.tolist()))
        for _ in range(1000):
            ind = mutate_near(ind, mutation, CFG, rng)
        for i in range(CFG.max_nodes):
            for j in range(CFG.max_nodes + 1):
                if (i, j) not in live:
                    assert ind.matrix[i, j] == 0.0

    def test_values_stay_clamped(self):
        rng = np.random.default_rng(8)
        mutation = MutationConfig(perturb_sigma=10.0)
        ind = rand_individual(9)
        rows, cols, is_weight = mutable_cells(CFG)
        for _ in range(200):
            ind = mutate_near(ind, mutation, CFG, rng)
            cells = ind.matrix[rows, cols]
            assert np.all(cells >= -5.0) and np.all(cells <= 5.0)

    def test_toggle_only_touches_weights(self):
        # With only toggling enabled, biases never change.
        rng = np.random.default_rng(4)
        mutation = MutationConfig(
            perturb_sigma=0.5, perturb_prob=0.0, replace_prob=0.0, toggle_prob=1.0
        )
        parent = rand_individual(11)
        child = mutate_near(parent, mutation, CFG, rng)
        rows, cols, is_weight = mutable_cells(CFG)
        bias_rows = rows[~is_weight]
        assert np.array_equal(child.matrix[bias_rows, 0], parent.matrix[bias_rows, 0])
        # and every weight flipped between zero and nonzero
        w_parent = parent.matrix[rows[is_weight], cols[is_weight]]
        w_child = child.matrix[rows[is_weight], cols[is_weight]]
        assert np.all((w_parent == 0.0) != (w_child == 0.0))


class TestCombiners:
    def test_golden_constants(self):
        assert GOLDEN_MAJOR == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-15)
        assert GOLDEN_MINOR == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-15)
        assert GOLDEN_MAJOR == pytest.approx(0.618034, abs=1e-6)
        assert GOLDEN_MINOR == pytest.approx(0.381966, abs=1e-6)
        assert abs(GOLDEN_MAJOR + GOLDEN_MINOR - 1.0) < 1e-12

    def test_binary_idempotent_on_equal_parents(self):
        f = random_matrix(CFG, np.random.default_rng(0))
        child = binary_combine(f, f, CFG)
        assert np.array_equal(child.matrix, f)

    def test_golden_identity_on_equal_parents(self):
        f = random_matrix(CFG, np.random.default_rng(1))
        child = golden_combine(f, f, CFG)
        assert np.allclose(child.matrix, f, atol=1e-12)

    def test_binary_elementwise_mean(self):
        rows, cols, _ = mutable_cells(CFG)
        a = np.zeros(CFG.shape)
        b = np.zeros(CFG.shape)
        b[rows, cols] = 4.0
        child = binary_combine(a, b, CFG)
        assert np.all(child.matrix[rows, cols] == 2.0)

    def test_golden_scalar_coefficients(self):
        a = np.zeros(CFG.shape)
        b = np.zeros(CFG.shape)
        a[0, 3] = 1.0
        first = golden_combine(a, b, CFG)
        assert first.matrix[0, 3] == pytest.approx(0.618034, abs=1e-6)
        second = golden_combine(b, a, CFG)
        assert second.matrix[0, 3] == pytest.approx(0.381966, abs=1e-6)

    def test_golden_is_order_sensitive(self):
        a = random_matrix(CFG, np.random.default_rng(2))
        b = random_matrix(CFG, np.random.default_rng(3))
        assert not np.array_equal(
            golden_combine(a, b, CFG).matrix, golden_combine(b, a, CFG).matrix
        )

    def test_midpoint_is_equidistant(self):
        a = random_matrix(CFG, np.random.default_rng(4))
        b = random_matrix(CFG, np.random.default_rng(5))
        child = binary_combine(a, b, CFG)
        assert distance(child.matrix, a) == pytest.approx(distance(child.matrix, b), abs=1e-9)

    @given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_offspring_inside_parent_hull(self, s1, s2):
        a = random_matrix(CFG, np.random.default_rng(s1))
        b = random_matrix(CFG, np.random.default_rng(s2))
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        for child in (binary_combine(a, b, CFG), golden_combine(a, b, CFG)):
            assert np.all(child.matrix >= lo - 1e-12)
            assert np.all(child.matrix <= hi + 1e-12)

    @given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_offspring_preserve_acyclicity(self, s1, s2):
        # create() inside the combiners validates the triangular constraint
        a = random_matrix(CFG, np.random.default_rng(s1))
        b = random_matrix(CFG, np.random.default_rng(s2))
        binary_combine(a, b, CFG)
        golden_combine(a, b, CFG)

    def test_dimension_mismatch(self):
        from retne.genome import InvalidGenomeError

        small = GenomeConfig(n_inputs=1, n_outputs=1, max_nodes=2)
        a = random_matrix(CFG, np.random.default_rng(6))
        b = random_matrix(small, np.random.default_rng(7))
        with pytest.raises(InvalidGenomeError):
            binary_combine(a, b, CFG)
