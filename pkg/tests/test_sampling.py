import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphon_steady.errors import ValidationError
from graphon_steady.kernels import Bipartite, Constant, SmallWorld, step_from_matrix
from graphon_steady.sampling import (SampledGraph, cut_distance, degree_deviation, edge_uniforms,
                                     sample_bipartite_aligned, sample_deterministic, sample_random)

SW = SmallWorld(0.2, 1 / (0.4 * math.pi), 0.0)


def test_deterministic_examples():
    g = sample_deterministic(Constant(0.5), 3)
    assert np.all(g.adjacency == 0.5)
    g = sample_deterministic(SW, 10)
    assert g.adjacency[0, 1] == pytest.approx(1 / (0.4 * math.pi))
    np.testing.assert_array_equal(g.grid_points, np.arange(10) / 10)
    np.testing.assert_array_equal(g.adjacency, SW.matrix(g.grid_points))


def test_random_trivial_probabilities():
    assert not np.any(sample_random(Constant(0.0), 7, 3).adjacency)
    A = sample_random(Constant(1.0), 5, 3).adjacency
    assert np.all(A == 1 - np.eye(5))


def test_random_density_binomial():
    n = 1000
    A = sample_random(Constant(0.5), n, 1).adjacency
    m = n * (n - 1) / 2
    density = np.triu(A, 1).sum() / m
    assert abs(density - 0.5) <= 3 * 0.5 / math.sqrt(m)


@settings(max_examples=20)
@given(st.integers(1, 40), st.integers(-(2**63), 2**64 - 1))
def test_random_invariants_and_determinism(n, seed):
    g = sample_random(SW, n, seed)
    A = g.adjacency
    assert np.array_equal(A, A.T)
    assert set(np.unique(A)) <= {0.0, 1.0}
    assert not np.any(np.diag(A))
    assert np.array_equal(A, sample_random(SW, n, seed).adjacency)


def test_edge_draws_independent_of_n():
    small, big = edge_uniforms(42, 10), edge_uniforms(42, 25)
    np.testing.assert_array_equal(small, big[:10, :10])


def test_bipartite_aligned_examples():
    g = sample_bipartite_aligned(0.3, 0.5, 10, 1)
    assert g.meta["n1"] == 3
    A = g.adjacency
    assert not A[:3, :3].any() and not A[3:, 3:].any()
    np.testing.assert_allclose(g.grid_points[:3], 0.3 * np.arange(3) / 3)
    np.testing.assert_allclose(g.grid_points[3:], 0.3 + 0.7 * np.arange(7) / 7)
    g = sample_bipartite_aligned(0.3, 0.5, 200, 7)
    n1 = g.meta["n1"]
    cross = g.adjacency[:n1, n1:]
    assert abs(cross.mean() - 0.5) <= 3 * 0.5 / math.sqrt(cross.size)
    with pytest.raises(ValidationError):
        sample_bipartite_aligned(0.05, 0.5, 10, 1)


@settings(max_examples=15)
@given(st.floats(0.1, 0.9), st.integers(10, 60), st.integers(0, 1000))
def test_bipartite_never_intra_block(alpha, n, seed):
    g = sample_bipartite_aligned(alpha, 0.8, n, seed)
    n1 = g.meta["n1"]
    assert not g.adjacency[:n1, :n1].any() and not g.adjacency[n1:, n1:].any()


def test_sampled_graph_validation():
    with pytest.raises(ValidationError):
        SampledGraph(np.array([[0, 1], [0, 0.0]]), "Deterministic", "x", np.array([0, 0.5]))
    with pytest.raises(ValidationError):
        SampledGraph(np.eye(2), "Random", "x", np.array([0, 0.5]))
    with pytest.raises(ValidationError):
        SampledGraph(np.zeros((2, 2)), "Other", "x", np.array([0, 0.5]))


def test_degree_deviation_deterministic_constant():
    g = sample_deterministic(Constant(0.4), 50)
    assert degree_deviation(g, Constant(0.4)) <= 0.4 / 50 + 1e-15


def test_degree_deviation_rate():
    kernel = Constant(0.5)
    ns = (100, 400, 1600)
    med = [np.median([degree_deviation(sample_random(kernel, n, s), kernel) for s in range(20)]) for n in ns]
    slope = np.polyfit(np.log(ns), np.log(med), 1)[0]
    assert abs(slope + 0.5) <= 0.15


def test_bipartite_aligned_degree_deviation_decreases():
    kernel = Bipartite(0.3, 0.5)
    med = [np.median([degree_deviation(sample_bipartite_aligned(0.3, 0.5, n, s), kernel, sup_over_cells=True)
                      for s in range(10)]) for n in (50, 100, 200, 400)]
    assert all(a >= b for a, b in zip(med, med[1:]))


def test_bipartite_naive_grid_keeps_offset():
    # alpha * n is not an integer, so alpha falls strictly inside a cell of the uniform grid
    kernel = Bipartite(0.3, 0.5)
    naive = sample_deterministic(kernel, 15)
    aligned = sample_bipartite_aligned(0.3, 0.5, 15, 0)
    off = degree_deviation(naive, kernel, sup_over_cells=True)
    assert off >= 0.5 * abs(1 - 2 * 0.3) * 0.9
    assert degree_deviation(aligned, kernel, sup_over_cells=True) < off
    big = degree_deviation(sample_deterministic(kernel, 151), kernel, sup_over_cells=True)
    assert big >= 0.5 * abs(1 - 2 * 0.3) * 0.9


def test_cut_distance_zero_for_matching_step():
    rng = np.random.default_rng(0)
    B = rng.random((8, 8))
    step = step_from_matrix((B + B.T) / 2)
    est = cut_distance(sample_deterministic(step, 8), step, refinement=3)
    assert est.value == 0.0


def test_cut_distance_deterministic_converges():
    # alpha * n integral, so band edges fall on cell boundaries
    med = []
    for n in (10, 20, 40, 80):
        med.append(cut_distance(sample_deterministic(SW, n), SW, refinement=4).value)
    assert all(a >= b for a, b in zip(med, med[1:]))


def test_cut_distance_aligned_bipartite_uses_cell_widths():
    kernel = Bipartite(0.3, 0.5)
    g = sample_bipartite_aligned(0.3, 0.5, 40, 2)
    est = cut_distance(g, kernel, refinement=2)
    assert 0 < est.value <= 22 / math.sqrt(math.log(40))


def test_manifest_fields():
    g = sample_random(Constant(0.5), 6, 9)
    m = g.manifest()
    assert m == {"kernel_id": "constant(p=0.5)", "n": 6, "seed": 9, "mode": "Random"}
