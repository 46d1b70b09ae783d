import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphon_steady.errors import HypothesisViolation, ShapeError
from graphon_steady.grid import ContinuumState, GridFunction, uniform_grid
from graphon_steady.kernels import Bipartite, Constant, SmallWorld, step_from_matrix
from graphon_steady.models import (continuum_state, kuramoto, linear_model, lotka_volterra, twisted_profile,
                                   wc_homogeneous_roots, wilson_cowan)
from graphon_steady.operators import (discrete_jacobian, eta_bound, eval_F, eval_Gn, frozen_jacobian, q_function,
                                      qn_function, xi_opnorm_estimate)
from graphon_steady.sampling import SampledGraph, sample_deterministic, sample_random

SW = SmallWorld(0.2, 1 / (0.4 * math.pi), 0.0)
C = SW.fourier_coefficients(8)
CASES = [
    (kuramoto(), SW, twisted_profile(1)),
    (wilson_cowan(1, 1, 1), Constant(0.5), None),
    (lotka_volterra(1.0), Constant(0.5), None),
    (lotka_volterra(1.0, cooperative=True), Bipartite(0.3, 0.5), None),
]


def state(model, kernel, u):
    return u if u is not None else continuum_state(model, kernel)


def const_state(c):
    return ContinuumState(lambda x: np.full(np.shape(x), c))


def test_twisted_state_residual():
    out = eval_F(kuramoto(), SW, twisted_profile(2), grid=256)
    assert np.abs(out.values).max() <= 1e-8


def test_eval_F_examples():
    lv = lotka_volterra(1.0)
    out = eval_F(lv, Constant(0.5), GridFunction(np.full(20, 2 / 3)))
    assert np.abs(out.values).max() <= 1e-12
    zero = linear_model(-0.7, 0.0)
    u = GridFunction(np.linspace(-1, 2, 9))
    np.testing.assert_allclose(eval_F(zero, SW, u).values, -0.7 * u.values, atol=1e-15)


def test_eval_F_bipartite_lv_residual():
    model = lotka_volterra(1.0, cooperative=True)
    kernel = Bipartite(0.3, 0.5)
    u = continuum_state(model, kernel)
    assert np.abs(eval_F(model, kernel, u, grid=50).values).max() <= 1e-12


def test_eval_Gn_matches_step_kernel():
    rng = np.random.default_rng(0)
    B = rng.random((12, 12))
    step = step_from_matrix((B + B.T) / 2)
    g = sample_deterministic(step, 12)
    u = rng.random(12)
    for model, _, _ in CASES:
        np.testing.assert_allclose(eval_Gn(model, g, u), eval_F(model, step, GridFunction(u, g.grid_points)).values,
                                   atol=1e-14)


def test_eval_Gn_examples():
    g = sample_random(SW, 30, 1)
    # separable evaluation leaves rounding only
    assert np.abs(eval_Gn(kuramoto(), g, np.full(30, 0.37))).max() <= 1e-15
    wc = wilson_cowan(1, 1, 1)
    u = wc_homogeneous_roots(0.5, 1, 1, 1)[0][0]
    A = np.full((25, 25), 0.5)
    half = SampledGraph(A, "Deterministic", "constant(p=0.5)", uniform_grid(25))
    assert np.abs(eval_Gn(wc, half, np.full(25, u))).max() <= 1e-6
    with pytest.raises(ShapeError):
        eval_Gn(wc, half, np.zeros(3))


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.floats(-3, 3))
def test_kuramoto_translation_invariance(seed, c):
    g = sample_random(SW, 20, seed)
    u = np.random.default_rng(seed).random(20)
    np.testing.assert_allclose(eval_Gn(kuramoto(), g, u + c), eval_Gn(kuramoto(), g, u), atol=1e-12)


def test_q_function_examples():
    for m in (1, 2, 3):
        q = q_function(kuramoto(), SW, twisted_profile(m), grid=32)
        np.testing.assert_allclose(q.values.values, 2 * math.pi * C[m], atol=1e-12)
    q = q_function(lotka_volterra(2.0), Constant(0.3), const_state(1 / 1.6), grid=8)
    np.testing.assert_allclose(q.values.values, 1 / 1.6, atol=1e-14)
    q = q_function(wilson_cowan(22, 4, 1), Constant(0.5), const_state(0.25), grid=8)
    assert np.all(q.values.values == 1.0)


@pytest.mark.parametrize("case", CASES, ids=lambda c: c[0].model_id)
def test_q_positive_at_closed_form_states(case):
    model, kernel, u = case
    assert q_function(model, kernel, state(model, kernel, u), grid=40).positive


def test_qn_examples():
    wc = wilson_cowan(1, 1, 1)
    g = sample_random(Constant(0.5), 15, 2)
    assert np.all(qn_function(wc, g, np.random.default_rng(0).random(15)) == 1.0)
    g = sample_deterministic(SW, 512)
    qn = qn_function(kuramoto(), g, twisted_profile(2).sample(512).values)
    assert np.abs(qn - 2 * math.pi * C[2]).max() <= 0.05
    empty = SampledGraph(np.zeros((6, 6)), "Random", "x", uniform_grid(6))
    u = np.linspace(0, 1, 6)
    np.testing.assert_allclose(qn_function(lotka_volterra(1.0), empty, u), -(1 - 2 * u))


@pytest.mark.parametrize("case", CASES, ids=lambda c: c[0].model_id)
@pytest.mark.parametrize("n", [16, 64])
def test_discrete_jacobian_matches_finite_differences(case, n):
    model, kernel, u = case
    g = sample_random(kernel, n, 3)
    u0 = state(model, kernel, u).sample(g.grid_points).values
    M = discrete_jacobian(model, g, u0).matrix
    rng = np.random.default_rng(n)
    h = 1e-6
    for _ in range(10):
        v = rng.standard_normal(n)
        fd = (eval_Gn(model, g, u0 + h * v) - eval_Gn(model, g, u0 - h * v)) / (2 * h)
        assert np.abs(fd - M @ v).max() <= 1e-6 * max(1.0, np.abs(M @ v).max())


def test_discrete_jacobian_examples():
    g = sample_random(SW, 40, 5)
    u = np.random.default_rng(1).random(40)
    assert np.abs(discrete_jacobian(kuramoto(), g, u).matrix.sum(axis=1)).max() <= 1e-13
    M = discrete_jacobian(linear_model(1.5, 0.0), g, u).matrix
    np.testing.assert_array_equal(M, np.diag(np.full(40, 1.5)))


def test_frozen_jacobian_examples():
    lin = frozen_jacobian(linear_model(-2.0, 0.0), SW, const_state(0.3), grid=10)
    np.testing.assert_allclose(lin.matrix, -2 * np.eye(10))
    M = frozen_jacobian(kuramoto(), Constant(0.4), GridFunction(np.random.default_rng(0).random(30))).matrix
    assert np.abs(M @ np.ones(30)).max() <= 1e-10
    op = frozen_jacobian(lotka_volterra(1.0), Constant(0.5), const_state(2 / 3), grid=50)
    ev = np.sort(np.linalg.eigvals(op.matrix).real)
    assert np.abs(ev[0] + 1).max() <= 1e-8
    assert np.abs(ev[1:] + 2 / 3).max() <= 1e-8
    assert op.kind == "ContinuumFrozen"


def test_frozen_jacobian_equals_discrete_jacobian_on_deterministic_sample():
    g = sample_deterministic(SW, 40)
    u = twisted_profile(2)
    a = frozen_jacobian(kuramoto(), SW, u, grid=g.grid_points).matrix
    b = discrete_jacobian(kuramoto(), g, u.sample(g.grid_points).values).matrix
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_eta_examples():
    for m in (1, 2):
        eta = eta_bound(kuramoto(), SW, twisted_profile(m), grid=64)
        assert eta == pytest.approx(max(1.0, 2 / (math.pi * C[m])), rel=1e-10)
    wc = wilson_cowan(1, 1, 1)
    assert eta_bound(wc, Constant(0.5), const_state(0.1497), grid=8) == 1.0
    assert eta_bound(linear_model(-1, 0), Constant(0.5), const_state(0.0), grid=8) == 1.0
    with pytest.raises(HypothesisViolation):
        eta_bound(kuramoto(), SW, twisted_profile(3), grid=16)


def test_xi_examples():
    lv = lotka_volterra(1.0)
    u = const_state(2 / 3)
    assert xi_opnorm_estimate(lv, Constant(0.5), sample_deterministic(Constant(0.5), 30), u) == 0.0
    g = sample_random(Constant(0.3), 200, 4)
    assert xi_opnorm_estimate(lotka_volterra(1.0), Constant(0.3), g, const_state(1 / 1.3)) <= 0.7 + 1e-12
