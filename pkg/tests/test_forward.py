import dataclasses

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from robinshunt import (
    NotPositiveDefinite,
    convexity_gap,
    derivative_apply,
    measure,
    solve_forward,
    system_matrix,
)
from robinshunt.forward import ForwardState
from robinshunt.numerics import max_eig, min_eig, spectral_norm

from .conftest import A, B, make_system

seeds = st.integers(0, 2**32 - 1)


def dense_oracle(system, gamma):
    Ainv = np.linalg.inv(system_matrix(system, gamma).toarray())
    return system.P.T @ Ainv @ system.P


def central_difference(system, gamma, delta, h):
    return (measure(system, gamma + h * delta) - measure(system, gamma - h * delta)) / (2 * h)


def test_zero_current(sys2):
    u, U = solve_forward(sys2, [1.5, 2.0], np.zeros(sys2.m))
    assert not u.any() and not U.any()


def test_linearity_and_reciprocity(sys2, rng):
    gamma = [1.2, 2.8]
    I = rng.standard_normal(sys2.m)
    u1, U1 = solve_forward(sys2, gamma, I)
    u2, U2 = solve_forward(sys2, gamma, 2 * I)
    np.testing.assert_allclose(u2, 2 * u1, rtol=1e-14, atol=1e-15)
    F = measure(sys2, gamma)
    np.testing.assert_array_equal(F, F.T)
    for j in range(sys2.m):
        for k in range(sys2.m):
            Uj = solve_forward(sys2, gamma, np.eye(sys2.m)[k])[1][j]
            Uk = solve_forward(sys2, gamma, np.eye(sys2.m)[j])[1][k]
            assert Uj == pytest.approx(Uk, rel=1e-12, abs=1e-14)


def test_voltages_are_the_electrode_dofs(sys2, rng):
    I = rng.standard_normal(sys2.m)
    u, U = solve_forward(sys2, [2.0, 2.0], I)
    np.testing.assert_array_equal(U, u[sys2.electrode_dofs])
    np.testing.assert_allclose(U, measure(sys2, [2.0, 2.0]) @ I, rtol=1e-12, atol=1e-14)


@given(seeds)
def test_bilinear_form_identity(seed):
    system = _sys()
    rng = np.random.default_rng(seed)
    gamma = rng.uniform(A, B, system.n)
    I, J = rng.standard_normal((2, system.m))
    uI, _ = solve_forward(system, gamma, I)
    uJ, _ = solve_forward(system, gamma, J)
    lhs = I @ measure(system, gamma) @ J
    rhs = uI @ (system_matrix(system, gamma) @ uJ)
    assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-12)


@given(seeds)
def test_dense_inverse_oracle(seed):
    system = _sys()
    gamma = np.random.default_rng(seed).uniform(0.1, 10, system.n)
    F, oracle = measure(system, gamma), dense_oracle(system, gamma)
    assert np.linalg.norm(F - oracle) <= 1e-10 * np.linalg.norm(oracle)


@given(seeds)
def test_monotone_in_loewner_order(seed):
    system = _sys()
    rng = np.random.default_rng(seed)
    g0 = rng.uniform(A, B, system.n)
    g1 = g0 + rng.uniform(0, 1, system.n)
    F0 = measure(system, g0)
    assert min_eig(F0 - measure(system, g1)) >= -1e-10 * spectral_norm(F0)


@given(seeds)
def test_derivative_negative_semidefinite(seed):
    system = _sys()
    rng = np.random.default_rng(seed)
    gamma = rng.uniform(A, B, system.n)
    delta = rng.uniform(0, 1, system.n)
    state = ForwardState(system, gamma)
    assert max_eig(state.derivative(delta)) <= 1e-10 * (1 + spectral_norm(state.F))


def test_zero_direction(sys2):
    assert not derivative_apply(sys2, [1.0, 2.0], [0.0, 0.0]).any()


@pytest.mark.parametrize("seed", range(5))
def test_derivative_central_difference(sys2, seed):
    rng = np.random.default_rng(seed)
    gamma = rng.uniform(A, B, 2)
    delta = rng.standard_normal(2)
    h = 1e-6 * np.linalg.norm(gamma)
    fd = central_difference(sys2, gamma, delta, h)
    exact = derivative_apply(sys2, gamma, delta)
    assert np.linalg.norm(exact - fd) <= 1e-5 * np.linalg.norm(exact)


def test_jacobian_columns(sys2):
    state = ForwardState(sys2, [1.4, 2.2])
    J = state.jacobian()
    for i in range(2):
        np.testing.assert_array_equal(J[:, i], state.derivative(np.eye(2)[i]).ravel())


@given(seeds)
def test_localized_quadratic_form(seed):
    system = _sys()
    rng = np.random.default_rng(seed)
    gamma = rng.uniform(A, B, system.n)
    I = rng.standard_normal(system.m)
    state = ForwardState(system, gamma)
    u = state.factor.solve(system.P @ I)
    for i, Bi in enumerate(system.B):
        lhs = I @ state.derivative(np.eye(system.n)[i]) @ I
        rhs = -u @ (Bi @ u)
        assert lhs == pytest.approx(rhs, rel=1e-8)


def test_convexity_gap_zero_at_base(sys2):
    assert np.abs(convexity_gap(sys2, [1.5, 2.5], [1.5, 2.5])).max() < 1e-15


@given(seeds)
def test_convexity_gap_psd(seed):
    system = _sys()
    rng = np.random.default_rng(seed)
    g0, g1 = rng.uniform(A, B, (2, system.n))
    gap = convexity_gap(system, g1, g0)
    assert min_eig(gap) >= -1e-8 * (1 + spectral_norm(measure(system, g0)))


@given(seeds)
def test_segment_convexity(seed):
    system = _sys()
    rng = np.random.default_rng(seed)
    g0, g1 = rng.uniform(A, B, (2, system.n))
    F0, F1 = measure(system, g0), measure(system, g1)
    for t in (0.25, 0.5, 0.75):
        chord = (1 - t) * F0 + t * F1
        assert min_eig(chord - measure(system, (1 - t) * g0 + t * g1)) >= -1e-10 * (1 + spectral_norm(F0))


def test_indefinite_system_propagates(sys2):
    broken = dataclasses.replace(sys2, B0=(sys2.B0 - 10 * sp.identity(sys2.D)).tocsr())
    with pytest.raises(NotPositiveDefinite):
        measure(broken, [1.0, 1.0])


def _sys():
    return make_system(3, 6)[1]
