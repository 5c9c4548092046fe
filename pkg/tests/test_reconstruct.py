import json

import numpy as np
import pytest
import scipy.sparse as sp

from robinshunt import (
    AssembledSystem,
    DomainError,
    NoisyInput,
    SdpOptions,
    admissible_set_sample,
    criterion_lambda,
    lsq_baseline,
    measure,
    schur_embed,
    solve_sdp,
    solve_sdp_noisy,
)
from robinshunt.numerics import min_eig, spectral_norm
from robinshunt.reconstruct import LsqOptions, error_bound, noise_matrix

from .conftest import A, B, make_system


def scalar_system():
    """D = m = n = 1 with B0 = [2], B1 = [1], P = [1], so F(gamma) = 1/(2 + gamma)."""
    one = sp.csr_matrix([[1.0]])
    return AssembledSystem(
        B0=sp.csr_matrix([[2.0]]), B=(one,), P=np.array([[1.0]]),
        dof_map=np.array([0]), electrode_dofs=np.array([0]), gamma_dofs=np.array([0]),
    )


@pytest.mark.parametrize("gamma", [0.5, 1.0, 4.0])
def test_scalar_schur_identity(gamma):
    system = scalar_system()
    F = 1 / (2 + gamma)
    assert measure(system, [gamma])[0, 0] == pytest.approx(F, rel=1e-15)
    for y, feasible in ((F * 1.01, True), (F * 0.99, False)):
        lmi = schur_embed(system, [[y]])
        M = lmi.matrix([gamma]).toarray()
        np.testing.assert_allclose(M, [[2 + gamma, 1], [1, y]], rtol=1e-15)
        assert (lmi.min_eig([gamma]) >= 0) == feasible


def test_embed_dimension_mismatch(sys2):
    with pytest.raises(DomainError):
        schur_embed(sys2, np.eye(3))
    with pytest.raises(DomainError):
        solve_sdp(sys2, np.eye(3), A, B)


def test_schur_sign_agreement(sys2):
    Y = measure(sys2, [1.8, 2.2])
    lmi = schur_embed(sys2, Y, A, B)
    rng = np.random.default_rng(1)
    for _ in range(40):
        g = rng.uniform(A, B, 2)
        s1 = min_eig(Y - measure(sys2, g))
        s2 = lmi.min_eig(g)
        signs = [0 if abs(v) <= 1e-9 else np.sign(v) for v in (s1, s2)]
        assert signs[0] == signs[1]


def test_equality_case(sys2):
    g = np.array([1.4, 2.9])
    Y = measure(sys2, g)
    lmi = schur_embed(sys2, Y, A, B)
    assert lmi.min_eig(g) >= -1e-9
    assert abs(min_eig(Y - measure(sys2, g))) <= 1e-12


def test_corner_target_returns_corner(sys2):
    sol = solve_sdp(sys2, measure(sys2, np.full(2, B)), A, B)
    assert sol.status == "optimal"
    assert np.abs(sol.gamma_star - B).max() <= 1e-6


@pytest.mark.parametrize("g", [(1.0, 1.0), (1.09, 2.68), (2.0, 2.0), (3.0, 1.5)])
def test_recovers_exact_data(sys2, g):
    g = np.array(g)
    sol = solve_sdp(sys2, measure(sys2, g), A, B)
    assert sol.status == "optimal"
    assert np.linalg.norm(sol.gamma_star - g) <= 1e-4
    assert sol.kkt_report["gap_bound"] < SdpOptions().gap_tol
    assert len(sol.iterations) > 0
    json.dumps(sol.to_dict())


def test_recovers_three_partitions(sys3):
    g = np.array([1.3, 2.7, 2.1])
    sol = solve_sdp(sys3, measure(sys3, g), A, B)
    assert np.abs(sol.gamma_star - g).max() <= 1e-4


def test_optimality_poll(sys2):
    opts = SdpOptions()
    Y = measure(sys2, [1.6, 2.4])
    sol = solve_sdp(sys2, Y, A, B, opts)
    target = Y + sol.kkt_report["slack"] * np.eye(sys2.m)
    step = 10 * opts.gap_tol
    for i in range(2):
        trial = sol.gamma_star.copy()
        trial[i] -= step
        in_box = np.all(trial >= A) and np.all(trial <= B)
        assert not (in_box and min_eig(target - measure(sys2, trial)) >= 0)


def test_infeasible_target(sys2):
    Y = measure(sys2, np.full(2, B)) - 0.1 * np.eye(sys2.m)
    sol = solve_sdp(sys2, Y, A, B)
    assert sol.status == "infeasible"
    assert sol.kkt_report["phase1_slack"] == pytest.approx(0.1, rel=1e-10)
    lmi = schur_embed(sys2, Y, A, B)
    axis = np.linspace(A, B, 5)
    assert max(lmi.min_eig([g1, g2]) for g1 in axis for g2 in axis) < 0


def test_iteration_cap(sys2):
    sol = solve_sdp(sys2, measure(sys2, [2.0, 2.0]), A, B, SdpOptions(max_outer=1))
    assert sol.status == "max_iter"
    assert np.all(sol.gamma_star > A) and np.all(sol.gamma_star < B)


def test_bad_bounds(sys2):
    with pytest.raises(DomainError):
        solve_sdp(sys2, measure(sys2, [2.0, 2.0]), 3.0, 1.0)


def test_noise_free_noisy_solve_matches(sys2):
    Y = measure(sys2, [1.2, 2.5])
    plain = solve_sdp(sys2, Y, A, B)
    noisy, report = solve_sdp_noisy(sys2, NoisyInput(Y, 0.0), A, B)
    assert abs(noisy.objective - plain.objective) <= SdpOptions().gap_tol
    assert report["bound"] is None and report["note"] == "bound unavailable"


def test_negative_noise_level_rejected():
    with pytest.raises(DomainError):
        NoisyInput(np.eye(2), -1e-3)


def test_noise_matrix_norm(rng):
    E = noise_matrix(8, 1e-3, rng)
    assert np.array_equal(E, E.T)
    assert spectral_norm(E) == pytest.approx(1e-3, rel=1e-12)
    assert not noise_matrix(8, 0.0, rng).any()


def test_error_bound_formula():
    assert error_bound(1e-6, 3, 0.5) == pytest.approx(8e-6)
    assert error_bound(1e-6, 3, 0.0) is None
    assert error_bound(1e-6, 3, -1.0) is None


@pytest.mark.parametrize("delta", [1e-8, 1e-6])
def test_noisy_error_within_bound(delta):
    system = make_system(2, 8)[1]
    crit = criterion_lambda(system, A, B, 1.0)
    assert crit.lam > 1e-6
    g = np.array([1.7, 2.4])
    Yd = measure(system, g) + noise_matrix(system.m, delta, np.random.default_rng(5))
    sol, report = solve_sdp_noisy(system, NoisyInput(Yd, delta), A, B, criterion=crit)
    assert report["bound"] == pytest.approx(2 * delta / crit.lam)
    assert np.abs(sol.gamma_star - g).max() <= report["bound"] + SdpOptions().gap_tol


def test_converse_monotonicity(sys2):
    rng = np.random.default_rng(4)
    hits = 0
    for _ in range(300):
        x, y = rng.uniform(A, B, (2, 2))
        Fx, Fy = measure(sys2, x), measure(sys2, y)
        tol = 1e-10 * (1 + spectral_norm(Fx))
        if min_eig(Fx - Fy) >= -tol:
            hits += 1
            assert (y - x).sum() > -tol
    assert hits > 20


def test_lsq_from_truth(sys2):
    g = np.array([1.3, 2.2])
    res = lsq_baseline(sys2, measure(sys2, g), g, A, B)
    assert res.converged and not res.flagged
    assert np.linalg.norm(res.gamma - g) <= 1e-6


def test_lsq_residual_non_increasing(sys2):
    res = lsq_baseline(sys2, measure(sys2, [1.09, 2.68]), [2.0, 2.0], A, B)
    assert np.all(np.diff(res.residual_trace) <= 0)
    assert np.all((res.gamma >= A) & (res.gamma <= B))


def test_lsq_iteration_cap_is_flagged(sys2):
    res = lsq_baseline(sys2, measure(sys2, [1.09, 2.68]), [2.0, 2.0], A, B, LsqOptions(max_iter=1))
    assert res.flagged
    assert len(res.residual_trace) == 2


def test_admissible_set_properties(sys2):
    g = np.array([2.0, 2.0])
    Y = measure(sys2, g)
    axis, exact = admissible_set_sample(sys2, Y, 0.0, A, B, 9)
    p = int(np.argmin(np.abs(axis - 2.0)))
    assert exact[p, p]
    lower = np.add.outer(axis < 2.0, axis < 2.0) == 2
    assert not exact[lower].any()
    # upper-closed: admissible cells stay admissible when either coordinate grows
    assert np.all(exact[:-1] <= exact[1:]) and np.all(exact[:, :-1] <= exact[:, 1:])
    _, noisy = admissible_set_sample(sys2, Y, 1e-1, A, B, 9)
    assert np.all(noisy >= exact) and noisy.sum() > exact.sum()


def test_admissible_needs_two_partitions(sys3):
    with pytest.raises(DomainError):
        admissible_set_sample(sys3, measure(sys3, [2, 2, 2]), 0.0, A, B, 5)
