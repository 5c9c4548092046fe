import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from robinshunt import DomainError, NotPositiveDefinite
from robinshunt.numerics import (
    eig_sym,
    eigvals_sym,
    is_positive_definite,
    loewner_tol,
    max_eig,
    min_eig,
    spd_factorize,
    spectral_norm,
)

seeds = st.integers(0, 2**32 - 1)
sizes = st.integers(1, 40)


def random_spd(rng, n):
    G = rng.standard_normal((n, n))
    return G.T @ G + np.eye(n)


def random_sym(rng, n):
    M = rng.standard_normal((n, n))
    return M + M.T


def power_iteration_max(M, iters=20000):
    """Largest eigenvalue by power iteration on the shifted PSD matrix ``M + s I``."""
    s = np.linalg.norm(M, "fro")
    S = M + s * np.eye(len(M))
    x = np.ones(len(M)) / np.sqrt(len(M))
    for _ in range(iters):
        y = S @ x
        x = y / np.linalg.norm(y)
    return x @ M @ x


def test_identity_solves_exactly():
    f = spd_factorize(np.eye(5))
    b = np.arange(5.0)
    assert np.array_equal(f.solve(b), b)
    fs = spd_factorize(sp.identity(5, format="csr"))
    assert np.array_equal(fs.solve(b), b)


@given(seeds, sizes)
def test_random_spd_residual(seed, n):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, n)
    b = rng.standard_normal(n)
    for mat in (A, sp.csr_matrix(A)):
        x = spd_factorize(mat).solve(b)
        assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_sparse_matrix_rhs(sys2):
    A = sys2.B0 + sum(sys2.B)
    X = spd_factorize(A).solve(sys2.P)
    assert X.shape == sys2.P.shape
    assert np.abs(A @ X - sys2.P).max() < 1e-12


@pytest.mark.parametrize("dense", [True, False])
def test_indefinite_pivot(dense):
    A = np.diag([1.0, -1.0])
    with pytest.raises(NotPositiveDefinite) as err:
        spd_factorize(A if dense else sp.csr_matrix(A))
    assert err.value.pivot == 2
    assert isinstance(err.value, np.linalg.LinAlgError)


def test_pivot_refers_to_original_ordering():
    # path graph scrambled so that RCM reorders it; only row 4 is bad
    n = 7
    A = sp.diags([np.full(n - 1, -0.1), np.ones(n), np.full(n - 1, -0.1)], [-1, 0, 1]).tolil()
    p = np.random.default_rng(3).permutation(n)
    A = A.tocsr()[p][:, p].tolil()
    A[4, 4] = -5.0
    with pytest.raises(NotPositiveDefinite) as err:
        spd_factorize(A.tocsr())
    assert err.value.pivot == 5
    assert not is_positive_definite(A.tocsr())


def test_asymmetric_input_is_rejected():
    with pytest.raises(DomainError):
        spd_factorize(np.array([[2.0, 1.0], [0.0, 2.0]]))
    with pytest.raises(DomainError):
        eigvals_sym(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(DomainError):
        eigvals_sym(np.ones((2, 3)))


@given(seeds, st.integers(1, 30))
def test_factor_reconstructs_matrix(seed, n):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, n)
    A[np.abs(A) < 1.0] = 0.0
    A += n * np.eye(n)
    f = spd_factorize(sp.csr_matrix(A))
    L = f.lower()
    Ap = A[f.perm][:, f.perm]
    assert np.abs(L @ L.T - Ap).max() <= 1e-12 * np.abs(A).max()


@given(seeds, st.integers(1, 30))
def test_logdet_matches_eigenvalues(seed, n):
    A = random_spd(np.random.default_rng(seed), n)
    expected = np.sum(np.log(np.linalg.eigvalsh(A)))
    for mat in (A, sp.csr_matrix(A)):
        assert spd_factorize(mat).logdet() == pytest.approx(expected, rel=1e-8, abs=1e-8)


def test_eigenvalue_examples():
    np.testing.assert_allclose(eigvals_sym(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])
    np.testing.assert_allclose(eigvals_sym([[0.0, 1.0], [1.0, 0.0]]), [-1, 1], atol=1e-15)
    assert max_eig(-np.diag([1.0, 0.0, 2.0])) <= 0
    assert min_eig(np.eye(4)) == max_eig(np.eye(4)) == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_max_eig_power_iteration_oracle(seed):
    M = random_sym(np.random.default_rng(seed), 12)
    assert max_eig(M) == pytest.approx(power_iteration_max(M), abs=1e-8 * np.linalg.norm(M, 2))


@given(seeds, sizes)
def test_psd_has_nonnegative_spectrum(seed, n):
    G = np.random.default_rng(seed).standard_normal((n, n))
    assert min_eig(G.T @ G) >= -1e-10 * (1 + np.linalg.norm(G) ** 2)


@given(seeds, sizes)
def test_trace_equals_eigenvalue_sum(seed, n):
    M = random_sym(np.random.default_rng(seed), n)
    w = eigvals_sym(M)
    assert np.trace(M) == pytest.approx(w.sum(), rel=1e-10, abs=1e-10 * np.abs(w).max())


@given(seeds, sizes)
def test_eigenvectors_orthonormal(seed, n):
    M = random_sym(np.random.default_rng(seed), n)
    w, V = eig_sym(M)
    assert np.all(np.diff(w) >= 0)
    assert np.abs(V.T @ V - np.eye(n)).max() < 1e-12
    assert np.abs(M @ V - V * w).max() < 1e-10 * (1 + np.abs(w).max())


def test_spectral_norm_and_tolerance():
    M = np.diag([-4.0, 1.0])
    assert spectral_norm(M) == 4.0
    assert loewner_tol(M, np.eye(2), rtol=1e-10) == pytest.approx(5e-10)
