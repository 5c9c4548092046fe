"""SPD factorisation and symmetric eigenvalue kernels.

Sparse matrices are factorised by a band Cholesky (LAPACK ``pbtrf``) after a
reverse Cuthill-McKee reordering; the polar meshes used here have a band of a
few hundred at most, so this is competitive with a general sparse Cholesky
and has a fixed, deterministic ordering.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lapack
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .errors import DomainError, NotPositiveDefinite

SYM_RTOL = 1e-12


class SpdFactor:
    """Cholesky factor ``P A P^T = L L^T`` of a symmetric positive definite matrix."""

    def __init__(self, chol: np.ndarray, perm: np.ndarray, banded: bool):
        self._chol = chol
        self.perm = perm
        self.banded = banded
        self.shape = (len(perm), len(perm))
        self._iperm = np.empty_like(perm)
        self._iperm[perm] = np.arange(len(perm))

    def solve(self, rhs):
        rhs = np.asarray(rhs, dtype=float)
        vec = rhs.ndim == 1
        b = rhs.reshape(len(self.perm), -1)[self.perm]
        if self.banded:
            x, info = lapack.dpbtrs(self._chol, b, lower=1)
        else:
            x, info = lapack.dpotrs(self._chol, b, lower=1)
        if info != 0:
            raise np.linalg.LinAlgError(f"triangular solve failed (info={info})")
        x = x[self._iperm]
        return x.ravel() if vec else x

    def logdet(self) -> float:
        diag = self._chol[0] if self.banded else np.diag(self._chol)
        return 2.0 * float(np.sum(np.log(diag)))

    def lower(self) -> np.ndarray:
        """Dense lower factor L, in the permuted ordering ``perm``."""
        if not self.banded:
            return np.tril(self._chol)
        kd, n = self._chol.shape[0] - 1, self.shape[0]
        L = np.zeros((n, n))
        for d in range(kd + 1):
            idx = np.arange(n - d)
            L[idx + d, idx] = self._chol[d, : n - d]
        return L


def check_symmetric(M, rtol: float = SYM_RTOL) -> None:
    if sp.issparse(M):
        diff = abs(M - M.T).max()
        scale = abs(M).max()
    else:
        M = np.asarray(M)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DomainError(f"expected a square matrix, got shape {M.shape}")
        diff = np.abs(M - M.T).max(initial=0.0)
        scale = np.abs(M).max(initial=0.0)
    if diff > rtol * max(scale, np.finfo(float).tiny):
        raise DomainError(f"matrix is not symmetric (max asymmetry {diff:.3g})")


def _to_lower_band(A: sp.csr_matrix, perm: np.ndarray) -> np.ndarray:
    Ap = A[perm][:, perm].tocoo()
    low = Ap.row >= Ap.col
    rows, cols, vals = Ap.row[low], Ap.col[low], Ap.data[low]
    kd = int((rows - cols).max(initial=0))
    ab = np.zeros((kd + 1, A.shape[0]))
    np.add.at(ab, (rows - cols, cols), vals)
    return ab


def spd_factorize(A, check: bool = True) -> SpdFactor:
    """Cholesky-factorise a symmetric matrix, raising if it is not positive definite.

    Accepts a scipy sparse matrix (band Cholesky after RCM reordering) or a
    dense array (``potrf``).  On failure raises :class:`NotPositiveDefinite`
    whose ``pivot`` refers to the original row ordering.
    """
    if check:
        check_symmetric(A)
    if sp.issparse(A):
        A = sp.csr_matrix(A, dtype=float)
        perm = np.asarray(reverse_cuthill_mckee(A, symmetric_mode=True), dtype=np.intp)
        ab = _to_lower_band(A, perm)
        chol, info = lapack.dpbtrf(ab, lower=1)
        banded = True
    else:
        A = np.asarray(A, dtype=float)
        perm = np.arange(A.shape[0])
        chol, info = lapack.dpotrf(A, lower=1, clean=1)
        banded = False
    if info > 0:
        raise NotPositiveDefinite(int(perm[info - 1]) + 1)
    if info < 0:
        raise np.linalg.LinAlgError(f"invalid argument to LAPACK Cholesky (info={info})")
    return SpdFactor(chol, perm, banded)


def is_positive_definite(A) -> bool:
    try:
        spd_factorize(A, check=False)
    except NotPositiveDefinite:
        return False
    return True


def symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def eig_sym(M) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors of a dense symmetric matrix."""
    M = np.asarray(M, dtype=float)
    check_symmetric(M)
    return np.linalg.eigh(symmetrize(M))


def eigvals_sym(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    check_symmetric(M)
    return np.linalg.eigvalsh(symmetrize(M))


def min_eig(M) -> float:
    return float(eigvals_sym(M)[0])


def max_eig(M) -> float:
    return float(eigvals_sym(M)[-1])


def spectral_norm(M) -> float:
    w = eigvals_sym(M)
    return float(max(abs(w[0]), abs(w[-1])))


def loewner_tol(*mats, rtol: float = 1e-10) -> float:
    """Threshold ``rtol * (1 + ||M||_2)`` used for Loewner-order eigenvalue tests."""
    scale = max((spectral_norm(M) for M in mats), default=0.0)
    return rtol * (1.0 + scale)
