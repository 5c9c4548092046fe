"""Global reconstruction by the Loewner-constrained convex program.

The program

    minimize sum(gamma)  s.t.  a <= gamma <= b,  F(gamma) <= Y  (Loewner)

is solved through its linear matrix inequality form: by a Schur complement,
``F(gamma) <= Y`` iff the block matrix ``[[A(gamma), P], [P^T, Y]]`` is
positive semidefinite.  A primal log-barrier method with Newton steps in the
``n`` unknowns is used; the block structure is exploited so only ``A(gamma)``
(sparse) and the ``m x m`` Schur complement are ever factorised.

A box-constrained Levenberg-Marquardt fit of ``||F(gamma) - Y||_F^2`` is
provided as the local baseline the convex program is compared against.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.linalg import lapack

from .assembly import AssembledSystem, check_gamma, system_matrix
from .errors import DomainError, NotPositiveDefinite
from .forward import ForwardState, measure
from .numerics import check_symmetric, max_eig, min_eig, spd_factorize, spectral_norm, symmetrize

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# LMI embedding


@dataclass(frozen=True, eq=False)
class LmiProblem:
    B: tuple  # padded (D+m) x (D+m) sparse matrices
    Y: sp.csr_matrix
    a: float
    b: float

    def matrix(self, gamma) -> sp.csr_matrix:
        M = self.Y.copy()
        for g, Bj in zip(np.asarray(gamma, dtype=float), self.B):
            M = M + g * Bj
        return M.tocsr()

    def min_eig(self, gamma) -> float:
        return min_eig(self.matrix(gamma).toarray())


def schur_embed(system: AssembledSystem, Y_target, a: float = 0.0, b: float = np.inf) -> LmiProblem:
    Y_target = np.asarray(Y_target, dtype=float)
    m, D = system.m, system.D
    if Y_target.shape != (m, m):
        raise DomainError(f"target must be {m}x{m}, got {Y_target.shape}")
    check_symmetric(Y_target)
    pad = [sp.block_diag([Bj, sp.csr_matrix((m, m))], format="csr") for Bj in system.B]
    P = sp.csr_matrix(system.P)
    Y = sp.bmat([[system.B0, P], [P.T, sp.csr_matrix(symmetrize(Y_target))]], format="csr")
    return LmiProblem(B=tuple(pad), Y=Y, a=a, b=b)


# --------------------------------------------------------------------------
# barrier solver


@dataclass
class SdpOptions:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-9
    max_outer: int = 40
    max_newton: int = 60
    t0: float = 1.0
    mu: float = 10.0
    newton_tol: float = 1e-8
    slack_rel: float = 1e-12
    seed: int = 0


@dataclass
class SdpSolution:
    gamma_star: np.ndarray
    objective: float
    status: str  # "optimal" | "infeasible" | "max_iter"
    kkt_report: dict
    iterations: list = field(default_factory=list)  # dicts: iteration, outer, objective, min_eig, barrier_t

    def to_dict(self) -> dict:
        return {
            "gamma_star": [float(g) for g in self.gamma_star],
            "objective": float(self.objective),
            "status": self.status,
            "kkt_report": {k: _jsonable(v) for k, v in self.kkt_report.items()},
            "n_iterations": len(self.iterations),
        }


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


class _Barrier:
    """Log-barrier of the LMI plus the box, evaluated through the block structure.

    ``-logdet [[A, P], [P^T, T]] = -logdet A - logdet (T - P^T A^{-1} P)``.
    """

    def __init__(self, system: AssembledSystem, target: np.ndarray, a: float, b: float):
        self.system = system
        self.target = target
        self.a, self.b = a, b
        G = system.gamma_dofs
        self.rhs = np.hstack([system.P, _unit_columns(system.D, G)])
        self.local = system.gamma_local()
        self.nu = system.D + system.m + 2 * system.n

    def evaluate(self, gamma, t, derivatives=True):
        """Return ``None`` outside the strict feasible set, else (f, grad, hess, info)."""
        a, b = self.a, self.b
        if np.any(gamma <= a) or np.any(gamma >= b):
            return None
        sys = self.system
        try:
            fac = spd_factorize(system_matrix(sys, gamma), check=False)
        except NotPositiveDefinite:
            return None
        m = sys.m
        X = fac.solve(self.rhs if derivatives else sys.P)
        W = X[:, :m]
        F = symmetrize(W[sys.electrode_dofs])
        R = symmetrize(self.target - F)
        cR, info = lapack.dpotrf(R, lower=1, clean=1)
        if info != 0:
            return None
        logdet_R = 2.0 * np.sum(np.log(np.diag(cR)))
        f = (t * gamma.sum() - fac.logdet() - logdet_R
             - np.sum(np.log(gamma - a)) - np.sum(np.log(b - gamma)))
        if not derivatives:
            return f, None, None, {"F": F}
        G = sys.gamma_dofs
        Wg = W[G]
        Ainv_gg = symmetrize(X[G, m:])
        Rinv_WgT = sla.cho_solve((cR, True), Wg.T)
        Z = symmetrize(Ainv_gg + Wg @ Rinv_WgT)
        # tr(Z B_i) and tr(Z B_i Z B_j) touch only the supports of B_i, B_j
        ZB = [Z[:, idx] @ blk for idx, blk in self.local]
        trace = np.array([np.trace(zb[idx]) for zb, (idx, _) in zip(ZB, self.local)])
        n = len(ZB)
        hess = np.empty((n, n))
        for i, (idx_i, _) in enumerate(self.local):
            for j, (idx_j, _) in enumerate(self.local[: i + 1]):
                hess[i, j] = hess[j, i] = np.sum(ZB[i][idx_j] * ZB[j][idx_i].T)
        grad = t - trace - 1.0 / (gamma - a) + 1.0 / (b - gamma)
        hess += np.diag(1.0 / (gamma - a) ** 2 + 1.0 / (b - gamma) ** 2)
        return f, grad, hess, {"F": F, "R": R}


def _unit_columns(D, idx):
    E = np.zeros((D, len(idx)))
    E[idx, np.arange(len(idx))] = 1.0
    return E


def _newton_direction(grad, hess):
    try:
        c = sla.cho_factor(hess)
        return -sla.cho_solve(c, grad)
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(hess)
        w = np.maximum(w, 1e-14 * max(w.max(), 1e-300))
        return -V @ ((V.T @ grad) / w)


def phase_one(system: AssembledSystem, Y: np.ndarray, b: float) -> float:
    """Smallest lift ``s`` with ``F(gamma) <= Y + s I`` for some ``gamma <= b``.

    F is Loewner non-increasing, so the minimum is attained at ``gamma = b``.
    """
    return max_eig(measure(system, np.full(system.n, b)) - Y)


def _interior_start(barrier: _Barrier, a: float, b: float):
    n = barrier.system.n
    eta = 1e-3 * (b - a)
    floor = 8 * np.finfo(float).eps * b
    while eta >= floor:
        gamma = np.full(n, b - eta)
        if barrier.evaluate(gamma, 1.0, derivatives=False) is not None:
            return gamma
        eta /= 10.0
    return None


def solve_sdp(system: AssembledSystem, Y_target, a: float, b: float, opts: SdpOptions | None = None) -> SdpSolution:
    """Minimise ``sum(gamma)`` over ``[a, b]^n`` subject to ``F(gamma) <= Y_target``."""
    opts = opts or SdpOptions()
    if not (0 < a < b):
        raise DomainError(f"need 0 < a < b, got a={a}, b={b}")
    Y = np.asarray(Y_target, dtype=float)
    if Y.shape != (system.m, system.m):
        raise DomainError(f"target must be {system.m}x{system.m}, got {Y.shape}")
    check_symmetric(Y)
    Y = symmetrize(Y)
    n = system.n
    y_norm = spectral_norm(Y)

    s_min = phase_one(system, Y, b)
    report = {"phase1_slack": s_min}
    if s_min > opts.feas_tol * (1.0 + y_norm):
        report.update(schur_min_eig=-s_min, box_slack=0.0, barrier_t=None, gap_bound=None)
        gamma = np.full(n, float(b))
        return SdpSolution(gamma, float(gamma.sum()), "infeasible", report)

    lift = max(s_min, 0.0) + opts.slack_rel * (1.0 + y_norm)
    report["slack"] = lift
    barrier = _Barrier(system, Y + lift * np.eye(system.m), a, b)
    gamma = _interior_start(barrier, a, b)
    if gamma is None:
        report.update(schur_min_eig=-s_min, box_slack=0.0, barrier_t=None, gap_bound=None)
        gamma = np.full(n, float(b))
        return SdpSolution(gamma, float(gamma.sum()), "infeasible", report)

    t = opts.t0
    trace = []
    status = "max_iter"
    for outer in range(opts.max_outer):
        for _ in range(opts.max_newton):
            f, grad, hess, info = barrier.evaluate(gamma, t)
            step = _newton_direction(grad, hess)
            dec2 = -float(grad @ step)
            trace.append({
                "iteration": len(trace), "outer": outer, "objective": float(gamma.sum()),
                "min_eig": min_eig(info["R"]), "barrier_t": t, "decrement2": dec2,
            })
            if dec2 / 2 <= opts.newton_tol:
                break
            alpha = 1.0
            while alpha > 1e-14:
                trial = gamma + alpha * step
                if np.array_equal(trial, gamma):
                    alpha = 0.0
                    break
                res = barrier.evaluate(trial, t, derivatives=False)
                if res is not None and res[0] <= f - 0.25 * alpha * dec2:
                    break
                alpha *= 0.5
            if alpha <= 1e-14:
                break  # roundoff floor: no representable descent step at this t
            gamma = trial
        if barrier.nu / t < opts.gap_tol:
            status = "optimal"
            break
        t *= opts.mu

    F_star = measure(system, gamma)
    report.update(
        schur_min_eig=min_eig(Y - F_star),
        box_slack=float(min((gamma - a).min(), (b - gamma).min())),
        barrier_t=t,
        gap_bound=barrier.nu / t,
    )
    log.debug("sdp finished: status=%s t=%.3g iterations=%d", status, t, len(trace))
    return SdpSolution(gamma, float(gamma.sum()), status, report, trace)


# --------------------------------------------------------------------------
# noisy data


@dataclass(frozen=True)
class NoisyInput:
    Y_delta: np.ndarray
    delta: float

    def __post_init__(self):
        if not self.delta >= 0:
            raise DomainError(f"noise level must be >= 0, got {self.delta}")


def noise_matrix(m: int, delta: float, rng: np.random.Generator) -> np.ndarray:
    """Symmetric matrix with seeded uniform entries, scaled to spectral norm ``delta``."""
    E = rng.uniform(-1.0, 1.0, size=(m, m))
    E = symmetrize(E)
    norm = spectral_norm(E)
    return E * (delta / norm) if delta > 0 else np.zeros((m, m))


def error_bound(delta: float, n: int, lam: float) -> float | None:
    """Reconstruction error bound ``2 delta (n - 1) / lambda`` (``None`` if lambda <= 0)."""
    if lam is None or not lam > 0:
        return None
    return 2.0 * delta * (n - 1) / lam


def solve_sdp_noisy(
    system: AssembledSystem,
    noisy: NoisyInput,
    a: float,
    b: float,
    opts: SdpOptions | None = None,
    criterion=None,
) -> tuple[SdpSolution, dict]:
    """Solve with the lifted target ``Y_delta + delta I``.

    ``criterion`` is a :class:`~robinshunt.certify.CriterionResult` computed
    with ``C = n - 1``; when its stability constant is positive the report
    carries the a-priori error bound.
    """
    Y = symmetrize(np.asarray(noisy.Y_delta, dtype=float)) + noisy.delta * np.eye(system.m)
    sol = solve_sdp(system, Y, a, b, opts)
    report = {"delta": noisy.delta, "bound": None, "lambda": None, "note": "bound unavailable"}
    if criterion is not None:
        report["lambda"] = criterion.lam
        bound = error_bound(noisy.delta, system.n, criterion.lam)
        if bound is not None:
            report.update(bound=bound, note="2*delta*(n-1)/lambda")
    return sol, report


# --------------------------------------------------------------------------
# least-squares baseline


@dataclass
class LsqOptions:
    mu0: float = 1e-3
    mu_up: float = 10.0
    mu_down: float = 0.1
    max_iter: int = 200
    xtol: float = 1e-12
    ftol: float = 1e-15


@dataclass
class LsqResult:
    gamma: np.ndarray
    residual_trace: list
    converged: bool

    @property
    def flagged(self) -> bool:
        return not self.converged


def lsq_baseline(
    system: AssembledSystem, Y_target, gamma0, a: float, b: float, opts: LsqOptions | None = None
) -> LsqResult:
    """Projected Levenberg-Marquardt on ``||F(gamma) - Y||_F^2`` over ``[a, b]^n``."""
    opts = opts or LsqOptions()
    Y = np.asarray(Y_target, dtype=float)
    gamma = np.clip(check_gamma(gamma0, system.n), a, b)

    state = ForwardState(system, gamma)
    r = (state.F - Y).ravel()
    cost = float(r @ r)
    trace = [cost]
    mu = opts.mu0
    converged = False
    for _ in range(opts.max_iter):
        if cost == 0.0:
            converged = True
            break
        J = state.jacobian()
        JtJ = J.T @ J
        g = J.T @ r
        scale = np.diag(JtJ).copy()
        scale[scale <= 0] = 1.0
        accepted = False
        while mu < 1e20:
            step = -np.linalg.solve(JtJ + mu * np.diag(scale), g)
            trial = np.clip(gamma + step, a, b)
            if np.all(trial == gamma):
                mu *= opts.mu_up
                continue
            trial_state = ForwardState(system, trial)
            r_new = (trial_state.F - Y).ravel()
            cost_new = float(r_new @ r_new)
            if cost_new < cost:
                accepted = True
                break
            mu *= opts.mu_up
        if not accepted:
            converged = True  # no descent step exists at working precision
            break
        moved = np.linalg.norm(trial - gamma)
        reduction = cost - cost_new
        gamma, state, r, cost = trial, trial_state, r_new, cost_new
        trace.append(cost)
        mu *= opts.mu_down
        if moved <= opts.xtol * (1.0 + np.linalg.norm(gamma)) or reduction <= opts.ftol * cost:
            converged = True
            break
    return LsqResult(gamma=gamma, residual_trace=trace, converged=converged)


# --------------------------------------------------------------------------
# admissible set


def admissible_set_sample(
    system: AssembledSystem,
    Y_target,
    delta: float,
    a: float,
    b: float,
    grid_resolution: int,
    rtol: float = 1e-10,
) -> tuple[np.ndarray, np.ndarray]:
    """Sample ``{gamma in [a, b]^2 : F(gamma) <= Y + delta I}`` on a uniform grid.

    Returns the grid axis and a boolean array ``mask[p, q]`` for the point
    ``(axis[p], axis[q])``.
    """
    if system.n != 2:
        raise DomainError(f"admissible set sampling needs n = 2, got n = {system.n}")
    if grid_resolution < 2:
        raise DomainError("grid_resolution must be >= 2")
    Y = symmetrize(np.asarray(Y_target, dtype=float)) + delta * np.eye(system.m)
    tol = rtol * (1.0 + spectral_norm(Y))
    axis = np.linspace(a, b, grid_resolution)
    mask = np.zeros((grid_resolution, grid_resolution), dtype=bool)
    for p, g1 in enumerate(axis):
        for q, g2 in enumerate(axis):
            mask[p, q] = min_eig(Y - measure(system, [g1, g2])) >= -tol
    return axis, mask
