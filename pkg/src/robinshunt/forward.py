"""Measurement operator, its derivative, and the Loewner diagnostics built on them."""

from __future__ import annotations

import numpy as np

from .assembly import AssembledSystem, check_gamma, system_matrix
from .numerics import SpdFactor, spd_factorize, symmetrize


class ForwardState:
    """Forward solution at one Robin coefficient vector.

    Holds one factorisation of ``A(gamma)`` and ``W = A(gamma)^{-1} P``; the
    measurement matrix and all directional derivatives at this gamma reuse it.
    """

    def __init__(self, system: AssembledSystem, gamma):
        self.system = system
        self.gamma = check_gamma(gamma, system.n)
        self.factor: SpdFactor = spd_factorize(system_matrix(system, self.gamma), check=False)
        self.W = self.factor.solve(system.P)
        self._sens = None

    @property
    def F(self) -> np.ndarray:
        return symmetrize(self.W[self.system.electrode_dofs])

    def sensitivities(self) -> np.ndarray:
        """Stack ``G[i] = W^T B[i] W`` so that ``F'(gamma) delta = -sum_i delta_i G[i]``."""
        if self._sens is None:
            Wg = self.W[self.system.gamma_dofs]
            G = np.stack([Wg[idx].T @ blk @ Wg[idx] for idx, blk in self.system.gamma_local()])
            self._sens = 0.5 * (G + G.transpose(0, 2, 1))
        return self._sens

    def derivative(self, delta) -> np.ndarray:
        delta = np.asarray(delta, dtype=float).ravel()
        return -np.tensordot(delta, self.sensitivities(), axes=1)

    def jacobian(self) -> np.ndarray:
        """``(m*m, n)`` matrix whose column i is ``vec(F'(gamma) e_i)``."""
        G = self.sensitivities()
        return -G.reshape(len(G), -1).T


def evaluate(system: AssembledSystem, gamma) -> ForwardState:
    return ForwardState(system, gamma)


def solve_forward(system: AssembledSystem, gamma, currents) -> tuple[np.ndarray, np.ndarray]:
    """Potential ``u`` (DOF vector) and electrode voltages ``U`` for applied currents."""
    currents = np.asarray(currents, dtype=float)
    state = ForwardState(system, gamma)
    u = state.factor.solve(system.P @ currents)
    return u, u[system.electrode_dofs]


def measure(system: AssembledSystem, gamma) -> np.ndarray:
    """Current-to-voltage matrix ``P^T A(gamma)^{-1} P``."""
    return ForwardState(system, gamma).F


def derivative_apply(system: AssembledSystem, gamma, delta) -> np.ndarray:
    return ForwardState(system, gamma).derivative(delta)


def convexity_gap(system: AssembledSystem, gamma, gamma0) -> np.ndarray:
    """``F(gamma) - F(gamma0) - F'(gamma0)(gamma - gamma0)``; PSD by convexity."""
    gamma = check_gamma(gamma, system.n)
    s0 = ForwardState(system, gamma0)
    return symmetrize(measure(system, gamma) - s0.F - s0.derivative(gamma - s0.gamma))
