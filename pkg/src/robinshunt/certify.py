"""Finite probe-grid certification of uniqueness and Lipschitz stability.

For bounds ``0 < a < b`` and a constant ``C`` (1 for plain uniqueness,
``n - 1`` for the convex reformulation) the derivative is tested at the
points ``z[j,k] = a/2 (1 - e_j) + (a + k a/(4C)) e_j`` in the directions
``d[j] = C (2b - a)/a (1 - e_j) - e_j / 2``.  The stability constant is the
smallest of the largest eigenvalues found; it is positive iff every test
matrix has a positive eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .assembly import AssembledSystem, assemble
from .errors import DomainError
from .forward import ForwardState
from .geometry import GeometryConfig, build_geometry, generate_mesh
from .numerics import max_eig


@dataclass(frozen=True)
class ProbeGrid:
    a: float
    b: float
    n: int
    C: float
    K: int
    points: np.ndarray = field(repr=False)  # (n, K-1, n): points[j, k-2]
    directions: np.ndarray = field(repr=False)  # (n, n)

    @property
    def ks(self) -> range:
        return range(2, self.K + 1)

    def point(self, j: int, k: int) -> np.ndarray:
        return self.points[j, k - 2]


def smallest_K(a: float, b: float, C: float) -> int:
    """Smallest integer ``K >= 2`` with ``a + K a/(4C) >= b + a/(4C)``."""

    def covers(K):
        return a + K * a / (4 * C) >= b + a / (4 * C)

    # closed-form guess, then settle rounding at the boundary
    K = max(2, math.ceil(4 * C * (b - a) / a) + 1)
    while K > 2 and covers(K - 1):
        K -= 1
    while not covers(K):
        K += 1
    return K


def probe_grid(a: float, b: float, n: int, C: float = 1.0) -> ProbeGrid:
    if not (0 < a < b):
        raise DomainError(f"need 0 < a < b, got a={a}, b={b}")
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if not C > 0:
        raise DomainError(f"C must be positive, got {C}")
    K = smallest_K(a, b, C)
    eye = np.eye(n)
    ones = np.ones(n)
    points = np.empty((n, K - 1, n))
    directions = np.empty((n, n))
    for j in range(n):
        e, ep = eye[j], ones - eye[j]
        directions[j] = (2 * b - a) / a * C * ep - 0.5 * e
        for k in range(2, K + 1):
            points[j, k - 2] = a / 2 * ep + (a + k * a / (4 * C)) * e
    return ProbeGrid(a=a, b=b, n=n, C=C, K=K, points=points, directions=directions)


@dataclass(frozen=True)
class CriterionResult:
    grid: ProbeGrid
    table: np.ndarray  # (n, K-1): table[j, k-2] = max eigenvalue of F'(z[j,k]) d[j]
    m: int

    @property
    def lam(self) -> float:
        return float(self.table.min())

    @property
    def satisfied(self) -> bool:
        return self.lam > 0

    def rows(self):
        """(j, k, lambda_max) with 1-based j."""
        for j in range(self.grid.n):
            for k in self.grid.ks:
                yield j + 1, k, float(self.table[j, k - 2])

    def summary(self) -> dict:
        g = self.grid
        return {
            "C": g.C, "K": g.K, "lambda": self.lam, "satisfied": self.satisfied,
            "m": self.m, "n": g.n, "a": g.a, "b": g.b,
        }


def criterion_lambda(system: AssembledSystem, a: float, b: float, C: float = 1.0) -> CriterionResult:
    grid = probe_grid(a, b, system.n, C)
    table = np.empty((grid.n, grid.K - 1))
    for j in range(grid.n):
        for k in grid.ks:
            state = ForwardState(system, grid.point(j, k))
            table[j, k - 2] = max_eig(state.derivative(grid.directions[j]))
    return CriterionResult(grid=grid, table=table, m=system.m)


def lambda_at_point(system: AssembledSystem, x, C: float = 1.0) -> float:
    """``min_j max_eig(F'(x)(C (1 - e_j) - e_j))``; ``C = 1`` gives the pointwise criterion."""
    state = ForwardState(system, x)
    n = system.n
    eye = np.eye(n)
    return min(max_eig(state.derivative(C * (1 - eye[j]) - eye[j])) for j in range(n))


@dataclass
class ElectrodeSearch:
    m_min: int | None
    trace: list  # (m, lambda) for every m tried

    @property
    def found(self) -> bool:
        return self.m_min is not None


def system_for(config: GeometryConfig, refinement: int = 1) -> AssembledSystem:
    geometry = build_geometry(config)
    return assemble(generate_mesh(geometry, refinement), geometry)


def min_electrodes(
    config: GeometryConfig,
    n: int,
    a: float,
    b: float,
    C: float,
    m_max: int,
    refinement: int = 1,
    stop_at_first: bool = True,
    system_factory=system_for,
) -> ElectrodeSearch:
    """Smallest electrode count ``m <= m_max`` for which the criterion holds."""
    if m_max < 2:
        raise DomainError(f"m_max must be >= 2, got {m_max}")
    trace = []
    m_min = None
    for m in range(2, m_max + 1):
        system = system_factory(config.replace(n=n, m=m), refinement)
        lam = criterion_lambda(system, a, b, C).lam
        trace.append((m, lam))
        if lam > 0 and m_min is None:
            m_min = m
            if stop_at_first:
                break
    return ElectrodeSearch(m_min=m_min, trace=trace)
