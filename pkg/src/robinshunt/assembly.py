"""P1 assembly in the electrode-constrained space.

All nodes of one electrode share a single degree of freedom, so every
discrete function is constant on each electrode and the electrode voltage
is simply the value of that DOF.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import AssemblyError, DomainError
from .geometry import Geometry, Mesh


@dataclass(frozen=True)
class Conductivity:
    sigma1: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise DomainError(f"conductivities must be positive, got {self.sigma1}, {self.sigma2}")


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    """Stiffness ``B0``, interface masses ``B[i]`` and electrode load matrix ``P``."""

    B0: sp.csr_matrix
    B: tuple
    P: np.ndarray
    dof_map: np.ndarray
    electrode_dofs: np.ndarray
    gamma_dofs: np.ndarray = field(repr=False)

    @property
    def D(self) -> int:
        return self.B0.shape[0]

    @property
    def n(self) -> int:
        return len(self.B)

    @property
    def m(self) -> int:
        return self.P.shape[1]

    def gamma_local(self) -> tuple:
        """Per arc ``(idx, block)``: ``B[i]`` restricted to its support, as positions
        ``idx`` into ``gamma_dofs`` and a small dense block; cached."""
        cached = self.__dict__.get("_gamma_local")
        if cached is None:
            pos = {d: p for p, d in enumerate(self.gamma_dofs)}
            cached = []
            for Bi in self.B:
                dofs = np.unique(Bi.nonzero()[0])
                cached.append((np.array([pos[d] for d in dofs], dtype=int), Bi[dofs][:, dofs].toarray()))
            cached = tuple(cached)
            object.__setattr__(self, "_gamma_local", cached)
        return cached


def build_dof_map(mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """Node -> DOF map merging each electrode's nodes; also returns one DOF per electrode."""
    owner = np.full(mesh.n_nodes, -1)
    for k, nodes in enumerate(mesh.electrode_nodes):
        if len(nodes) == 0:
            raise AssemblyError(f"electrode {k} has no mesh nodes")
        owner[nodes] = k
    dof_map = np.empty(mesh.n_nodes, dtype=int)
    electrode_dofs = np.full(mesh.geometry.m, -1)
    next_dof = 0
    for node in range(mesh.n_nodes):
        k = owner[node]
        if k < 0:
            dof_map[node] = next_dof
            next_dof += 1
        elif electrode_dofs[k] < 0:
            electrode_dofs[k] = next_dof
            dof_map[node] = next_dof
            next_dof += 1
        else:
            dof_map[node] = electrode_dofs[k]
    return dof_map, electrode_dofs


def p1_stiffness(nodes: np.ndarray, triangles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Element stiffness matrices (T, 3, 3) for unit conductivity, and element areas."""
    p = nodes[triangles]
    # edge vectors opposite each vertex, rotated: grad(phi_i) = rot(e_i) / (2 area)
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    area = 0.5 * (e[:, 2, 0] * (-e[:, 1, 1]) - e[:, 2, 1] * (-e[:, 1, 0]))
    K = np.einsum("tid,tjd->tij", e, e) / (4.0 * area)[:, None, None]
    return K, area


def assemble(mesh: Mesh, geometry: Geometry | None = None, sigma: Conductivity | None = None) -> AssembledSystem:
    geometry = geometry or mesh.geometry
    sigma = sigma or Conductivity()
    if len(mesh.electrode_nodes) != geometry.m:
        raise AssemblyError(f"mesh has {len(mesh.electrode_nodes)} electrodes, geometry {geometry.m}")
    dof_map, electrode_dofs = build_dof_map(mesh)
    D = int(dof_map.max()) + 1

    K, _ = p1_stiffness(mesh.nodes, mesh.triangles)
    coef = np.where(mesh.regions == 1, sigma.sigma1, sigma.sigma2)
    K *= coef[:, None, None]
    dofs = dof_map[mesh.triangles]
    rows = np.repeat(dofs, 3, axis=1).ravel()
    cols = np.tile(dofs, (1, 3)).ravel()
    B0 = sp.coo_matrix((K.ravel(), (rows, cols)), shape=(D, D)).tocsr()
    B0 = _exact_symmetric(B0)

    local_mass = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
    B = []
    for j in range(geometry.n):
        edges = mesh.interface_edges[mesh.interface_tags == j]
        if len(edges) == 0:
            raise AssemblyError(f"interface arc {j} contains no mesh edge")
        h = np.linalg.norm(mesh.nodes[edges[:, 1]] - mesh.nodes[edges[:, 0]], axis=1)
        M = h[:, None, None] * local_mass
        ed = dof_map[edges]
        rows = np.repeat(ed, 2, axis=1).ravel()
        cols = np.tile(ed, (1, 2)).ravel()
        Bj = sp.coo_matrix((M.ravel(), (rows, cols)), shape=(D, D)).tocsr()
        B.append(_exact_symmetric(Bj))

    P = np.zeros((D, geometry.m))
    P[electrode_dofs, np.arange(geometry.m)] = 1.0

    gamma_nodes = np.unique(mesh.interface_edges)
    gamma_dofs = np.unique(dof_map[gamma_nodes])
    return AssembledSystem(
        B0=B0, B=tuple(B), P=P, dof_map=dof_map, electrode_dofs=electrode_dofs, gamma_dofs=gamma_dofs
    )


def _exact_symmetric(M: sp.csr_matrix) -> sp.csr_matrix:
    M = (0.5 * (M + M.T)).tocsr()
    M.sum_duplicates()
    M.sort_indices()
    return M


def check_gamma(gamma, n: int) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=float).ravel()
    if gamma.shape != (n,):
        raise DomainError(f"expected {n} Robin coefficients, got shape {gamma.shape}")
    if not np.all(gamma > 0):
        raise DomainError(f"Robin coefficients must be positive, got {gamma}")
    return gamma


def system_matrix(system: AssembledSystem, gamma) -> sp.csr_matrix:
    """``B0 + sum_i gamma_i B[i]``."""
    gamma = check_gamma(gamma, system.n)
    A = system.B0.copy()
    for g, Bi in zip(gamma, system.B):
        A = A + g * Bi
    return A.tocsr()
