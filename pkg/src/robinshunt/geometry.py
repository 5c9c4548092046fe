"""Disc-in-disc geometry and structured polar P1 meshes.

The domain is the disc of radius ``outer_radius``; the inclusion is the
concentric disc of radius ``inner_radius`` whose boundary circle carries the
Robin interface.  The interface circle is split into ``n`` equal half-open
arcs, the outer circle carries ``m`` equal, equally spaced closed electrode
arcs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, MeshError

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-12
# angular resolution of refinement level 1 (sectors per full turn, before
# breakpoint insertion)
BASE_SECTORS = 24
INSULATED = -1


@dataclass(frozen=True)
class GeometryConfig:
    outer_radius: float = 1.0
    inner_radius: float = 0.5
    n: int = 2
    m: int = 4
    electrode_coverage: float = 0.5
    partition_phase: float = 0.0
    electrode_phase: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.inner_radius < self.outer_radius):
            raise ConfigurationError(
                f"need 0 < inner_radius < outer_radius, got {self.inner_radius}, {self.outer_radius}"
            )
        if int(self.n) != self.n or self.n < 2:
            raise ConfigurationError(f"n must be an integer >= 2, got {self.n}")
        if int(self.m) != self.m or self.m < 2:
            raise ConfigurationError(f"m must be an integer >= 2, got {self.m}")
        if not (0.0 < self.electrode_coverage < 1.0):
            raise ConfigurationError(
                f"electrode_coverage must lie in (0, 1), got {self.electrode_coverage}"
            )

    def replace(self, **changes) -> "GeometryConfig":
        from dataclasses import replace

        return replace(self, **changes)


def _wrap(theta):
    return np.mod(theta, TWO_PI)


def in_arc(theta, start: float, width: float, closed: bool, tol: float = ANGLE_TOL):
    """Vectorised membership of angles in the arc ``[start, start + width]``.

    With ``closed=False`` the arc is half-open, ``[start, start + width)``.
    """
    rel = _wrap(np.asarray(theta, dtype=float) - start)
    # angles just below ``start`` wrap to ~2*pi
    rel = np.where(rel > TWO_PI - tol, rel - TWO_PI, rel)
    if closed:
        return (rel >= -tol) & (rel <= width + tol)
    return (rel >= -tol) & (rel < width - tol)


@dataclass(frozen=True)
class Geometry:
    config: GeometryConfig
    partition_arcs: np.ndarray  # (n, 2) start, end; half-open
    electrode_arcs: np.ndarray  # (m, 2) start, end; closed

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def m(self) -> int:
        return self.config.m

    @property
    def electrode_width(self) -> float:
        return self.config.electrode_coverage * TWO_PI / self.config.m

    def partition_index(self, theta) -> np.ndarray:
        """Index j (0-based) of the interface arc containing each angle, -1 if none."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        out = np.full(theta.shape, -1, dtype=int)
        width = TWO_PI / self.n
        for j, (start, _) in enumerate(self.partition_arcs):
            hit = in_arc(theta, start, width, closed=False) & (out < 0)
            out[hit] = j
        return out

    def electrode_index(self, theta) -> np.ndarray:
        """Index k (0-based) of the electrode containing each angle, -1 if insulated."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        out = np.full(theta.shape, INSULATED, dtype=int)
        width = self.electrode_width
        for k, (start, _) in enumerate(self.electrode_arcs):
            out[in_arc(theta, start, width, closed=True)] = k
        return out

    def breakpoints(self) -> np.ndarray:
        """All arc endpoints, wrapped to [0, 2*pi), sorted and de-duplicated."""
        pts = np.concatenate(
            [self.partition_arcs[:, 0], self.electrode_arcs[:, 0], self.electrode_arcs[:, 1]]
        )
        return _unique_angles(_wrap(pts))


def _unique_angles(angles: np.ndarray, tol: float = ANGLE_TOL) -> np.ndarray:
    angles = np.sort(angles)
    keep = [angles[0]]
    for a in angles[1:]:
        if a - keep[-1] > tol:
            keep.append(a)
    if len(keep) > 1 and keep[0] + TWO_PI - keep[-1] <= tol:
        keep.pop()
    return np.asarray(keep)


def build_geometry(config: GeometryConfig) -> Geometry:
    n, m = config.n, config.m
    pstart = config.partition_phase + TWO_PI * np.arange(n) / n
    partition = np.column_stack([pstart, pstart + TWO_PI / n])

    width = config.electrode_coverage * TWO_PI / m
    centers = config.electrode_phase + TWO_PI * np.arange(m) / m
    electrodes = np.column_stack([centers - width / 2, centers + width / 2])

    gap = TWO_PI / m - width
    if gap <= ANGLE_TOL:
        raise ConfigurationError(f"electrodes overlap: gap between neighbours is {gap:.3g} rad")
    return Geometry(config=config, partition_arcs=partition, electrode_arcs=electrodes)


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming P1 triangulation of the disc.

    Index conventions are 0-based: ``regions`` holds 1 (inclusion) or 2
    (annulus), ``interface_tags`` the partition arc j in 0..n-1 and
    ``boundary_tags`` the electrode k in 0..m-1 or -1 for insulated edges.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    regions: np.ndarray
    interface_edges: np.ndarray
    interface_tags: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: np.ndarray
    electrode_nodes: tuple
    refinement: int
    geometry: Geometry
    angles: np.ndarray = field(repr=False)
    radii: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def dof_count(self) -> int:
        merged = sum(len(nodes) - 1 for nodes in self.electrode_nodes)
        return self.n_nodes - merged


def _sector_angles(geometry: Geometry, refinement: int) -> tuple[np.ndarray, int]:
    brk = geometry.breakpoints()
    gaps = np.diff(np.append(brk, brk[0] + TWO_PI))
    if gaps.min() < 1e-9:
        raise MeshError(
            f"arc endpoints closer than 1e-9 rad ({gaps.min():.3g}); cannot separate electrode endpoints"
        )
    h1 = TWO_PI / BASE_SECTORS
    pieces1 = np.maximum(1, np.ceil(gaps / h1 - 1e-9).astype(int))
    pieces = pieces1 * 2 ** (refinement - 1)
    angles = []
    for start, gap, p in zip(brk, gaps, pieces):
        angles.extend(start + gap * np.arange(p) / p)
    return np.asarray(angles), int(pieces1.sum())


def generate_mesh(geometry: Geometry, refinement: int = 1) -> Mesh:
    """Structured polar mesh: rings of nodes around a centre node.

    Every arc endpoint is a node angle, one node ring sits exactly on the
    interface circle.  Each level doubles both the sector and the ring count.
    """
    if refinement < 1:
        raise MeshError(f"refinement must be >= 1, got {refinement}")
    cfg = geometry.config
    R, rho = cfg.outer_radius, cfg.inner_radius

    angles, sectors1 = _sector_angles(geometry, refinement)
    S = len(angles)
    spacing1 = TWO_PI * R / sectors1
    scale = 2 ** (refinement - 1)
    rings_in = max(2, math.ceil(rho / spacing1 - 1e-9)) * scale
    rings_out = max(2, math.ceil((R - rho) / spacing1 - 1e-9)) * scale
    radii = np.concatenate(
        [rho * np.arange(1, rings_in + 1) / rings_in,
         rho + (R - rho) * np.arange(1, rings_out + 1) / rings_out]
    )
    radii[rings_in - 1] = rho
    radii[-1] = R
    n_rings = len(radii)

    cos, sin = np.cos(angles), np.sin(angles)
    nodes = np.zeros((1 + n_rings * S, 2))
    for ell, r in enumerate(radii):
        nodes[1 + ell * S: 1 + (ell + 1) * S] = np.column_stack([r * cos, r * sin])

    def ring(ell):
        return 1 + ell * S + np.arange(S)

    s_next = np.roll(np.arange(S), -1)
    tris, regs = [], []
    r0 = ring(0)
    tris.append(np.column_stack([np.zeros(S, dtype=int), r0, r0[s_next]]))
    regs.append(np.ones(S, dtype=int))
    for ell in range(n_rings - 1):
        a, d = ring(ell), ring(ell + 1)
        b, c = a[s_next], d[s_next]
        tris.append(np.column_stack([a, d, c]))
        tris.append(np.column_stack([a, c, b]))
        region = 1 if ell + 1 < rings_in else 2
        regs.extend([np.full(S, region), np.full(S, region)])
    triangles = np.concatenate(tris).astype(int)
    regions = np.concatenate(regs).astype(int)

    gaps = np.diff(np.append(angles, angles[0] + TWO_PI))
    mid = angles + gaps / 2

    gamma_ring = ring(rings_in - 1)
    interface_edges = np.column_stack([gamma_ring, gamma_ring[s_next]])
    interface_tags = geometry.partition_index(mid)

    outer = ring(n_rings - 1)
    boundary_edges = np.column_stack([outer, outer[s_next]])
    boundary_tags = geometry.electrode_index(mid)

    node_electrode = geometry.electrode_index(angles)
    electrode_nodes = tuple(outer[node_electrode == k] for k in range(geometry.m))
    for k, en in enumerate(electrode_nodes):
        if len(en) == 0:
            raise MeshError(f"electrode {k} contains no mesh node")

    return Mesh(
        nodes=nodes,
        triangles=triangles,
        regions=regions,
        interface_edges=interface_edges,
        interface_tags=interface_tags,
        boundary_edges=boundary_edges,
        boundary_tags=boundary_tags,
        electrode_nodes=electrode_nodes,
        refinement=refinement,
        geometry=geometry,
        angles=angles,
        radii=radii,
    )


def _edge_key(p, q):
    return (p, q) if p < q else (q, p)


def validate_mesh(mesh: Mesh, area_tol: float = 1e-14) -> list[str]:
    """Return a list of human-readable invariant violations (empty if valid)."""
    issues = []
    cfg = mesh.geometry.config
    R, rho = cfg.outer_radius, cfg.inner_radius
    rtol = 1e-12 * R

    areas = mesh.signed_areas()
    for t in np.flatnonzero(areas <= area_tol):
        issues.append(f"triangle {t}: not positively oriented or degenerate (area {areas[t]:.3g})")

    total = np.abs(areas).sum()
    disc = math.pi * R**2
    if not (0.95 * disc <= total <= disc * (1 + 1e-12)):
        issues.append(f"total area {total:.6g} outside [0.95, 1]*pi*R^2")

    edge_tris: dict[tuple, list[int]] = {}
    for t, tri in enumerate(mesh.triangles):
        for i in range(3):
            edge_tris.setdefault(_edge_key(tri[i], tri[(i + 1) % 3]), []).append(t)
    for e, ts in edge_tris.items():
        if len(ts) > 2:
            issues.append(f"edge {e}: shared by {len(ts)} triangles (non-conforming)")

    radius = np.hypot(mesh.nodes[:, 0], mesh.nodes[:, 1])
    for e, (p, q) in enumerate(mesh.interface_edges):
        if abs(radius[p] - rho) > rtol or abs(radius[q] - rho) > rtol:
            issues.append(f"interface edge {e}: endpoint off the interface circle")
        ts = edge_tris.get(_edge_key(p, q), [])
        sides = {int(mesh.regions[t]) for t in ts}
        if 1 not in sides:
            issues.append(f"interface edge {e}: missing inclusion-side (region 1) triangle")
        if 2 not in sides:
            issues.append(f"interface edge {e}: missing annulus-side (region 2) triangle")

    boundary = {_edge_key(p, q) for p, q in mesh.boundary_edges}
    for e, (p, q) in enumerate(mesh.boundary_edges):
        if abs(radius[p] - R) > rtol or abs(radius[q] - R) > rtol:
            issues.append(f"boundary edge {e}: endpoint off the outer circle")
        if len(edge_tris.get(_edge_key(p, q), [])) != 1:
            issues.append(f"boundary edge {e}: not adjacent to exactly one triangle")
    for e, ts in edge_tris.items():
        if len(ts) == 1 and e not in boundary:
            issues.append(f"edge {e}: lies on the mesh boundary but is not a tagged boundary edge")

    geo = mesh.geometry
    node_angles = np.mod(np.arctan2(mesh.nodes[:, 1], mesh.nodes[:, 0]), TWO_PI)
    on_gamma = np.abs(radius - rho) <= rtol
    on_outer = np.abs(radius - R) <= rtol
    for label, pts, mask in (
        ("partition endpoint", np.mod(geo.partition_arcs[:, 0], TWO_PI), on_gamma),
        ("electrode endpoint", np.mod(geo.electrode_arcs.ravel(), TWO_PI), on_outer),
    ):
        cand = node_angles[mask]
        for ang in pts:
            d = np.abs(np.mod(cand - ang + math.pi, TWO_PI) - math.pi)
            if d.size == 0 or d.min() > 1e-10:
                issues.append(f"{label} at angle {ang:.6f} is not a mesh node")

    for e, (p, q) in enumerate(mesh.interface_edges):
        ang = _edge_mid_angle(mesh.nodes[p], mesh.nodes[q])
        if geo.partition_index(ang)[0] != mesh.interface_tags[e]:
            issues.append(f"interface edge {e}: tag {mesh.interface_tags[e]} disagrees with its midpoint")
    for e, (p, q) in enumerate(mesh.boundary_edges):
        ang = _edge_mid_angle(mesh.nodes[p], mesh.nodes[q])
        if geo.electrode_index(ang)[0] != mesh.boundary_tags[e]:
            issues.append(f"boundary edge {e}: tag {mesh.boundary_tags[e]} disagrees with its midpoint")
    return issues


def _edge_mid_angle(p, q) -> float:
    mid = 0.5 * (np.asarray(p) + np.asarray(q))
    return float(np.mod(math.atan2(mid[1], mid[0]), TWO_PI))
