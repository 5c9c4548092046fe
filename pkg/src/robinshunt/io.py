"""Plain-text file formats: key-value configs, mesh tables, system containers,
measurement matrices."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .assembly import AssembledSystem
from .errors import ConfigurationError
from .geometry import GeometryConfig, Mesh

GEOMETRY_KEYS = (
    "outer_radius", "inner_radius", "n", "m", "electrode_coverage",
    "partition_phase", "electrode_phase", "refinement",
)
_INT_KEYS = {"n", "m", "refinement"}


def parse_value(text: str):
    """int, float, bool, comma list of those, or the raw string."""
    text = text.strip()
    if "," in text:
        return [parse_value(part) for part in text.split(",") if part.strip()]
    low = text.lower()
    if low in ("true", "yes"):
        return True
    if low in ("false", "no"):
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def read_config(path) -> dict:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise ConfigurationError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = parse_value(value)
    return out


def geometry_from_mapping(values: dict) -> tuple[GeometryConfig, int]:
    kwargs = {}
    for key in GEOMETRY_KEYS[:-1]:
        if key in values:
            v = values[key]
            if key in _INT_KEYS:
                if not isinstance(v, int) or isinstance(v, bool):
                    raise ConfigurationError(f"{key} must be an integer, got {v!r}")
            elif not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ConfigurationError(f"{key} must be a number, got {v!r}")
            kwargs[key] = v
    refinement = values.get("refinement", 1)
    if not isinstance(refinement, int) or refinement < 1:
        raise ConfigurationError(f"refinement must be a positive integer, got {refinement!r}")
    return GeometryConfig(**kwargs), refinement


def write_config(path, values: dict) -> None:
    lines = []
    for key, v in values.items():
        if isinstance(v, (list, tuple)):
            v = ", ".join(repr(x) if isinstance(x, float) else str(x) for x in v)
        lines.append(f"{key} = {v}")
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------- meshes


def write_mesh(mesh: Mesh, path) -> None:
    """Sections ``nodes`` (id,x,y), ``triangles`` (id,n1,n2,n3,region),
    ``interface_edges`` (id,n1,n2,partition) and ``boundary_edges``
    (id,n1,n2,electrode|insulated).  Partition and electrode indices are 1-based."""
    with open(path, "w") as fh:
        fh.write(f"# robinshunt mesh, refinement {mesh.refinement}\n")
        fh.write(f"nodes {mesh.n_nodes}\n")
        for i, (x, y) in enumerate(mesh.nodes):
            fh.write(f"{i} {x:.17g} {y:.17g}\n")
        fh.write(f"triangles {mesh.n_triangles}\n")
        for i, (tri, reg) in enumerate(zip(mesh.triangles, mesh.regions)):
            fh.write(f"{i} {tri[0]} {tri[1]} {tri[2]} {reg}\n")
        fh.write(f"interface_edges {len(mesh.interface_edges)}\n")
        for i, ((p, q), tag) in enumerate(zip(mesh.interface_edges, mesh.interface_tags)):
            fh.write(f"{i} {p} {q} {tag + 1}\n")
        fh.write(f"boundary_edges {len(mesh.boundary_edges)}\n")
        for i, ((p, q), tag) in enumerate(zip(mesh.boundary_edges, mesh.boundary_tags)):
            label = "insulated" if tag < 0 else str(tag + 1)
            fh.write(f"{i} {p} {q} {label}\n")


def read_mesh_tables(path) -> dict:
    """Parse a file written by :func:`write_mesh` into raw arrays."""
    tables = {}
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    pos = 0
    while pos < len(lines):
        name, count = lines[pos].split()
        rows = [ln.split() for ln in lines[pos + 1: pos + 1 + int(count)]]
        tables[name] = rows
        pos += 1 + int(count)
    return tables


# ---------------------------------------------------------------- systems

SYSTEM_MAGIC = "robinshunt-system 1"


def save_system(system: AssembledSystem, path) -> None:
    """Text container: header ``D n m``, index vectors, one COO triplet block
    per matrix (B0, B1..Bn), then the dense D x m load matrix P."""
    with open(path, "w") as fh:
        fh.write(SYSTEM_MAGIC + "\n")
        fh.write(f"{system.D} {system.n} {system.m}\n")
        for name, vec in (("dof_map", system.dof_map), ("electrode_dofs", system.electrode_dofs),
                          ("gamma_dofs", system.gamma_dofs)):
            fh.write(f"{name} {len(vec)}\n")
            fh.write(" ".join(str(int(v)) for v in vec) + "\n")
        for name, M in [("B0", system.B0)] + [(f"B{i + 1}", Bi) for i, Bi in enumerate(system.B)]:
            coo = M.tocoo()
            fh.write(f"matrix {name} {coo.nnz}\n")
            for i, j, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{i} {j} {v:.17g}\n")
        fh.write("P\n")
        for row in system.P:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def load_system(path) -> AssembledSystem:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != SYSTEM_MAGIC:
        raise ValueError(f"{path}: not a robinshunt system container")
    D, n, m = map(int, lines[1].split())
    pos = 2
    vecs = {}
    for _ in range(3):
        name, _count = lines[pos].split()
        vecs[name] = np.array(lines[pos + 1].split(), dtype=int)
        pos += 2
    mats = []
    for _ in range(n + 1):
        _, _name, nnz = lines[pos].split()
        nnz = int(nnz)
        if nnz:
            trip = np.array([ln.split() for ln in lines[pos + 1: pos + 1 + nnz]], dtype=float)
            M = sp.coo_matrix((trip[:, 2], (trip[:, 0].astype(int), trip[:, 1].astype(int))), shape=(D, D))
        else:
            M = sp.coo_matrix((D, D))
        M = M.tocsr()
        M.sort_indices()
        mats.append(M)
        pos += 1 + nnz
    assert lines[pos] == "P"
    P = np.array([ln.split() for ln in lines[pos + 1: pos + 1 + D]], dtype=float).reshape(D, m)
    return AssembledSystem(
        B0=mats[0], B=tuple(mats[1:]), P=P, dof_map=vecs["dof_map"],
        electrode_dofs=vecs["electrode_dofs"], gamma_dofs=vecs["gamma_dofs"],
    )


def system_key(config: GeometryConfig, refinement: int) -> str:
    payload = json.dumps({**asdict(config), "refinement": refinement}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


# ---------------------------------------------------------------- measurements


def write_matrix(path, M) -> None:
    """Full m x m table, row-major, whitespace separated."""
    np.savetxt(path, np.asarray(M, dtype=float), fmt="%.17g")


def read_matrix(path) -> np.ndarray:
    M = np.atleast_2d(np.loadtxt(path, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise ConfigurationError(f"{path}: measurement matrix must be square, got {M.shape}")
    return M
