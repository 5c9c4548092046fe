"""Batch experiments: certification sweeps, reconstruction landscapes, noise
sweeps and admissible-set grids, written as CSV/JSON.

Column contracts are documented in ``docs/experiments.md``.  Floats are
written with ``repr`` so a rerun with the same seed reproduces the files
byte for byte.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .assembly import AssembledSystem, assemble
from .certify import criterion_lambda, min_electrodes, smallest_K
from .errors import ConfigurationError
from .forward import measure
from .geometry import GeometryConfig, build_geometry, generate_mesh, validate_mesh
from .reconstruct import (
    NoisyInput,
    SdpOptions,
    admissible_set_sample,
    error_bound,
    lsq_baseline,
    noise_matrix,
    solve_sdp,
    solve_sdp_noisy,
)

log = logging.getLogger(__name__)

COMMANDS = ("mesh", "certify", "sweep-n", "sweep-m", "reconstruct", "landscape", "noise-sweep", "admissible")

DEFAULT_DELTAS = {
    "noise-sweep": [10.0 ** -k for k in range(1, 11)] + [0.0],
    "admissible": [0.0, 1e-4, 1e-3, 1e-2],
    "reconstruct": [0.0],
}
DEFAULT_GRID = {"landscape": 21, "admissible": 41}

EXPERIMENT_KEYS = (
    "a", "b", "n_values", "m_values", "m_max", "extra_electrodes", "deltas",
    "grid_resolution", "gamma_hat", "lsq_start", "measured", "workers", "cache",
    "gap_tol", "feas_tol", "max_outer", "max_newton", "seed", "with_bound",
)


@dataclass
class ExperimentSpec:
    command: str
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    refinement: int = 1
    a: float = 1.0
    b: float = 3.0
    n_values: list = None
    m_values: list = None
    m_max: int = 40
    extra_electrodes: int = 5
    deltas: list = None
    grid_resolution: int = None
    gamma_hat: list = None
    lsq_start: list = None
    measured: str = None
    seed: int = 0
    out_dir: Path = Path("out")
    workers: int = 1
    deterministic: bool = False
    cache: bool = True
    with_bound: bool = True
    sdp: SdpOptions = field(default_factory=SdpOptions)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigurationError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        if not (0 < self.a < self.b):
            raise ConfigurationError(f"need 0 < a < b, got a={self.a}, b={self.b}")
        self.out_dir = Path(self.out_dir)
        self.n_values = _as_list(self.n_values, [self.geometry.n])
        self.m_values = _as_list(self.m_values, [self.geometry.m])
        self.deltas = _as_list(self.deltas, DEFAULT_DELTAS.get(self.command, [0.0]))
        if self.grid_resolution is None:
            self.grid_resolution = DEFAULT_GRID.get(self.command, 21)
        for name in ("n_values", "m_values", "deltas"):
            if not getattr(self, name):
                raise ConfigurationError(f"{name} must be non-empty")
        if any(d < 0 for d in self.deltas):
            raise ConfigurationError("noise levels must be >= 0")
        if self.m_max < 2:
            raise ConfigurationError("m_max must be >= 2")
        if self.grid_resolution < 2:
            raise ConfigurationError("grid_resolution must be >= 2")
        if self.deterministic:
            self.workers = 1

    @classmethod
    def from_mapping(cls, command: str, values: dict, **overrides) -> "ExperimentSpec":
        unknown = set(values) - set(io.GEOMETRY_KEYS) - set(EXPERIMENT_KEYS)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        geometry, refinement = io.geometry_from_mapping(values)
        sdp_kw = {k: values[k] for k in ("gap_tol", "feas_tol", "max_outer", "max_newton") if k in values}
        kwargs = {k: values[k] for k in EXPERIMENT_KEYS if k in values and k not in sdp_kw}
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        sdp = SdpOptions(**sdp_kw, seed=kwargs.get("seed", 0))
        return cls(command=command, geometry=geometry, refinement=refinement, sdp=sdp, **kwargs)

    def cell_seeds(self, count: int) -> list:
        """Per-cell generators derived from the master seed and the cell index."""
        return [np.random.default_rng(s) for s in np.random.SeedSequence(self.seed).spawn(count)]


def _as_list(value, default):
    if value is None:
        return list(default)
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


# ---------------------------------------------------------------- helpers


def get_system(spec: ExperimentSpec, config: GeometryConfig | None = None) -> AssembledSystem:
    """Assemble (or load from the on-disk cache) the system for ``config``."""
    config = config or spec.geometry
    path = None
    if spec.cache:
        cache_dir = spec.out_dir / "cache"
        cache_dir.mkdir(parents=True, exist_ok=True)
        path = cache_dir / f"system-{io.system_key(config, spec.refinement)}.txt"
        if path.exists():
            return io.load_system(path)
    geometry = build_geometry(config)
    system = assemble(generate_mesh(geometry, spec.refinement), geometry)
    if path is not None:
        io.save_system(system, path)
        system = io.load_system(path)  # identical bits whether or not the cache was hit
    return system


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header: list, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_json(path: Path, payload) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o)}")


def _pool_map(fn, items, workers):
    if workers <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _gamma_hat(spec: ExperimentSpec, n: int) -> np.ndarray:
    if spec.gamma_hat is not None:
        g = np.asarray(_as_list(spec.gamma_hat, []), dtype=float)
        if g.shape != (n,):
            raise ConfigurationError(f"gamma_hat needs {n} entries, got {len(g)}")
        return g
    # separate stream from the per-cell noise seeds
    rng = np.random.default_rng([spec.seed, 1])
    return rng.uniform(spec.a, spec.b, n)


# ---------------------------------------------------------------- commands


def run_mesh(spec: ExperimentSpec) -> dict:
    geometry = build_geometry(spec.geometry)
    mesh = generate_mesh(geometry, spec.refinement)
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    io.write_mesh(mesh, spec.out_dir / "mesh.txt")
    summary = {
        "n": geometry.n, "m": geometry.m, "refinement": mesh.refinement,
        "nodes": mesh.n_nodes, "triangles": mesh.n_triangles, "dofs": mesh.dof_count(),
        "issues": validate_mesh(mesh),
    }
    write_json(spec.out_dir / "mesh.json", summary)
    return summary


def run_certify(spec: ExperimentSpec) -> dict:
    """Certification outputs for ``certify``, ``sweep-n`` and ``sweep-m``."""
    if spec.command == "sweep-n":
        return _sweep_n(spec)
    if spec.command == "sweep-m":
        return _sweep_m(spec)
    system = get_system(spec)
    n = system.n
    summaries = []
    for label, C in (("C1", 1.0), ("Cn1", float(n - 1))):
        res = criterion_lambda(system, spec.a, spec.b, C)
        write_csv(spec.out_dir / f"probe_{label}.csv", ["j", "k", "lambda_max"], res.rows())
        summaries.append(res.summary())
    write_json(spec.out_dir / "certify.json", summaries)
    return {"criteria": summaries}


def _sweep_n(spec: ExperimentSpec) -> dict:
    rows, summary = [], []
    factory = lambda cfg, ref: get_system(spec, cfg)  # noqa: E731
    for n in spec.n_values:
        for C in sorted({1.0, float(n - 1)}):
            search = min_electrodes(spec.geometry, n, spec.a, spec.b, C, spec.m_max,
                                    spec.refinement, system_factory=factory)
            K = smallest_K(spec.a, spec.b, C)
            lam_min = lam_extra = m_extra = None
            if search.found:
                lam_min = search.trace[-1][1]
                m_extra = search.m_min + spec.extra_electrodes
                sys_extra = get_system(spec, spec.geometry.replace(n=n, m=m_extra))
                lam_extra = criterion_lambda(sys_extra, spec.a, spec.b, C).lam
            rows.append([n, C, K, search.m_min, search.found, lam_min, m_extra, lam_extra])
            summary.append({"n": n, "C": C, "K": K, "m_min": search.m_min, "found": search.found,
                            "lambda_m_min": lam_min, "m_extra": m_extra, "lambda_m_extra": lam_extra,
                            "m_max": spec.m_max, "a": spec.a, "b": spec.b})
    write_csv(spec.out_dir / "sweep_n.csv",
              ["n", "C", "K", "m_min", "found", "lambda_m_min", "m_extra", "lambda_m_extra"], rows)
    write_json(spec.out_dir / "sweep_n.json", summary)
    return {"rows": summary}


def _sweep_m(spec: ExperimentSpec) -> dict:
    n = spec.geometry.n
    rows = []
    for m in spec.m_values:
        system = get_system(spec, spec.geometry.replace(m=m))
        lam1 = criterion_lambda(system, spec.a, spec.b, 1.0).lam
        lam2 = criterion_lambda(system, spec.a, spec.b, float(n - 1)).lam
        rows.append([n, m, system.D, lam1, lam2])
    write_csv(spec.out_dir / "sweep_m.csv", ["n", "m", "dofs", "lambda_C1", "lambda_Cn1"], rows)
    return {"rows": rows}


def run_reconstruct(spec: ExperimentSpec) -> dict:
    system = get_system(spec)
    delta = float(spec.deltas[0])
    if spec.measured:
        gamma_hat = None
        Y = io.read_matrix(spec.measured)
    else:
        gamma_hat = _gamma_hat(spec, system.n)
        Y = measure(system, gamma_hat)
        if delta > 0:
            Y = Y + noise_matrix(system.m, delta, spec.cell_seeds(1)[0])
    sol, report = solve_sdp_noisy(system, NoisyInput(Y, delta), spec.a, spec.b, spec.sdp)
    payload = sol.to_dict()
    payload["delta"] = delta
    payload["bound"] = report
    if gamma_hat is not None:
        payload["gamma_hat"] = gamma_hat.tolist()
        payload["error_inf"] = float(np.abs(sol.gamma_star - gamma_hat).max())
    write_json(spec.out_dir / "reconstruct.json", payload)
    write_csv(spec.out_dir / "reconstruct_trace.csv", ["iteration", "objective", "min_eig", "barrier_t"],
              ([it["iteration"], it["objective"], it["min_eig"], it["barrier_t"]] for it in sol.iterations))
    return payload


def _landscape_cell(args):
    system, gamma_hat, start, a, b, opts = args
    Y = measure(system, gamma_hat)
    try:
        sol = solve_sdp(system, Y, a, b, opts)
        sdp_err, sdp_status = float(np.linalg.norm(sol.gamma_star - gamma_hat)), sol.status
    except Exception as exc:  # recorded per cell, the sweep continues
        sdp_err, sdp_status = None, f"error: {exc}"
    try:
        lsq = lsq_baseline(system, Y, start, a, b)
        lsq_err, lsq_conv = float(np.linalg.norm(lsq.gamma - gamma_hat)), lsq.converged
    except Exception as exc:
        lsq_err, lsq_conv = None, f"error: {exc}"
    return sdp_err, sdp_status, lsq_err, lsq_conv


def run_landscape(spec: ExperimentSpec) -> dict:
    system = get_system(spec)
    if system.n != 2:
        raise ConfigurationError("landscape needs n = 2")
    axis = np.linspace(spec.a, spec.b, spec.grid_resolution)
    start = np.asarray(spec.lsq_start if spec.lsq_start is not None else [(spec.a + spec.b) / 2] * 2, float)
    cells = [(system, np.array([g1, g2]), start, spec.a, spec.b, spec.sdp) for g1 in axis for g2 in axis]
    results = _pool_map(_landscape_cell, cells, spec.workers)
    rows = []
    for (_, gh, *_), (sdp_err, sdp_status, lsq_err, lsq_conv) in zip(cells, results):
        log_lsq = None if lsq_err is None else float(np.log10(max(lsq_err, 1e-300)))
        rows.append([gh[0], gh[1], sdp_err, sdp_status, lsq_err, log_lsq, lsq_conv])
    write_csv(spec.out_dir / "landscape.csv",
              ["gamma1", "gamma2", "sdp_error", "sdp_status", "lsq_error", "lsq_log10_error", "lsq_converged"], rows)
    sdp_errs = [r[2] for r in rows if r[2] is not None]
    lsq_errs = [r[4] for r in rows if r[4] is not None]
    worst = max(rows, key=lambda r: -1 if r[4] is None else r[4])
    summary = {
        "grid_resolution": spec.grid_resolution, "lsq_start": start.tolist(),
        "max_sdp_error": max(sdp_errs) if sdp_errs else None,
        "max_lsq_error": max(lsq_errs) if lsq_errs else None,
        "argmax_lsq_error": [float(worst[0]), float(worst[1])],
        "failed_cells": sum(1 for r in rows if r[2] is None or r[4] is None),
    }
    write_json(spec.out_dir / "landscape.json", summary)
    return summary


def run_noise_sweep(spec: ExperimentSpec) -> dict:
    system = get_system(spec)
    n = system.n
    gamma_hat = _gamma_hat(spec, n)
    Y = measure(system, gamma_hat)
    lam = None
    if spec.with_bound:
        lam = criterion_lambda(system, spec.a, spec.b, float(n - 1)).lam
    rows = []
    for delta, rng in zip(spec.deltas, spec.cell_seeds(len(spec.deltas))):
        Yd = Y + noise_matrix(system.m, delta, rng)
        sol, _ = solve_sdp_noisy(system, NoisyInput(Yd, delta), spec.a, spec.b, spec.sdp)
        err = float(np.abs(sol.gamma_star - gamma_hat).max())
        rows.append([delta, err, sol.status, error_bound(delta, n, lam) if lam is not None else None])
    write_csv(spec.out_dir / "noise_sweep.csv", ["delta", "error_inf", "status", "bound"], rows)
    write_json(spec.out_dir / "noise_sweep.json",
               {"n": n, "m": system.m, "lambda": lam, "gamma_hat": gamma_hat.tolist(),
                "rows": [{"delta": r[0], "error_inf": r[1], "status": r[2], "bound": r[3]} for r in rows]})
    return {"rows": rows, "lambda": lam}


def run_admissible(spec: ExperimentSpec) -> dict:
    system = get_system(spec)
    if system.n != 2:
        raise ConfigurationError("admissible needs n = 2")
    gamma_hat = _gamma_hat(spec, 2) if spec.gamma_hat is not None else np.array([2.0, 2.0])
    Y = measure(system, gamma_hat)
    rows, counts = [], {}
    for delta, rng in zip(spec.deltas, spec.cell_seeds(len(spec.deltas))):
        Yd = Y + noise_matrix(system.m, delta, rng)
        axis, mask = admissible_set_sample(system, Yd, delta, spec.a, spec.b, spec.grid_resolution)
        counts[repr(float(delta))] = int(mask.sum())
        for p, g1 in enumerate(axis):
            for q, g2 in enumerate(axis):
                rows.append([delta, g1, g2, bool(mask[p, q])])
    write_csv(spec.out_dir / "admissible.csv", ["delta", "gamma1", "gamma2", "admissible"], rows)
    return {"counts": counts}


RUNNERS = {
    "mesh": run_mesh,
    "certify": run_certify,
    "sweep-n": run_certify,
    "sweep-m": run_certify,
    "reconstruct": run_reconstruct,
    "landscape": run_landscape,
    "noise-sweep": run_noise_sweep,
    "admissible": run_admissible,
}


def run(spec: ExperimentSpec) -> dict:
    return RUNNERS[spec.command](spec)
