"""Electrode-count certification and convex reconstruction for the inverse
Robin transmission problem under the shunt electrode model."""

from .errors import (
    AssemblyError,
    ConfigurationError,
    DomainError,
    MeshError,
    NotPositiveDefinite,
)
from .geometry import Geometry, GeometryConfig, Mesh, build_geometry, generate_mesh, validate_mesh
from .assembly import AssembledSystem, Conductivity, assemble, system_matrix
from .forward import (
    ForwardState,
    convexity_gap,
    derivative_apply,
    evaluate,
    measure,
    solve_forward,
)
from .certify import (
    CriterionResult,
    ProbeGrid,
    criterion_lambda,
    lambda_at_point,
    min_electrodes,
    probe_grid,
)
from .reconstruct import (
    LmiProblem,
    NoisyInput,
    SdpOptions,
    SdpSolution,
    admissible_set_sample,
    lsq_baseline,
    schur_embed,
    solve_sdp,
    solve_sdp_noisy,
)

__version__ = "0.1.0"
