"""JSON Schemas (draft 2020-12) for the summary files written by the experiments."""

_NUM = {"type": "number"}
_NUM_OR_NULL = {"type": ["number", "null"]}
_INT = {"type": "integer"}

MESH = {
    "type": "object",
    "required": ["n", "m", "refinement", "nodes", "triangles", "dofs", "issues"],
    "properties": {
        "n": _INT, "m": _INT, "refinement": _INT, "nodes": _INT, "triangles": _INT, "dofs": _INT,
        "issues": {"type": "array", "items": {"type": "string"}},
    },
}

CRITERION = {
    "type": "object",
    "required": ["C", "K", "lambda", "satisfied", "m", "n", "a", "b"],
    "properties": {
        "C": _NUM, "K": _INT, "lambda": _NUM, "satisfied": {"type": "boolean"},
        "m": _INT, "n": _INT, "a": _NUM, "b": _NUM,
    },
}

CERTIFY = {"type": "array", "minItems": 2, "maxItems": 2, "items": CRITERION}

SWEEP_N = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["n", "C", "K", "m_min", "found", "lambda_m_min", "m_extra", "lambda_m_extra"],
        "properties": {
            "n": _INT, "C": _NUM, "K": _INT, "m_min": {"type": ["integer", "null"]},
            "found": {"type": "boolean"}, "lambda_m_min": _NUM_OR_NULL,
            "m_extra": {"type": ["integer", "null"]}, "lambda_m_extra": _NUM_OR_NULL,
        },
    },
}

RECONSTRUCT = {
    "type": "object",
    "required": ["gamma_star", "objective", "status", "kkt_report", "n_iterations", "delta", "bound"],
    "properties": {
        "gamma_star": {"type": "array", "items": _NUM},
        "objective": _NUM,
        "status": {"enum": ["optimal", "infeasible", "max_iter"]},
        "kkt_report": {
            "type": "object",
            "required": ["phase1_slack", "schur_min_eig", "box_slack", "barrier_t", "gap_bound"],
        },
        "n_iterations": _INT,
        "delta": _NUM,
        "bound": {"type": "object", "required": ["delta", "bound", "lambda", "note"]},
        "gamma_hat": {"type": "array", "items": _NUM},
        "error_inf": _NUM,
    },
}

LANDSCAPE = {
    "type": "object",
    "required": ["grid_resolution", "lsq_start", "max_sdp_error", "max_lsq_error",
                 "argmax_lsq_error", "failed_cells"],
    "properties": {
        "grid_resolution": _INT,
        "lsq_start": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
        "max_sdp_error": _NUM_OR_NULL,
        "max_lsq_error": _NUM_OR_NULL,
        "argmax_lsq_error": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
        "failed_cells": _INT,
    },
}

NOISE_SWEEP = {
    "type": "object",
    "required": ["n", "m", "lambda", "gamma_hat", "rows"],
    "properties": {
        "n": _INT, "m": _INT, "lambda": _NUM_OR_NULL,
        "gamma_hat": {"type": "array", "items": _NUM},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["delta", "error_inf", "status", "bound"],
                "properties": {"delta": _NUM, "error_inf": _NUM, "status": {"type": "string"},
                               "bound": _NUM_OR_NULL},
            },
        },
    },
}

BY_FILE = {
    "mesh.json": MESH,
    "certify.json": CERTIFY,
    "sweep_n.json": SWEEP_N,
    "reconstruct.json": RECONSTRUCT,
    "landscape.json": LANDSCAPE,
    "noise_sweep.json": NOISE_SWEEP,
}

CSV_COLUMNS = {
    "probe_C1.csv": ["j", "k", "lambda_max"],
    "probe_Cn1.csv": ["j", "k", "lambda_max"],
    "sweep_n.csv": ["n", "C", "K", "m_min", "found", "lambda_m_min", "m_extra", "lambda_m_extra"],
    "sweep_m.csv": ["n", "m", "dofs", "lambda_C1", "lambda_Cn1"],
    "reconstruct_trace.csv": ["iteration", "objective", "min_eig", "barrier_t"],
    "landscape.csv": ["gamma1", "gamma2", "sdp_error", "sdp_status", "lsq_error", "lsq_log10_error",
                      "lsq_converged"],
    "noise_sweep.csv": ["delta", "error_inf", "status", "bound"],
    "admissible.csv": ["delta", "gamma1", "gamma2", "admissible"],
}
