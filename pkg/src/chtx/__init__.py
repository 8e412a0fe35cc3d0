"""Chemotaxis with attraction, repulsion, and nonlocal logistic damping.

The package splits into five parts: model (coefficients, production
laws, the boundedness-regime classifier), grid (vertex-centered
operators and snapshot IO), solver (IMEX time integration), diagnostics
(norm tracking and inequality audits), and cli/config (the file-driven
front end).
"""

from .config import (AuditSpec, ConfigError, InitialData, OutputSpec,
                     RunConfig, SweepAxis, SweepSpec, parse_config,
                     serialize_config, substitute_parameter)
from .diagnostics import (DegenerateFieldError, DiagnosticsRecord, GNAudit,
                          MassBoundReport, ThetaCheck, audit_gn_on_field,
                          default_diag_k_set, gn_theta_lk, gn_theta_lrho,
                          k_floor_lrho, mass_bound_monitor, record)
from .grid import (Field, Grid, GridError, SnapshotFormatError,
                   grad_half_power_norm, integrate, integrate_power,
                   laplacian_neumann, read_snapshot, taxis_divergence,
                   write_snapshot)
from .model import (CaseTag, EnvelopeReport, GrowthClass, Margin, ModelParams,
                    ParameterError, ProductionKind, ProductionSpec,
                    RegimeVerdict, TheoremTag, classify_regime, eval_f,
                    eval_g, validate_envelope)
from .solver import (LinearSolveError, RunOutcome, RunStatus, SimulationState,
                     SolverConfig, detect_blowup, run, solve_elliptic_signal,
                     step_cell, step_parabolic_signal)

__version__ = "0.1.0"

__all__ = [
    "AuditSpec", "CaseTag", "ConfigError", "DegenerateFieldError",
    "DiagnosticsRecord", "EnvelopeReport", "Field", "GNAudit", "Grid",
    "GridError", "GrowthClass", "InitialData", "LinearSolveError", "Margin",
    "MassBoundReport", "ModelParams", "OutputSpec", "ParameterError",
    "ProductionKind", "ProductionSpec", "RegimeVerdict", "RunConfig",
    "RunOutcome", "RunStatus", "SimulationState", "SnapshotFormatError",
    "SolverConfig", "SweepAxis", "SweepSpec", "TheoremTag", "ThetaCheck",
    "audit_gn_on_field", "classify_regime", "default_diag_k_set",
    "detect_blowup", "eval_f", "eval_g", "grad_half_power_norm", "integrate",
    "integrate_power", "k_floor_lrho", "laplacian_neumann",
    "mass_bound_monitor", "parse_config", "read_snapshot", "record", "run",
    "serialize_config", "solve_elliptic_signal", "step_cell",
    "step_parabolic_signal", "substitute_parameter", "taxis_divergence",
    "validate_envelope", "write_snapshot", "gn_theta_lk", "gn_theta_lrho",
]
