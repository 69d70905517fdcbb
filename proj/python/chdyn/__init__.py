"""Cahn-Hilliard with dynamic boundary conditions: P1 bulk-surface solver."""

from ._core import (
    BoundaryMesh,
    BulkMesh,
    Discretization,
    Energies,
    InvalidArgument,
    InvalidState,
    Masses,
    Model,
    ModelConfig,
    NewtonSettings,
    SchemeOrder,
    SolverError,
    StepFailure,
    SystemState,
    Trajectory,
    build_unit_square_crisscross,
    cn_slope,
    consistent_initial_state,
    cosine_initial_state,
    dissipation_audit,
    energies,
    extract_boundary_chain,
    masses,
    mass_drift,
    observed_order,
    refine_boundary_chain,
    run_model_comparison,
    simulate,
    advance,
    trajectory_errors,
)

__all__ = [name for name in dir() if not name.startswith("_")]
