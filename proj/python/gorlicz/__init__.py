"""Obstacle problems, capacities and regularity diagnostics for generalized Orlicz energies."""

from ._core import (
    ArgumentError,
    Domain,
    DomainError,
    GeometryError,
    InfeasibleError,
    NotInvertibleError,
    ObstacleProblem,
    ParseError,
    Phi,
    Shape,
    Solution,
    WrongVariantError,
    ball_capacity,
    ball_capacity_bounds,
    boundary_continuity_check,
    caccioppoli_boundary,
    caccioppoli_interior_k,
    caccioppoli_interior_mean,
    capacity,
    check_A0,
    check_A1,
    check_aInc_aDec,
    classify_boundary_point,
    energy,
    gehring_estimate,
    luxemburg_norm,
    modular,
    run,
    solve,
    stationarity_residual,
)

__all__ = [name for name in dir() if not name.startswith("_")]
