"""Numerical laboratory for the zero-mass equation
-Laplace u = lam |u|^{p-2} u - |u|^{q-2} u on balls, exteriors, and all of
space: exponent-plane classification, fibering analytics, radial shooting,
constrained variational ground states, linearized spectra, and parabolic
stability experiments."""

__version__ = "0.1.0"

from .exponents import (
    DomainKind,
    ExponentConfig,
    FiberingCase,
    RegionReport,
    SignPrediction,
    atlas,
    classify_region,
    d_star,
    fibering_case,
    sobolev_critical,
    sobolev_reciprocal,
)
from .fibering import (
    FiberDiagnostics,
    Functionals,
    PointKind,
    StationaryPoint,
    fiber_derivatives,
    fiber_energy,
    r_min_formula,
    rayleigh_lambda,
    rayleigh_lambda_E,
    resolve_functionals,
    stationary_points,
)
from .nehari import (
    Branch,
    GroundState,
    ThresholdEstimate,
    estimate_lambda_star,
    minimize_ground_state,
    project_to_nehari,
)
from .parabolic import (
    PerturbationSpec,
    StabilityVerdict,
    Trajectory,
    evolve,
    growth_rate_fit,
    stability_experiment,
)
from .shooting import (
    RadialProfile,
    SolveReport,
    functionals,
    pohozaev_identity_residual,
    read_profile,
    scale_to_unit_lambda,
    shoot_ball,
    shoot_entire,
    shoot_exterior,
    write_profile,
)
from .spectral import SpectralReport, instability_verdict, linearized_potential, min_eigenvalue

__all__ = [
    "__version__",
    "DomainKind",
    "ExponentConfig",
    "FiberingCase",
    "RegionReport",
    "SignPrediction",
    "atlas",
    "classify_region",
    "d_star",
    "fibering_case",
    "sobolev_critical",
    "sobolev_reciprocal",
    "FiberDiagnostics",
    "Functionals",
    "PointKind",
    "StationaryPoint",
    "fiber_derivatives",
    "fiber_energy",
    "r_min_formula",
    "rayleigh_lambda",
    "rayleigh_lambda_E",
    "resolve_functionals",
    "stationary_points",
    "Branch",
    "GroundState",
    "ThresholdEstimate",
    "estimate_lambda_star",
    "minimize_ground_state",
    "project_to_nehari",
    "PerturbationSpec",
    "StabilityVerdict",
    "Trajectory",
    "evolve",
    "growth_rate_fit",
    "stability_experiment",
    "RadialProfile",
    "SolveReport",
    "functionals",
    "pohozaev_identity_residual",
    "read_profile",
    "scale_to_unit_lambda",
    "shoot_ball",
    "shoot_entire",
    "shoot_exterior",
    "write_profile",
    "SpectralReport",
    "instability_verdict",
    "linearized_potential",
    "min_eigenvalue",
]
