"""Impact-driven pipe in soil: coupled pipe/soil wave dynamics with dry friction."""

from .errors import (
    ConfigError,
    DivergenceError,
    FitError,
    InconsistentSoilError,
    InvalidSpecError,
    MeshError,
    ResonanceError,
    SchemeInconsistencyError,
    StabilityError,
)
from .model import (
    Geometry,
    LoadKind,
    LoadPulse,
    Mesh,
    PipeSpec,
    SoilSpec,
    check_stability,
    derive_pipe,
    derive_soil,
    optimized_mesh,
)
from .radial import asymptote_step, oracle_constants, pulsed_response, solve_radial
from .solver import AxisymSolver, MediumModel, Scenario, run, run_rigid_medium
from .study import FitForm, StudySpec, fit, model_compare, run_study, slip_threshold_scan

__version__ = "0.1.0"

__all__ = [
    "AxisymSolver",
    "ConfigError",
    "DivergenceError",
    "FitError",
    "FitForm",
    "Geometry",
    "InconsistentSoilError",
    "InvalidSpecError",
    "LoadKind",
    "LoadPulse",
    "MediumModel",
    "Mesh",
    "MeshError",
    "PipeSpec",
    "ResonanceError",
    "Scenario",
    "SchemeInconsistencyError",
    "SoilSpec",
    "StabilityError",
    "StudySpec",
    "asymptote_step",
    "check_stability",
    "derive_pipe",
    "derive_soil",
    "fit",
    "model_compare",
    "optimized_mesh",
    "oracle_constants",
    "pulsed_response",
    "run",
    "run_rigid_medium",
    "run_study",
    "slip_threshold_scan",
    "solve_radial",
]
