"""Galerkin approximations of incompressible MHD on the torus with a-posteriori existence certificates."""

from ._accel import BACKEND
from .constants import ConstantsBundle, ConstantsPolicy, constants_for_run, estimate_constants, lattice_G, lattice_K, q_factor
from .control import (
    ControlProblem,
    ControlSolution,
    ExistenceCertificate,
    check_global_certificate,
    decay_envelope,
    e_mu,
    solve_control_n,
    solve_control_p_linear,
    zero_solution_bounds,
)
from .data import load_datum, make_abc, make_orszag_tang, parse_datum, save_datum
from .estimators import (
    DatumError,
    EstimatorSet,
    EstimatorTrajectory,
    datum_error,
    diff_error_field,
    eps_rough,
    eps_tautological,
    growth_D,
)
from .galerkin import GalerkinProblem, Trajectory, integrate, rhs, state_at
from .pipeline import RunConfig, emit_mode_cube, run_pipeline
from .spectral import (
    ModeSet,
    SpectralField,
    StatePair,
    bilinear_boldP,
    bilinear_P,
    galerkin_tail_bound,
    leray_project,
    modeset_dG,
    modeset_sum,
    pair_norm,
    sobolev_norm,
    tail_radius,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConstantsBundle",
    "ConstantsPolicy",
    "constants_for_run",
    "estimate_constants",
    "lattice_G",
    "lattice_K",
    "q_factor",
    "ControlProblem",
    "ControlSolution",
    "ExistenceCertificate",
    "check_global_certificate",
    "decay_envelope",
    "e_mu",
    "solve_control_n",
    "solve_control_p_linear",
    "zero_solution_bounds",
    "load_datum",
    "make_abc",
    "make_orszag_tang",
    "parse_datum",
    "save_datum",
    "DatumError",
    "EstimatorSet",
    "EstimatorTrajectory",
    "datum_error",
    "diff_error_field",
    "eps_rough",
    "eps_tautological",
    "growth_D",
    "GalerkinProblem",
    "Trajectory",
    "integrate",
    "rhs",
    "state_at",
    "RunConfig",
    "emit_mode_cube",
    "run_pipeline",
    "ModeSet",
    "SpectralField",
    "StatePair",
    "bilinear_boldP",
    "bilinear_P",
    "galerkin_tail_bound",
    "leray_project",
    "modeset_dG",
    "modeset_sum",
    "pair_norm",
    "sobolev_norm",
    "tail_radius",
    "__version__",
]
