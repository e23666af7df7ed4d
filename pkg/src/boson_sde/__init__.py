"""Stochastic mode-vector simulation of open bosonic systems with two-body interactions."""

from .core import (
    DimensionError,
    SingularityError,
    ValidationError,
    sym_eig,
    to_complex,
    to_real,
    trace_distance,
    trace_norm,
)
from .diffusion import (
    NotPSDError,
    build_cancellation_X,
    compute_D,
    neg_mass,
    pauli_demo,
    project_Dperp,
    psd_part,
    radial_drift_correction,
    sqrt_2D,
)
from .dnse import DnseParams, alpha_upper_bound, build_dnse_spec, c_for_error, dnse_block, lambda_pm, ring_hopping
from .dynamics import SystemSpec, compute_B, compute_drift, dnse_rhs, integrate_meanfield, meanfield_rhs
from .fock import ResourceError, coherent_product_state, fock_basis, lift_one_body, lift_two_body
from .observables import Observable, expect_rho, expect_sde, output_error_bound, population
from .oracle import (
    FockModel,
    IntegrationAccuracyError,
    beta_witness,
    branch_average,
    ensemble_to_rho,
    error_bound_check,
    integrate_lindblad,
    lindblad_rhs,
    random_walk_trajectory,
)
from .rng import indexed_prng
from .sde import SdeConfig, TrajectoryEnsemble, em_step, run_ensemble

__version__ = "0.1.0"
