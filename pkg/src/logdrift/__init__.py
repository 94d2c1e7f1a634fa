"""Numerical laboratory for a reaction-diffusion equation with white noise
and logarithmically superlinear drift on the unit interval.

The pieces: sine-mode fields and transforms (fields), dual-form Dirichlet
heat kernel estimates (heat_kernel), Volterra oracles for log-type integral
inequalities (gronwall), coefficient hypotheses and mollification
(coefficients), refinable modal noise (noise), the exponential-Euler solver
with coupling and factorization experiments (solver), ensemble moment
reports (moments), and the batch scenario front-end (cli).
"""

from .coefficients import (
    DiffusionSpec,
    DriftSpec,
    HypothesisViolation,
    MollifiedDrift,
    MollifierParams,
    drift_eval,
    growth_check,
    lipschitz_check,
    loglip_check,
    mollify,
    sigma_eval,
    sublinear_check,
    uniform_growth_check,
)
from .fields import Field
from .gronwall import (
    GronwallProblem,
    check_domination,
    make_problem_corpus,
    osgood_classifier,
    volterra_oracle,
)
from .heat_kernel import (
    KernelParams,
    kernel_eval,
    log_jensen_bound_check,
    semigroup_apply,
    spatial_modulus_estimate,
    time_increment_estimate,
)
from .moments import (
    MomentReport,
    convolution_scaling_report,
    epsilon_split_report,
    mc_sup_moment,
    mollified_uniformity_report,
    restart_window_report,
)
from .noise import (
    NoiseRealization,
    derive_path_seed,
    ito_isometry_convergence_check,
    sample_noise,
)
from .solver import (
    Grid,
    Trajectory,
    coupled_uniqueness_experiment,
    factorization_check,
    solve_l2_ensemble,
    solve_path,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "DiffusionSpec", "DriftSpec", "Field", "Grid", "GronwallProblem",
    "HypothesisViolation", "KernelParams", "MollifiedDrift",
    "MollifierParams", "MomentReport", "NoiseRealization", "Trajectory",
    "check_domination", "convolution_scaling_report",
    "coupled_uniqueness_experiment", "derive_path_seed", "drift_eval",
    "epsilon_split_report", "factorization_check", "growth_check",
    "ito_isometry_convergence_check", "kernel_eval", "lipschitz_check",
    "log_jensen_bound_check", "loglip_check", "make_problem_corpus",
    "mc_sup_moment", "mollified_uniformity_report", "mollify",
    "osgood_classifier", "restart_window_report", "sample_noise",
    "semigroup_apply", "sigma_eval", "solve_l2_ensemble", "solve_path",
    "spatial_modulus_estimate", "step", "sublinear_check",
    "time_increment_estimate", "uniform_growth_check", "volterra_oracle",
]
