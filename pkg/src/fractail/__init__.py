"""Forward spectral solutions and long-time tail analysis for time-fractional
diffusion-wave equations with separable sources mu(t) f(x).

Layout:

* mittag_leffler: hybrid evaluator for E_{alpha,beta} on the non-positive axis
* oracle: arbitrary-precision reference values (series + integral routes)
* sources: piecewise-polynomial temporal factors and source specifications
* spectral: 1-D Dirichlet eigensystems, projections, observation functionals
* forward: Duhamel modal coefficients, tail values, fractional calculus checks
* asymptotics: exponent ladders, source moments, composite tail models
* inverse: spectral-sum extraction, modal amplitude recovery, experiments
* scenario/runner/cli: TOML scenarios, experiment runner, command line
"""

__version__ = "0.1.0"

from .asymptotics import (
    ExponentLadder,
    MomentVector,
    TailModel,
    build_tail_model,
    exponent_ladder,
    kernel_moment_expansion,
    model_error_order,
    moments,
)
from .forward import (
    caputo_residual_check,
    decay_bound_check,
    duhamel_coefficient,
    psi_tail,
    riemann_liouville_integral,
)
from .inverse import (
    TailData,
    extract_A_sequence,
    geometric_grid,
    heat_contrast_experiment,
    recover_modal_amplitudes,
    scalar_moment_recovery,
    synthesize_tail,
    uniqueness_experiment,
)
from .mittag_leffler import MLParams, ml_eval
from .scenario import ConfigError, Scenario, load_scenario, parse_scenario
from .sources import PiecewisePolynomial, SourceSpec, constant_mu, polynomial_mu
from .spectral import (
    EigenSystem,
    ObservationSpec,
    SpatialProfile,
    discretize_sturm_liouville,
    laplacian_1d_dirichlet,
    pairing_coefficients,
)

__all__ = [
    "__version__",
    "MLParams",
    "ml_eval",
    "PiecewisePolynomial",
    "SourceSpec",
    "constant_mu",
    "polynomial_mu",
    "EigenSystem",
    "ObservationSpec",
    "SpatialProfile",
    "discretize_sturm_liouville",
    "laplacian_1d_dirichlet",
    "pairing_coefficients",
    "duhamel_coefficient",
    "psi_tail",
    "decay_bound_check",
    "caputo_residual_check",
    "riemann_liouville_integral",
    "ExponentLadder",
    "MomentVector",
    "TailModel",
    "exponent_ladder",
    "moments",
    "kernel_moment_expansion",
    "build_tail_model",
    "model_error_order",
    "TailData",
    "geometric_grid",
    "synthesize_tail",
    "extract_A_sequence",
    "recover_modal_amplitudes",
    "scalar_moment_recovery",
    "uniqueness_experiment",
    "heat_contrast_experiment",
    "ConfigError",
    "Scenario",
    "parse_scenario",
    "load_scenario",
]
