"""First-kind quantum measurements, survival-time averaging and finite-dimensional scattering."""

from .core import (DegenerateRotation, SpectralObservable, are_compatible, build_projector,
                   check_density, detection_operator, ensemble_after_measurement, evolve_density,
                   measurement_probabilities, post_measurement_state)
from .errors import (ConvergenceError, DimensionMismatch, DomainError, FirstKindError,
                     InvalidStateError, QuadratureError, SingularSolveError, ZeroProbabilityError)
from .nondemolition import VBasis, VState, tilde_observable, v_density, v_post_state, v_probabilities
from .position import (GaussianPacket, SampledDistribution, dimensionless_W, renormalize_positive,
                       survival_position_exact, survival_position_first_order,
                       survival_position_gaussian, uncertainty_product)
from .rhs_grid import CellGrid, cell_amplitude, cell_amplitudes, completeness_residual, gram_matrix
from .scattering import (BandFamily, ScatteringModel, conditional_propagator, double_limit_probe,
                         lippmann_schwinger_iterate, scattered_state, transition_amplitudes,
                         wave_operators_and_s_matrix)
from .special import incomplete_gamma
from .survival import (SurvivalDistribution, nonideal_probability, q_factor, reduced_density_closed,
                       reduced_density_first_order, reduced_density_quadrature, survival_density)
from .tails import tail_moments

__version__ = "0.1.0"

__all__ = [
    "DegenerateRotation", "SpectralObservable", "are_compatible", "build_projector",
    "check_density", "detection_operator", "ensemble_after_measurement", "evolve_density",
    "measurement_probabilities", "post_measurement_state", "ConvergenceError", "DimensionMismatch",
    "DomainError", "FirstKindError", "InvalidStateError", "QuadratureError", "SingularSolveError",
    "ZeroProbabilityError", "VBasis", "VState", "tilde_observable", "v_density", "v_post_state",
    "v_probabilities", "GaussianPacket", "SampledDistribution", "dimensionless_W",
    "renormalize_positive", "survival_position_exact", "survival_position_first_order",
    "survival_position_gaussian", "uncertainty_product", "CellGrid", "cell_amplitude",
    "cell_amplitudes", "completeness_residual", "gram_matrix", "BandFamily", "ScatteringModel",
    "conditional_propagator", "double_limit_probe", "lippmann_schwinger_iterate",
    "scattered_state", "transition_amplitudes", "wave_operators_and_s_matrix", "incomplete_gamma",
    "SurvivalDistribution", "nonideal_probability", "q_factor", "reduced_density_closed",
    "reduced_density_first_order", "reduced_density_quadrature", "survival_density",
    "tail_moments",
]
