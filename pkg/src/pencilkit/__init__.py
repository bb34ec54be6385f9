"""Laurent expansions of matrix pencil resolvents near isolated singularities."""

from .core import (Annulus, GeometricBoundEstimate, LaurentSeries, LinearPencil,
                   evaluate, fundamental_residuals, gelfand_radius,
                   geometric_bound_estimate)
from .determining import (BasicSolution, PoleSolution, basic_conditions, basic_solution,
                          check_basic, solve_determining)
from .errors import *  # noqa: F401,F403
from .laurent import (ResolventSample, coefficients_from_basic, contour_coefficient_oracle,
                      contour_coefficients, contour_series, evaluate_closed_form,
                      evaluate_partial_sum, resolvent_equation_residual)
from .markov import (PerturbedChainPencil, StochasticMatrix, closed_form_staircase,
                     fundamental_inverse, perturbed_pencil, read_chain_csv,
                     staircase_chain)
from .polynomial import (AugmentedPencil, PolynomialPencil, analytic_truncated_inverse,
                         augment, extract_block_series, poly_basic_solution,
                         poly_fundamental_residuals, poly_series)
from .spectral import (JordanChain, ProjectionPair, SingularitySet, SingularPoint,
                       expand_in_annulus, find_singularities, global_decomposition,
                       jordan_chain, projections, shift_pencil, weighted_shift,
                       weighted_shift_power_norm)

__version__ = "0.1.0"
