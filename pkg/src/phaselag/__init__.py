"""Discretizations and semigroup diagnostics for phase-lag thermoelastic plates."""

from .analysis import (GevreyFit, ResolventSweep, SingularResolventError, analyticity_indicator,
                       default_shift, gevrey_fit, growth_bound, log_grid, resolvent_sweep,
                       smoothing_rate, spectral_abscissa, verify_imaginary_axis)
from .linalg import (ConvergenceError, ExponentialOverflowError, GramMatrix, LinAlgError,
                     SingularMatrixError, eigenvalues, matrix_exponential, numerical_abscissa,
                     weighted_resolvent_norm)
from .modal import assemble_block, assemble_blocks, assemble_full, dirichlet_eigenvalues
from .model import (ConcentricDiscs, Interval, PhaseLagModel, Rectangle, ValidationError,
                    taylor_coefficients, validate)
from .operator import BlockSet, DiscreteOperator, energy_terms
from .radial import RadialGrid, assemble_transmission, radial_laplacian, refine
from .timeevo import (EvolutionTrace, energy_identity_residual, evolve_modal, evolve_radial,
                      initial_state, quasi_contraction_check)

__version__ = "0.1.0"
