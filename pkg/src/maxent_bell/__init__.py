"""Maximum-entropy density matrices from Bell-CHSH mean and dispersion data."""

from .bell import (
    BellDiagonalState,
    ConstraintPoint,
    Region,
    bell_chsh_operator,
    bell_chsh_squared,
    classify_constraint_point,
    closed_form_multipliers,
    dispersion_gap,
    one_constraint_dispersion,
    one_constraint_state,
    partition_function,
    two_constraint_state,
    uncertainty_lower_bound,
)
from .qstate import (
    bell_basis_vectors,
    expectation,
    hermitian_eigendecompose,
    partial_transpose,
    relative_entropy,
    von_neumann_entropy,
)
from .separability import SeparabilityVerdict, bell_diagonal_separable, inseparability_threshold, ppt_check
from .solver import (
    ConstraintSet,
    MaxEntSolution,
    ThermoQuantities,
    dual_gradient,
    entropy_from_dual,
    gibbs_state,
    solve_dual,
    thermo_map,
)

__version__ = "0.1.0"
