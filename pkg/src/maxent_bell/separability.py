"""Separability tests for two-qubit states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bell import SIGMA2_MAX, BellDiagonalState, uncertainty_lower_bound
from .qstate import PSD_TOL, as_density_matrix, partial_transpose

BELL_DIAGONAL_TOL = 1e-12


@dataclass(frozen=True)
class SeparabilityVerdict:
    """Outcome of a separability test.

    ``margin`` is signed so that it is positive when the state is strictly
    separable and negative when it is entangled. ``max_eigenvalue`` is the
    largest eigenvalue of the state itself.
    """

    separable: bool
    max_eigenvalue: float
    margin: float


def bell_diagonal_separable(state: BellDiagonalState) -> SeparabilityVerdict:
    """A Bell-diagonal state is separable iff no weight exceeds 1/2.

    Weight exactly 1/2 counts as separable.
    """
    pmax = float(np.max(state.probabilities))
    return SeparabilityVerdict(
        separable=pmax <= 0.5 + BELL_DIAGONAL_TOL,
        max_eigenvalue=pmax,
        margin=0.5 - pmax,
    )


def inseparability_threshold(b: float) -> float:
    """Dispersion above which the two-constraint state at mean b is entangled."""
    # round-off at b = 2 sqrt 2 would otherwise give -2e-15
    return max(SIGMA2_MAX - uncertainty_lower_bound(b), 0.0)


def ppt_check(rho) -> SeparabilityVerdict:
    """Peres-Horodecki test: separable iff the partial transpose is PSD.

    ``margin`` is the smallest eigenvalue of the partial transpose.
    """
    r = as_density_matrix(rho)
    pt = partial_transpose(r, "second")
    lo = float(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))[0])
    return SeparabilityVerdict(
        separable=lo >= -PSD_TOL,
        max_eigenvalue=float(np.linalg.eigvalsh(r)[-1]),
        margin=lo,
    )
