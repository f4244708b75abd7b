"""Closed forms for the Bell-CHSH mean/dispersion inference problem.

The Bell-CHSH operator ``B`` and its square are both diagonal in the Bell
basis, so every state of interest here is Bell-diagonal and is carried around
as four probabilities in the order ``(phi+, psi-, phi-, psi+)``.

Constraint plane: ``b = <B>`` and ``sigma2 = <B^2>`` (the raw second moment,
not the central variance). The admissible region is

    0 <= b <= 2*sqrt(2),    2*sqrt(2)*b <= sigma2 <= 8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import BoundaryError, DomainError, InvariantError
from .qstate import bell_basis_vectors, projector, shannon_entropy

SQRT2 = math.sqrt(2.0)
TWO_SQRT2 = 2.0 * SQRT2
SIGMA2_MAX = 8.0
FEASIBILITY_TOL = 1e-12
BOUNDARY_EPS = 1e-9
PROB_TOL = 1e-12

# exp() overflows just above this
_EXP_MAX = 709.0


class Region(str, Enum):
    INTERIOR = "interior"
    MIN_UNCERTAINTY_BOUNDARY = "min_uncertainty_boundary"
    SIGMA_MAX_BOUNDARY = "sigma_max_boundary"
    PURE_STATE_CORNER = "pure_state_corner"
    INFEASIBLE = "infeasible"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class BellDiagonalState:
    """State diagonal in the Bell basis.

    Probabilities within 1e-12 of [0, 1] are clamped into it; the sum is
    checked before clamping.
    """

    p_phi_plus: float
    p_psi_minus: float
    p_phi_minus: float
    p_psi_plus: float

    def __post_init__(self):
        raw = [float(x) for x in (self.p_phi_plus, self.p_psi_minus, self.p_phi_minus, self.p_psi_plus)]
        for name, p in zip(("p_phi_plus", "p_psi_minus", "p_phi_minus", "p_psi_plus"), raw):
            if not (-PROB_TOL <= p <= 1.0 + PROB_TOL):
                raise InvariantError(f"{name} = {p!r} is not a probability")
            object.__setattr__(self, name, min(max(p, 0.0), 1.0))
        total = math.fsum(raw)
        if abs(total - 1.0) > PROB_TOL:
            raise InvariantError(f"Bell-diagonal probabilities sum to {total!r}")

    @classmethod
    def from_probabilities(cls, p) -> "BellDiagonalState":
        p = list(p)
        if len(p) != 4:
            raise InvariantError(f"need four probabilities, got {len(p)}")
        return cls(*p)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([self.p_phi_plus, self.p_psi_minus, self.p_phi_minus, self.p_psi_plus])

    def to_matrix(self) -> np.ndarray:
        """4x4 density matrix in the computational basis."""
        return sum(p * projector(v) for p, v in zip(self.probabilities, bell_basis_vectors()))

    @property
    def mean(self) -> float:
        """<B> read off the probabilities."""
        return TWO_SQRT2 * (self.p_phi_plus - self.p_psi_minus)

    @property
    def dispersion(self) -> float:
        """<B^2> read off the probabilities."""
        return SIGMA2_MAX * (self.p_phi_plus + self.p_psi_minus)

    def entropy(self) -> float:
        return shannon_entropy(self.probabilities)


def bell_chsh_operator() -> np.ndarray:
    """B = 2 sqrt(2) (|phi+><phi+| - |psi-><psi-|) in the computational basis."""
    phi_plus, psi_minus, _, _ = bell_basis_vectors()
    b = TWO_SQRT2 * (projector(phi_plus) - projector(psi_minus))
    b.setflags(write=False)
    return b


def bell_chsh_squared() -> np.ndarray:
    """B^2 = 8 (|phi+><phi+| + |psi-><psi-|)."""
    phi_plus, psi_minus, _, _ = bell_basis_vectors()
    b2 = SIGMA2_MAX * (projector(phi_plus) + projector(psi_minus))
    b2.setflags(write=False)
    return b2


def _check_mean(b: float) -> float:
    b = float(b)
    if not (-FEASIBILITY_TOL <= b <= TWO_SQRT2 + FEASIBILITY_TOL):
        raise DomainError(f"Bell-CHSH mean b = {b!r} outside [0, 2*sqrt(2)]")
    return b


def uncertainty_lower_bound(b: float) -> float:
    """Minimum admissible dispersion 2 sqrt(2) b."""
    return TWO_SQRT2 * _check_mean(b)


def classify_constraint_point(b: float, sigma2: float, tol: float = FEASIBILITY_TOL) -> Region:
    b = float(b)
    sigma2 = float(sigma2)
    if not (-tol <= b <= TWO_SQRT2 + tol) or not (math.isfinite(b) and math.isfinite(sigma2)):
        return Region.INFEASIBLE
    lower = TWO_SQRT2 * b
    if sigma2 < lower - tol or sigma2 > SIGMA2_MAX + tol:
        return Region.INFEASIBLE
    on_lower = abs(sigma2 - lower) <= tol
    on_upper = abs(sigma2 - SIGMA2_MAX) <= tol
    if on_lower and on_upper:
        return Region.PURE_STATE_CORNER
    if on_lower:
        return Region.MIN_UNCERTAINTY_BOUNDARY
    if on_upper:
        return Region.SIGMA_MAX_BOUNDARY
    return Region.INTERIOR


@dataclass(frozen=True)
class ConstraintPoint:
    """A feasible (b, sigma2) pair; construction fails outside the admissible region."""

    b: float
    sigma2: float

    def __post_init__(self):
        if self.region is Region.INFEASIBLE:
            raise DomainError(
                f"(b={self.b!r}, sigma2={self.sigma2!r}) is infeasible: need 0 <= b <= 2*sqrt(2) "
                f"and 2*sqrt(2)*b <= sigma2 <= 8"
            )

    @property
    def region(self) -> Region:
        return classify_constraint_point(self.b, self.sigma2)


def two_constraint_state(b: float, sigma2: float) -> BellDiagonalState:
    """Maximum-entropy state for fixed <B> = b and <B^2> = sigma2."""
    pt = ConstraintPoint(b, sigma2)
    shift = TWO_SQRT2 * pt.b
    rest = 0.5 * (1.0 - pt.sigma2 / SIGMA2_MAX)
    return BellDiagonalState(
        (pt.sigma2 + shift) / 16.0,
        (pt.sigma2 - shift) / 16.0,
        rest,
        rest,
    )


def one_constraint_state(b: float) -> BellDiagonalState:
    """Maximum-entropy state for fixed <B> = b only.

    With t = b / (2 sqrt 2) the Gibbs weights factor as
    ((1+t)^2, (1-t)^2, 1-t^2, 1-t^2) / 4.
    """
    t = _check_mean(b) / TWO_SQRT2
    mixed = (1.0 - t * t) / 4.0
    return BellDiagonalState((1.0 + t) ** 2 / 4.0, (1.0 - t) ** 2 / 4.0, mixed, mixed)


def one_constraint_multiplier(b: float) -> float:
    """lambda_1 of the one-constraint Gibbs state, -artanh(t)/sqrt(2)."""
    t = _check_mean(b) / TWO_SQRT2
    if t >= 1.0 - BOUNDARY_EPS:
        raise BoundaryError(f"b = {b!r} is at the pure-state edge; the multiplier diverges")
    return -math.atanh(t) / SQRT2


def one_constraint_partition_function(lambda1: float) -> float:
    """Z_1 = Tr exp(-lambda_1 B) = 4 cosh^2(sqrt(2) lambda_1)."""
    return 4.0 * math.cosh(SQRT2 * lambda1) ** 2


def one_constraint_entropy(b: float) -> float:
    """S_1 = lambda_1 b + ln Z_1, valid away from b = 2 sqrt(2)."""
    lam = one_constraint_multiplier(b)
    return lam * b + math.log(one_constraint_partition_function(lam))


def one_constraint_dispersion(b: float) -> float:
    """<B^2> in the one-constraint state: 4 (1 + b^2 / 8)."""
    b = _check_mean(b)
    return 4.0 * (1.0 + b * b / 8.0)


def dispersion_gap(b: float) -> float:
    """Excess of the one-constraint dispersion over the minimum, (b - 2 sqrt 2)^2 / 2."""
    b = _check_mean(b)
    return 0.5 * (b - TWO_SQRT2) ** 2


def closed_form_multipliers(b: float, sigma2: float) -> tuple[float, float]:
    """Lagrange multipliers (lambda_1, lambda_2) for an interior point.

    Raises BoundaryError within BOUNDARY_EPS of any edge of the admissible
    region, where the logs blow up; use ``two_constraint_state`` there.
    """
    pt = ConstraintPoint(b, sigma2)
    plus = pt.sigma2 + TWO_SQRT2 * pt.b
    minus = pt.sigma2 - TWO_SQRT2 * pt.b
    gap = SIGMA2_MAX - pt.sigma2
    if min(plus, minus, gap) <= BOUNDARY_EPS:
        raise BoundaryError(
            f"(b={pt.b!r}, sigma2={pt.sigma2!r}) is within {BOUNDARY_EPS:g} of the boundary; "
            "multipliers diverge"
        )
    lp, lm, lg = math.log(plus), math.log(minus), math.log(gap)
    lambda1 = -(lp - lm) / (4.0 * SQRT2)
    lambda2 = -(lp + lm - 2.0 * lg) / 16.0
    return lambda1, lambda2


def _gibbs_exponents(lambda1: float, lambda2: float) -> tuple[float, float, float, float]:
    return (
        -TWO_SQRT2 * lambda1 - SIGMA2_MAX * lambda2,
        TWO_SQRT2 * lambda1 - SIGMA2_MAX * lambda2,
        0.0,
        0.0,
    )


def partition_function(lambda1: float, lambda2: float) -> float:
    """Z(lambda_1, lambda_2) for the exponent -(lambda_1 B + lambda_2 B^2)."""
    e = _gibbs_exponents(lambda1, lambda2)
    if not all(math.isfinite(x) for x in e):
        raise DomainError(f"non-finite multipliers ({lambda1!r}, {lambda2!r})")
    if max(e) > _EXP_MAX:
        raise OverflowError(
            f"partition function overflows at lambda=({lambda1!r}, {lambda2!r}): "
            f"exponent {max(e):.6g} > {_EXP_MAX:g}; use log_partition_function"
        )
    return math.exp(e[0]) + math.exp(e[1]) + 2.0


def log_partition_function(lambda1: float, lambda2: float) -> float:
    """ln Z computed with a max shift, finite for any finite multipliers."""
    e = np.array(_gibbs_exponents(lambda1, lambda2))
    m = e.max()
    return float(m + math.log(np.exp(e - m).sum()))


def gibbs_bell_state(lambda1: float, lambda2: float) -> BellDiagonalState:
    """Bell-diagonal Gibbs state Z^-1 exp(-(lambda_1 B + lambda_2 B^2))."""
    e = np.array(_gibbs_exponents(lambda1, lambda2))
    w = np.exp(e - e.max())
    return BellDiagonalState.from_probabilities(w / w.sum())
