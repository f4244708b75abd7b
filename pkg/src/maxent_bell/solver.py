"""Jaynes maximum-entropy inference through the convex Lagrange dual.

Given Hermitian observables A_i and targets a_i, the entropy maximizer has
the Gibbs form ``rho = exp(-sum_i lambda_i A_i) / Z``. The multipliers
minimize the dual objective ``ln Z(lambda) + sum_i lambda_i a_i``, whose
gradient is ``a_i - Tr(rho A_i)``; the optimum value equals the entropy.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bell import bell_chsh_operator, bell_chsh_squared
from .errors import (
    BoundaryDivergenceError,
    DimensionError,
    InfeasibleError,
    LinearDependenceError,
    NotConvergedError,
)
from .qstate import as_hermitian, von_neumann_entropy

log = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-12
GRAM_RANK_TOL = 1e-10
HESSIAN_COND_MAX = 1e12
MAX_HALVINGS = 40
ARMIJO = 1e-4


@dataclass(frozen=True)
class ConstraintSet:
    """Observables with target expectation values.

    Targets are checked against each observable's spectral range, and the
    traceless parts of the observables must be linearly independent.
    """

    observables: tuple
    targets: tuple
    names: tuple = None

    def __post_init__(self):
        obs = tuple(as_hermitian(a) for a in self.observables)
        targets = tuple(float(t) for t in self.targets)
        if not obs:
            raise ValueError("constraint set is empty")
        if len(obs) != len(targets):
            raise ValueError(f"{len(obs)} observables but {len(targets)} targets")
        names = self.names
        if names is None:
            names = tuple(f"A{i}" for i in range(len(obs)))
        names = tuple(str(n) for n in names)
        if len(names) != len(obs):
            raise ValueError("names and observables differ in length")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate observable names in {names}")
        d = obs[0].shape[0]
        for name, a in zip(names, obs):
            if a.shape[0] != d:
                raise DimensionError(f"observable {name} has dim {a.shape[0]}, expected {d}")
        for name, a, t in zip(names, obs, targets):
            if not math.isfinite(t):
                raise InfeasibleError(f"target for {name} is not finite")
            w = np.linalg.eigvalsh(a)
            if t < w[0] - FEASIBILITY_TOL or t > w[-1] + FEASIBILITY_TOL:
                raise InfeasibleError(
                    f"target {t:.12g} for {name} lies outside its spectral range [{w[0]:.12g}, {w[-1]:.12g}]"
                )
        _check_independent(obs, names)
        object.__setattr__(self, "observables", obs)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "names", names)

    @property
    def dim(self) -> int:
        return self.observables[0].shape[0]

    def __len__(self) -> int:
        return len(self.observables)

    @classmethod
    def bell_chsh(cls, b: float, sigma2: float | None = None) -> "ConstraintSet":
        """Mean of B, and optionally its raw second moment <B^2>."""
        if sigma2 is None:
            return cls((bell_chsh_operator(),), (b,), ("bell_chsh",))
        return cls((bell_chsh_operator(), bell_chsh_squared()), (b, sigma2), ("bell_chsh", "bell_chsh_squared"))


def _check_independent(obs, names) -> None:
    d = obs[0].shape[0]
    eye = np.eye(d)
    traceless = [a - np.trace(a).real / d * eye for a in obs]
    gram = np.array([[np.vdot(x, y).real for y in traceless] for x in traceless])
    w = np.linalg.eigvalsh(gram)
    if w[-1] <= 0 or w[0] < GRAM_RANK_TOL * w[-1]:
        raise LinearDependenceError(
            f"observables {list(names)} are linearly dependent modulo the identity "
            f"(Gram eigenvalues {w[0]:.3e} .. {w[-1]:.3e})"
        )


@dataclass(frozen=True)
class MaxEntSolution:
    multipliers: np.ndarray
    state: np.ndarray
    ln_Z: float
    entropy: float
    residuals: np.ndarray
    iterations: int
    converged: bool
    objective_history: tuple = field(default=(), repr=False)


@dataclass(frozen=True)
class ThermoQuantities:
    """Thermodynamic reading of the multipliers: lambda_1 = -beta, lambda_2 = -beta*mu.

    ``mu`` is None when lambda_1 = 0.
    """

    beta: float
    mu: float | None
    free_energy: float


def _stack(observables) -> np.ndarray:
    obs = [as_hermitian(a) for a in observables]
    if not obs:
        raise ValueError("need at least one observable")
    d = obs[0].shape
    for a in obs:
        if a.shape != d:
            raise DimensionError(f"observable dims differ: {a.shape} vs {d}")
    return np.stack(obs)


def _lambdas(lambdas, k: int) -> np.ndarray:
    lam = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if lam.shape != (k,):
        raise DimensionError(f"expected {k} multipliers, got shape {lam.shape}")
    if not np.all(np.isfinite(lam)):
        raise ValueError(f"non-finite multipliers {lam}")
    return lam


def _gibbs(stack: np.ndarray, lam: np.ndarray) -> tuple[np.ndarray, float]:
    exponent = -np.tensordot(lam, stack, axes=1)
    exponent = 0.5 * (exponent + exponent.conj().T)
    w, v = np.linalg.eigh(exponent)
    shift = w[-1]
    e = np.exp(w - shift)
    z = e.sum()
    rho = (v * (e / z)) @ v.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho, float(shift + math.log(z))


def _means(stack: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return np.einsum("kij,ji->k", stack, rho).real


def gibbs_state(observables: Sequence, lambdas) -> tuple[np.ndarray, float]:
    """Return ``(rho, ln_Z)`` for rho = exp(-sum lambda_i A_i) / Z."""
    stack = _stack(observables)
    return _gibbs(stack, _lambdas(lambdas, len(stack)))


def dual_objective(observables: Sequence, lambdas, targets) -> float:
    """ln Z(lambda) + lambda . targets; convex, minimized by the max-entropy multipliers."""
    stack = _stack(observables)
    lam = _lambdas(lambdas, len(stack))
    _, ln_z = _gibbs(stack, lam)
    return ln_z + float(lam @ np.asarray(targets, dtype=float))


def dual_gradient(observables: Sequence, lambdas, targets) -> np.ndarray:
    """Residuals Tr(rho(lambda) A_i) - target_i; zero at the solution.

    Equivalently ``-d ln Z / d lambda_i - target_i``.
    """
    stack = _stack(observables)
    lam = _lambdas(lambdas, len(stack))
    targets = np.asarray(targets, dtype=float)
    if targets.shape != lam.shape:
        raise DimensionError(f"expected {len(lam)} targets, got shape {targets.shape}")
    rho, _ = _gibbs(stack, lam)
    return _means(stack, rho) - targets


def _covariance(stack: np.ndarray, rho: np.ndarray, means: np.ndarray) -> np.ndarray:
    # symmetrized covariance 1/2 Tr(rho {A_i, A_j}) - <A_i><A_j>
    ra = np.einsum("ij,kjl->kil", rho, stack)
    second = np.einsum("kij,mji->km", ra, stack).real
    second = 0.5 * (second + second.T)
    return second - np.outer(means, means)


def _check_edges(constraints: ConstraintSet) -> None:
    for name, a, t in zip(constraints.names, constraints.observables, constraints.targets):
        w = np.linalg.eigvalsh(a)
        if min(t - w[0], w[-1] - t) <= FEASIBILITY_TOL:
            raise BoundaryDivergenceError(
                f"target {t:.12g} for {name} sits on the edge of its spectrum [{w[0]:.12g}, {w[-1]:.12g}]; "
                "the multipliers are unbounded, use a closed-form state instead"
            )


def solve_dual(
    constraints: ConstraintSet,
    initial_lambdas=None,
    tolerance: float = 1e-10,
    max_iterations: int = 200,
    multiplier_cap: float = 1e4,
) -> MaxEntSolution:
    """Damped Newton iteration on the convex dual.

    The Hessian is approximated by the symmetrized covariance of the
    observables in the current Gibbs state (exact when they commute). Steps
    are accepted by Armijo backtracking on the dual objective; when the
    covariance is numerically singular the residual itself is used as a
    gradient-descent direction.

    Returns a solution with ``converged=False`` if ``max_iterations`` is hit
    or no step makes progress. Raises BoundaryDivergenceError once any
    multiplier exceeds ``multiplier_cap`` in magnitude.
    """
    _check_edges(constraints)
    stack = np.stack(constraints.observables)
    targets = np.array(constraints.targets)
    k = len(targets)
    lam = np.zeros(k) if initial_lambdas is None else _lambdas(initial_lambdas, k).copy()

    def evaluate(x):
        rho, ln_z = _gibbs(stack, x)
        means = _means(stack, rho)
        return rho, ln_z, means, ln_z + float(x @ targets)

    rho, ln_z, means, obj = evaluate(lam)
    history = [obj]
    converged = False
    iterations = 0
    while True:
        resid = means - targets
        if np.max(np.abs(resid)) <= tolerance:
            converged = True
            break
        if iterations >= max_iterations:
            log.warning("dual solve stopped after %d iterations, max residual %.3e", iterations, np.max(np.abs(resid)))
            break
        cov = _covariance(stack, rho, means)
        if np.linalg.cond(cov) > HESSIAN_COND_MAX:
            step = resid.copy()
        else:
            step = np.linalg.solve(cov, resid)
        slope = -float(resid @ step)  # directional derivative of the objective
        rnorm = np.max(np.abs(resid))
        s = 1.0
        accepted = None
        for _ in range(MAX_HALVINGS + 1):
            cand = lam + s * step
            c_rho, c_lnz, c_means, c_obj = evaluate(cand)
            if c_obj <= obj + ARMIJO * s * slope:
                accepted = cand
                break
            # objective differences below round-off: fall back to residual decrease
            if abs(s * slope) <= 1e-13 * max(1.0, abs(obj)) and np.max(np.abs(c_means - targets)) < rnorm:
                accepted = cand
                break
            s *= 0.5
        if accepted is None:
            log.warning("line search failed at iteration %d, max residual %.3e", iterations, rnorm)
            break
        lam = accepted
        rho, ln_z, means, obj = c_rho, c_lnz, c_means, c_obj
        history.append(obj)
        iterations += 1
        if np.max(np.abs(lam)) > multiplier_cap:
            raise BoundaryDivergenceError(
                f"multipliers exceeded cap {multiplier_cap:g} after {iterations} iterations; "
                "the targets lie on the boundary of the feasible set",
                multipliers=lam.copy(),
            )

    return MaxEntSolution(
        multipliers=lam,
        state=rho,
        ln_Z=ln_z,
        entropy=von_neumann_entropy(rho),
        residuals=means - targets,
        iterations=iterations,
        converged=converged,
        objective_history=tuple(history),
    )


def entropy_from_dual(solution: MaxEntSolution, constraints: ConstraintSet) -> float:
    """Entropy as ln Z + sum_i lambda_i target_i."""
    if not solution.converged:
        raise NotConvergedError("entropy from the dual needs a converged solution")
    return solution.ln_Z + float(np.dot(solution.multipliers, constraints.targets))


def thermo_map(lambda1: float, lambda2: float, ln_Z: float) -> ThermoQuantities:
    """Inverse temperature, chemical potential and free energy (taken as ln Z)."""
    beta = -float(lambda1)
    mu = None if lambda1 == 0 else float(lambda2) / float(lambda1)
    return ThermoQuantities(beta=beta if beta != 0 else 0.0, mu=mu, free_energy=float(ln_Z))
