"""Closed-form versus numerical cross-checks run by ``maxent-bell verify``.

Each suite returns a :class:`SuiteResult` holding one or more checks with the
worst deviation seen, its tolerance and the grid point where it occurred.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bell import (
    SQRT2,
    BellDiagonalState,
    TWO_SQRT2,
    SIGMA2_MAX,
    bell_chsh_operator,
    bell_chsh_squared,
    closed_form_multipliers,
    dispersion_gap,
    gibbs_bell_state,
    one_constraint_dispersion,
    one_constraint_state,
    two_constraint_state,
    uncertainty_lower_bound,
)
from .qstate import (
    bell_basis_vectors,
    expectation,
    pure_state_fidelity,
    random_density_matrix,
    random_hermitian,
    relative_entropy,
    to_bell_basis,
    von_neumann_entropy,
)
from .separability import bell_diagonal_separable, inseparability_threshold, ppt_check
from .solver import ConstraintSet, dual_gradient, entropy_from_dual, gibbs_state, solve_dual
from .sweep import SweepSpec, render_csv, run_sweep

SEED = 20240601


@dataclass
class Check:
    name: str
    worst: float
    tolerance: float
    where: str = ""
    # False for "at least" checks, where worst must be >= -tolerance
    upper: bool = True

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.worst):
            return False
        return self.worst <= self.tolerance if self.upper else self.worst >= -self.tolerance


@dataclass
class SuiteResult:
    name: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


class _Worst:
    """Track the largest value seen and where."""

    def __init__(self, name, tolerance, upper=True):
        self.check = Check(name, -math.inf if upper else math.inf, tolerance, upper=upper)

    def update(self, value, where):
        value = float(value)
        c = self.check
        if math.isnan(value):
            c.worst, c.where = math.inf, where
        elif (c.upper and value > c.worst) or (not c.upper and value < c.worst):
            c.worst, c.where = value, where


def interior_grid(n: int = 20):
    """n x n points strictly inside the admissible (b, sigma2) region."""
    for j in range(1, n + 1):
        b = TWO_SQRT2 * j / (n + 1)
        lo = uncertainty_lower_bound(b)
        for i in range(1, n + 1):
            yield b, lo + (SIGMA2_MAX - lo) * i / (n + 1)


def full_grid(n: int = 21):
    """n x n points covering the closed region, boundaries included."""
    for b in np.linspace(0.0, TWO_SQRT2, n):
        lo = uncertainty_lower_bound(b)
        for f in np.linspace(0.0, 1.0, n):
            yield float(b), lo + (SIGMA2_MAX - lo) * float(f)


def b_grid(n: int = 100) -> np.ndarray:
    return np.linspace(0.0, TWO_SQRT2, n)


def _bell_probs(rho) -> np.ndarray:
    return np.diag(to_bell_basis(rho)).real


def suite_two_constraint_state() -> SuiteResult:
    prob = _Worst("max |p_solver - p_closed|", 1e-8)
    resid = _Worst("max |achieved - target|", 1e-10)
    conv = _Worst("non-converged solves", 0)
    for b, s2 in interior_grid():
        sol = solve_dual(ConstraintSet.bell_chsh(b, s2), tolerance=1e-11)
        where = f"b={b:.12g}, sigma2={s2:.12g}"
        conv.update(0 if sol.converged else 1, where)
        prob.update(np.max(np.abs(_bell_probs(sol.state) - two_constraint_state(b, s2).probabilities)), where)
        resid.update(np.max(np.abs(sol.residuals)), where)
    return SuiteResult("two-constraint-state", [prob.check, resid.check, conv.check])


def suite_multipliers() -> SuiteResult:
    lam_dev = _Worst("max |lambda_solver - lambda_closed|", 1e-6)
    round_trip = _Worst("closed multipliers -> Gibbs state vs closed-form probabilities", 1e-10)
    scalar_trip = _Worst("closed multipliers -> Bell-diagonal Gibbs weights", 1e-10)
    obs = (bell_chsh_operator(), bell_chsh_squared())
    for b, s2 in interior_grid():
        where = f"b={b:.12g}, sigma2={s2:.12g}"
        closed = np.array(closed_form_multipliers(b, s2))
        sol = solve_dual(ConstraintSet.bell_chsh(b, s2), tolerance=1e-11)
        lam_dev.update(np.max(np.abs(sol.multipliers - closed)), where)
        expected = two_constraint_state(b, s2).probabilities
        rho, _ = gibbs_state(obs, closed)
        round_trip.update(np.max(np.abs(_bell_probs(rho) - expected)), where)
        scalar_trip.update(np.max(np.abs(gibbs_bell_state(*closed).probabilities - expected)), where)
    return SuiteResult("multipliers", [lam_dev.check, round_trip.check, scalar_trip.check])


def suite_one_constraint_dispersion() -> SuiteResult:
    ident = _Worst("|<B^2>_one-constraint - 4(1 + b^2/8)|", 1e-12)
    mean = _Worst("|<B>_one-constraint - b|", 1e-12)
    solver = _Worst("max |p_closed - p_solver| (one constraint)", 1e-8)
    b_op, b2_op = bell_chsh_operator(), bell_chsh_squared()
    for b in b_grid():
        rho = one_constraint_state(b).to_matrix()
        where = f"b={b:.12g}"
        ident.update(abs(expectation(rho, b2_op) - one_constraint_dispersion(b)), where)
        mean.update(abs(expectation(rho, b_op) - b), where)
    for b in b_grid(12)[1:-1]:
        sol = solve_dual(ConstraintSet.bell_chsh(b), tolerance=1e-12)
        solver.update(np.max(np.abs(_bell_probs(sol.state) - one_constraint_state(b).probabilities)), f"b={b:.12g}")
    return SuiteResult("one-constraint-dispersion", [ident.check, mean.check, solver.check])


def suite_dispersion_gap() -> SuiteResult:
    ident = _Worst("|sigma2_J1 - sigma2_min - (b - 2 sqrt 2)^2 / 2|", 1e-12)
    sign = _Worst("min gap (must be >= 0)", 0.0, upper=False)
    for b in b_grid():
        where = f"b={b:.12g}"
        gap = one_constraint_dispersion(b) - uncertainty_lower_bound(b)
        ident.update(abs(gap - dispersion_gap(b)), where)
        sign.update(dispersion_gap(b), where)
    return SuiteResult("dispersion-gap", [ident.check, sign.check])


def suite_uncertainty_bound(n: int = 1000) -> SuiteResult:
    lower = _Worst("min sigma2 - 2 sqrt(2) b", 1e-10, upper=False)
    upper = _Worst("max sigma2 - 8", 1e-10)
    rng = np.random.default_rng(SEED)
    b_op, b2_op = bell_chsh_operator(), bell_chsh_squared()
    for k in range(n):
        rho = random_density_matrix(rng, 4, rank=1 + k % 4)
        b = expectation(rho, b_op)
        s2 = expectation(rho, b2_op)
        where = f"sample {k}"
        # b may be negative for a generic state; the bound holds for |b|
        lower.update(s2 - TWO_SQRT2 * abs(b), where)
        upper.update(s2 - SIGMA2_MAX, where)
    return SuiteResult("uncertainty-bound", [lower.check, upper.check])


def suite_separability(n_random: int = 1000) -> SuiteResult:
    flip = _Worst("verdict flip offset from b = sqrt 2 on the minimum-uncertainty line", 1e-9)
    below = two_constraint_state(SQRT2 - 1e-9, uncertainty_lower_bound(SQRT2 - 1e-9))
    above = two_constraint_state(SQRT2 + 1e-9, uncertainty_lower_bound(SQRT2 + 1e-9))
    if not (bell_diagonal_separable(below).separable and not bell_diagonal_separable(above).separable):
        flip.update(math.inf, "b = sqrt 2 +/- 1e-9")
    else:
        lo, hi = 0.0, TWO_SQRT2
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if bell_diagonal_separable(two_constraint_state(mid, uncertainty_lower_bound(mid))).separable:
                lo = mid
            else:
                hi = mid
        flip.update(abs(hi - SQRT2), f"flip at b={hi:.15g}")

    grid = _Worst("grid points where eigenvalue criterion and threshold disagree", 0)
    for b, s2 in full_grid():
        thr = inseparability_threshold(b)
        if abs(s2 - thr) <= 1e-9:
            continue
        verdict = bell_diagonal_separable(two_constraint_state(b, s2)).separable
        grid.update(0 if verdict == (s2 <= thr) else 1, f"b={b:.12g}, sigma2={s2:.12g}")

    ppt = _Worst("random Bell-diagonal states where PPT and eigenvalue criterion disagree", 0)
    rng = np.random.default_rng(SEED + 1)
    for k in range(n_random):
        p = rng.dirichlet(np.ones(4))
        if abs(p.max() - 0.5) <= 1e-9:
            continue
        state = BellDiagonalState.from_probabilities(p)
        agree = ppt_check(state.to_matrix()).separable == bell_diagonal_separable(state).separable
        ppt.update(0 if agree else 1, f"p={p.tolist()}")
    return SuiteResult("separability", [flip.check, grid.check, ppt.check])


def suite_entropy_identity() -> SuiteResult:
    ident = _Worst("|ln Z + sum lambda a - (-Tr rho ln rho)|", 1e-9)
    for b, s2 in interior_grid():
        c = ConstraintSet.bell_chsh(b, s2)
        sol = solve_dual(c, tolerance=1e-11)
        where = f"b={b:.12g}, sigma2={s2:.12g}"
        if not sol.converged:
            ident.update(math.inf, where)
            continue
        ident.update(abs(entropy_from_dual(sol, c) - von_neumann_entropy(sol.state)), where)
    return SuiteResult("entropy-identity", [ident.check])


def suite_entropy_ordering() -> SuiteResult:
    order = _Worst("max S_2 - S_1", 1e-12)
    equal = _Worst("|S_2 - S_1| at sigma2 = 4(1 + b^2/8)", 1e-12)
    for b, s2 in full_grid():
        s1 = one_constraint_state(b).entropy()
        order.update(two_constraint_state(b, s2).entropy() - s1, f"b={b:.12g}, sigma2={s2:.12g}")
    for b in b_grid():
        s2 = one_constraint_dispersion(b)
        equal.update(abs(two_constraint_state(b, s2).entropy() - one_constraint_state(b).entropy()), f"b={b:.12g}")
    return SuiteResult("entropy-ordering", [order.check, equal.check])


def suite_pure_state_limit() -> SuiteResult:
    near = _Worst("entropy at distance 1e-4 from (2 sqrt 2, 8) on sigma2 = 8", 1e-3)
    mono = _Worst("entropy increase while approaching the corner", 0)
    b = TWO_SQRT2 - 1e-4
    near.update(two_constraint_state(b, SIGMA2_MAX).entropy(), f"b={b:.15g}")
    prev = math.inf
    for d in np.logspace(-1, -8, 15):
        s = two_constraint_state(TWO_SQRT2 - d, SIGMA2_MAX).entropy()
        mono.update(1 if s > prev else 0, f"distance {d:.3g}")
        prev = s
    return SuiteResult("pure-state-limit", [near.check, mono.check])


def suite_pure_state_corner() -> SuiteResult:
    state = two_constraint_state(TWO_SQRT2, SIGMA2_MAX)
    exact = Check(
        "two_constraint_state(2 sqrt 2, 8) == (1, 0, 0, 0)",
        0.0 if tuple(state.probabilities) == (1.0, 0.0, 0.0, 0.0) else math.inf,
        0.0,
    )
    fid = Check(
        "|1 - <phi+|rho|phi+>|",
        abs(1.0 - pure_state_fidelity(state.to_matrix(), bell_basis_vectors()[0])),
        1e-12,
    )
    return SuiteResult("pure-state-corner", [exact, fid])


def _fd_check(observables, rng, n, h, label, check: _Worst):
    k = len(observables)
    for m in range(n):
        lam = rng.uniform(-1.0, 1.0, size=k)
        # zero targets: the residual is the Gibbs expectation, -d ln Z / d lambda
        means = dual_gradient(observables, lam, np.zeros(k))
        for i in range(k):
            e = np.zeros(k)
            e[i] = h
            _, up = gibbs_state(observables, lam + e)
            _, dn = gibbs_state(observables, lam - e)
            check.update(abs((up - dn) / (2 * h) + means[i]), f"{label} point {m}, lambda={lam.tolist()}")


def suite_dual_gradient(n: int = 50, h: float = 1e-6) -> SuiteResult:
    bell = _Worst("Bell pair: |FD d lnZ - (-<A>)|", 1e-6)
    noncomm = _Worst("random non-commuting pair: |FD d lnZ - (-<A>)|", 1e-6)
    rng = np.random.default_rng(SEED + 2)
    _fd_check((bell_chsh_operator(), bell_chsh_squared()), rng, n, h, "bell", bell)
    a, b = random_hermitian(rng), random_hermitian(rng)
    _fd_check((a, b), rng, n, h, "non-commuting", noncomm)
    commutator = float(np.max(np.abs(a @ b - b @ a)))
    comm = Check(f"random pair commutes (max |[A, B]| = {commutator:.3g})", 0.0 if commutator > 0.1 else 1.0, 0.0)
    return SuiteResult("dual-gradient", [bell.check, noncomm.check, comm])


def suite_relative_entropy(n: int = 500) -> SuiteResult:
    nonneg = _Worst("min K(rho1, rho2)", 1e-10, upper=False)
    self_k = _Worst("max |K(rho, rho)|", 1e-12)
    rng = np.random.default_rng(SEED + 3)
    for k in range(n):
        r1 = random_density_matrix(rng, 4)
        r2 = random_density_matrix(rng, 4, rank=1 + k % 4)
        nonneg.update(relative_entropy(r1, r2), f"pair {k}")
        self_k.update(abs(relative_entropy(r1, r1)), f"pair {k}")
    return SuiteResult("relative-entropy", [nonneg.check, self_k.check])


def suite_csv_determinism() -> SuiteResult:
    spec = SweepSpec(b_start=0.0, b_stop=TWO_SQRT2, b_count=6, sigma2_mode="fraction",
                     sigma2_start=0.0, sigma2_stop=1.0, sigma2_count=6)
    first = render_csv(run_sweep(spec).rows)
    second = render_csv(run_sweep(spec).rows)
    return SuiteResult("csv-determinism", [Check("sweep outputs differ", 0.0 if first == second else 1.0, 0.0)])


SUITES: dict[str, Callable[[], SuiteResult]] = {
    "two-constraint-state": suite_two_constraint_state,
    "multipliers": suite_multipliers,
    "one-constraint-dispersion": suite_one_constraint_dispersion,
    "dispersion-gap": suite_dispersion_gap,
    "uncertainty-bound": suite_uncertainty_bound,
    "separability": suite_separability,
    "entropy-identity": suite_entropy_identity,
    "entropy-ordering": suite_entropy_ordering,
    "pure-state-limit": suite_pure_state_limit,
    "pure-state-corner": suite_pure_state_corner,
    "dual-gradient": suite_dual_gradient,
    "relative-entropy": suite_relative_entropy,
    "csv-determinism": suite_csv_determinism,
}


def run_all() -> list[SuiteResult]:
    return [fn() for fn in SUITES.values()]
