import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxent_bell.bell import (
    TWO_SQRT2,
    bell_chsh_operator,
    bell_chsh_squared,
    closed_form_multipliers,
    one_constraint_entropy,
    one_constraint_multiplier,
    one_constraint_state,
    two_constraint_state,
)
from maxent_bell.errors import (
    BoundaryDivergenceError,
    DimensionError,
    InfeasibleError,
    InvariantError,
    LinearDependenceError,
    NotConvergedError,
)
from maxent_bell.qstate import (
    expectation,
    random_hermitian,
    relative_entropy,
    to_bell_basis,
    von_neumann_entropy,
)
from maxent_bell.solver import (
    ConstraintSet,
    MaxEntSolution,
    dual_gradient,
    dual_objective,
    entropy_from_dual,
    gibbs_state,
    solve_dual,
    thermo_map,
)

from oracles import central_difference, jacobi_eigh

R2 = math.sqrt(2)
B = bell_chsh_operator()
B2 = bell_chsh_squared()

ZZ = np.diag([1.0, -1.0, -1.0, 1.0])
XI = np.kron(np.array([[0, 1], [1, 0]]), np.eye(2))
YZ = np.kron(np.array([[0, -1j], [1j, 0]]), np.diag([1.0, -1.0]))


def bell_probs(rho):
    return np.diag(to_bell_basis(rho)).real


def gibbs_by_jacobi(observables, lam):
    """exp(-sum lam A) / Z through the Jacobi oracle."""
    m = -sum(l * a for l, a in zip(lam, observables))
    w, v = jacobi_eigh(m)
    e = np.exp(w)
    return (v * e) @ v.conj().T / e.sum(), math.log(e.sum())


class TestGibbsState:
    def test_zero_multipliers(self):
        rho, ln_z = gibbs_state([B, B2], [0, 0])
        np.testing.assert_allclose(rho, np.eye(4) / 4, atol=1e-15)
        assert ln_z == pytest.approx(math.log(4), abs=1e-15)

    def test_closed_form_multipliers_reproduce_state(self):
        rho, ln_z = gibbs_state([B, B2], closed_form_multipliers(R2, 6))
        np.testing.assert_allclose(bell_probs(rho), two_constraint_state(R2, 6).probabilities, atol=1e-10)
        assert ln_z == pytest.approx(math.log(8), abs=1e-12)

    def test_one_constraint_partition_function(self):
        lam = -0.37
        _, ln_z = gibbs_state([B], [lam])
        z1 = math.exp(-TWO_SQRT2 * lam) + math.exp(TWO_SQRT2 * lam) + 2
        assert math.exp(ln_z) == pytest.approx(z1, abs=1e-12)
        assert 4 * math.cosh(R2 * lam) ** 2 == pytest.approx(z1, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_non_commuting_against_jacobi(self, seed):
        rng = np.random.default_rng(seed)
        obs = [random_hermitian(rng), random_hermitian(rng)]
        lam = rng.uniform(-1, 1, 2)
        rho, ln_z = gibbs_state(obs, lam)
        ref_rho, ref_ln_z = gibbs_by_jacobi(obs, lam)
        np.testing.assert_allclose(rho, ref_rho, atol=1e-12)
        assert ln_z == pytest.approx(ref_ln_z, abs=1e-12)

    def test_huge_multipliers_stay_finite(self):
        rho, ln_z = gibbs_state([B], [-500.0])
        assert math.isfinite(ln_z)
        assert bell_probs(rho)[0] == pytest.approx(1.0, abs=1e-15)

    def test_errors(self):
        with pytest.raises(DimensionError):
            gibbs_state([B, B2], [0.0])
        with pytest.raises(ValueError):
            gibbs_state([B], [math.inf])
        with pytest.raises(DimensionError):
            gibbs_state([B, np.eye(2)], [0, 0])
        with pytest.raises(InvariantError):
            gibbs_state([np.triu(np.ones((4, 4)))], [1.0])


class TestDualGradient:
    def test_zero_at_spectral_means(self):
        targets = [np.trace(B).real / 4, np.trace(B2).real / 4]
        np.testing.assert_allclose(dual_gradient([B, B2], [0, 0], targets), [0, 0], atol=1e-15)

    def test_vanishes_at_closed_form_multipliers(self):
        for b, s2 in [(R2, 6), (0.5, 3.0), (2.5, 7.5)]:
            g = dual_gradient([B, B2], closed_form_multipliers(b, s2), [b, s2])
            assert np.max(np.abs(g)) <= 1e-10

    @pytest.mark.parametrize("pair", ["bell", "non-commuting"])
    def test_finite_differences(self, pair):
        rng = np.random.default_rng(3 if pair == "bell" else 4)
        obs = [B, B2] if pair == "bell" else [random_hermitian(rng), random_hermitian(rng)]
        if pair == "non-commuting":
            assert np.max(np.abs(obs[0] @ obs[1] - obs[1] @ obs[0])) > 0.1

        def ln_z(x):
            return gibbs_state(obs, x)[1]

        for _ in range(25):
            lam = rng.uniform(-1, 1, 2)
            means = dual_gradient(obs, lam, [0, 0])
            for i in range(2):
                assert abs(central_difference(ln_z, lam, i, 1e-6) + means[i]) <= 1e-6

    def test_objective_gradient_sign(self):
        # the objective derivative is target - <A>, the negative of the residual
        lam = np.array([0.2, -0.1])
        targets = [1.0, 5.0]
        r = dual_gradient([B, B2], lam, targets)
        for i in range(2):
            fd = central_difference(lambda x: dual_objective([B, B2], x, targets), lam, i)
            assert fd == pytest.approx(-r[i], abs=1e-7)


class TestConstraintSet:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            ConstraintSet((), ())

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            ConstraintSet((B,), (0.0, 1.0))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            ConstraintSet((B, np.eye(2)), (0.0, 1.0))

    def test_outside_spectral_range(self):
        with pytest.raises(InfeasibleError, match="spectral range"):
            ConstraintSet((B,), (3.0,))

    def test_linearly_dependent(self):
        with pytest.raises(LinearDependenceError):
            ConstraintSet((B, 2 * B), (1.0, 2.0))

    def test_identity_is_dependent(self):
        with pytest.raises(LinearDependenceError):
            ConstraintSet((B, np.eye(4)), (1.0, 1.0))

    def test_duplicate_names(self):
        with pytest.raises(ValueError):
            ConstraintSet((B, B2), (1.0, 5.0), ("x", "x"))

    def test_non_hermitian(self):
        with pytest.raises(InvariantError):
            ConstraintSet((np.triu(np.ones((4, 4))),), (0.5,))


class TestSolveDual:
    def test_zero_mean(self):
        sol = solve_dual(ConstraintSet.bell_chsh(0.0))
        assert sol.converged and sol.iterations == 0
        np.testing.assert_allclose(sol.multipliers, [0.0])
        np.testing.assert_allclose(sol.state, np.eye(4) / 4, atol=1e-15)
        assert sol.entropy == pytest.approx(math.log(4), abs=1e-14)

    def test_bell_pair(self):
        sol = solve_dual(ConstraintSet.bell_chsh(R2, 6))
        assert sol.converged
        np.testing.assert_allclose(sol.multipliers, [-0.28451, -0.10059], atol=1e-5)
        np.testing.assert_allclose(sol.multipliers, closed_form_multipliers(R2, 6), atol=1e-8)
        np.testing.assert_allclose(bell_probs(sol.state), [5 / 8, 1 / 8, 1 / 8, 1 / 8], atol=1e-10)

    def test_single_mean(self):
        c = ConstraintSet.bell_chsh(2.0)
        sol = solve_dual(c)
        np.testing.assert_allclose(bell_probs(sol.state), one_constraint_state(2.0).probabilities, atol=1e-10)
        lam = one_constraint_multiplier(2.0)
        s1 = lam * 2.0 + math.log(4 * math.cosh(R2 * lam) ** 2)
        assert entropy_from_dual(sol, c) == pytest.approx(s1, abs=1e-9)
        assert sol.entropy == pytest.approx(one_constraint_entropy(2.0), abs=1e-9)

    def test_residuals_within_tolerance(self):
        sol = solve_dual(ConstraintSet.bell_chsh(0.7, 5.0), tolerance=1e-12)
        assert sol.converged
        assert np.max(np.abs(sol.residuals)) <= 1e-12
        assert expectation(sol.state, B) == pytest.approx(0.7, abs=1e-12)

    def test_entropy_matches_direct(self):
        sol = solve_dual(ConstraintSet.bell_chsh(1.1, 4.5))
        assert abs(sol.entropy - von_neumann_entropy(sol.state)) <= 1e-9

    def test_non_commuting_constraints(self):
        c = ConstraintSet((XI, YZ), (0.4, -0.3))
        sol = solve_dual(c, tolerance=1e-12)
        assert sol.converged
        assert abs(expectation(sol.state, XI) - 0.4) <= 1e-12
        assert abs(expectation(sol.state, YZ) + 0.3) <= 1e-12
        assert entropy_from_dual(sol, c) == pytest.approx(sol.entropy, abs=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_non_commuting(self, seed):
        rng = np.random.default_rng(100 + seed)
        obs = (random_hermitian(rng), random_hermitian(rng), random_hermitian(rng))
        # targets realised by some full-rank state are strictly feasible
        rho = np.eye(4) / 4 * 0.5 + 0.5 * np.outer(*(2 * [rng.standard_normal(4) / 2]))
        rho /= np.trace(rho)
        targets = tuple(expectation(rho, a) for a in obs)
        sol = solve_dual(ConstraintSet(obs, targets), tolerance=1e-11)
        assert sol.converged
        assert np.max(np.abs(sol.residuals)) <= 1e-11
        # the data state meets the same constraints, so cannot beat the max-entropy state
        assert von_neumann_entropy(rho) <= sol.entropy + 1e-9

    def test_boundary_target_rejected(self):
        with pytest.raises(BoundaryDivergenceError):
            solve_dual(ConstraintSet.bell_chsh(TWO_SQRT2))
        with pytest.raises(BoundaryDivergenceError):
            solve_dual(ConstraintSet.bell_chsh(0.0, 0.0))

    def test_multiplier_cap(self):
        with pytest.raises(BoundaryDivergenceError) as info:
            solve_dual(ConstraintSet.bell_chsh(R2, 4.0 + 1e-6), multiplier_cap=0.5)
        assert np.max(np.abs(info.value.multipliers)) > 0.5

    def test_non_convergence_reports_best_iterate(self):
        sol = solve_dual(ConstraintSet.bell_chsh(2.5, 7.0), max_iterations=1)
        assert not sol.converged
        assert sol.iterations == 1
        assert np.max(np.abs(sol.residuals)) > 1e-10
        with pytest.raises(NotConvergedError):
            entropy_from_dual(sol, ConstraintSet.bell_chsh(2.5, 7.0))

    def test_initial_lambdas(self):
        lam = closed_form_multipliers(1.0, 5.0)
        sol = solve_dual(ConstraintSet.bell_chsh(1.0, 5.0), initial_lambdas=lam)
        assert sol.converged and sol.iterations <= 1

    @settings(max_examples=40, deadline=None)
    @given(b=st.floats(0.05, TWO_SQRT2 - 0.05), frac=st.floats(0.02, 0.98))
    def test_objective_monotone(self, b, frac):
        lo = TWO_SQRT2 * b
        s2 = lo + (8 - lo) * frac
        sol = solve_dual(ConstraintSet.bell_chsh(b, s2))
        assert sol.converged
        h = np.array(sol.objective_history)
        assert np.all(np.diff(h) <= 1e-12)
        # the dual optimum is the entropy
        assert h[-1] == pytest.approx(sol.entropy, abs=1e-9)

    @pytest.mark.parametrize("b, s2", [(R2, 6), (0.4, 2.0), (2.2, 7.0)])
    def test_maximality_in_constraint_null_space(self, b, s2):
        c = ConstraintSet.bell_chsh(b, s2)
        sol = solve_dual(c, tolerance=1e-12)
        rho = sol.state
        # orthonormal basis (Hilbert-Schmidt) of span{I, B, B^2}
        basis = []
        for a in (np.eye(4), B, B2):
            v = a.astype(complex)
            for e in basis:
                v = v - np.vdot(e, v) * e
            basis.append(v / np.linalg.norm(v))
        rng = np.random.default_rng(5)
        for _ in range(40):
            x = random_hermitian(rng)
            for e in basis:
                x = x - np.vdot(e, x).real * e
            lo = np.linalg.eigvalsh(rho)[0]
            eps = 0.9 * lo / np.max(np.abs(np.linalg.eigvalsh(x)))
            sigma = rho + eps * x
            assert abs(expectation(sigma, B) - b) <= 1e-10
            assert abs(expectation(sigma, B2) - s2) <= 1e-10
            s_sigma = von_neumann_entropy(sigma)
            assert s_sigma <= sol.entropy + 1e-9
            # for a Gibbs state K(rho*, sigma) = S(rho*) - S(sigma)
            assert relative_entropy(rho, sigma) == pytest.approx(sol.entropy - s_sigma, abs=1e-8)


class TestEntropyFromDual:
    def test_maximally_mixed(self):
        c = ConstraintSet.bell_chsh(0.0, 4.0)
        assert entropy_from_dual(solve_dual(c), c) == pytest.approx(math.log(4), abs=1e-12)

    def test_interior(self):
        c = ConstraintSet.bell_chsh(R2, 6)
        sol = solve_dual(c)
        l1, l2 = closed_form_multipliers(R2, 6)
        expected = math.log(8) + l1 * R2 + 6 * l2
        assert entropy_from_dual(sol, c) == pytest.approx(expected, abs=1e-9)
        assert expected == pytest.approx(von_neumann_entropy(sol.state), abs=1e-9)

    def test_vanishes_toward_corner(self):
        values = []
        for eps in (1e-1, 1e-2, 1e-3):
            b = TWO_SQRT2 * (1 - eps)
            c = ConstraintSet.bell_chsh(b, 8 - eps)
            sol = solve_dual(c, tolerance=1e-12)
            assert sol.converged
            values.append(entropy_from_dual(sol, c))
        assert values[0] > values[1] > values[2]
        assert values[2] < 0.02


class TestThermoMap:
    def test_direct(self):
        t = thermo_map(-1, -2, 0.5)
        assert (t.beta, t.mu, t.free_energy) == (1, 2, 0.5)

    def test_infinite_temperature(self):
        t = thermo_map(0, 0, math.log(4))
        assert t.beta == 0 and t.mu is None

    def test_interior(self):
        l1, l2 = closed_form_multipliers(R2, 6)
        t = thermo_map(l1, l2, math.log(8))
        assert t.beta == pytest.approx(math.log(5) / (4 * R2))
        assert t.beta > 0
        assert t.mu * t.beta == pytest.approx(-l2)


def test_solution_is_frozen():
    sol = solve_dual(ConstraintSet.bell_chsh(1.0))
    assert isinstance(sol, MaxEntSolution)
    with pytest.raises(AttributeError):
        sol.converged = False
