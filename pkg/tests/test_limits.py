import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qagreement import linalg as la
from qagreement.epistemics import run_recursion
from qagreement.errors import ZeroConditioningWeight
from qagreement.quantum_model import HilbertFactorization, scenario_from_pure_state, subspace_blocks
from qagreement.limits import (EpsilonConfig, check_state_perturbation, epsilon_bound_holds,
                               run_epsilon_recursion, state_perturbation_bound, zero_one_check)
from qagreement.scenarios import example1, example2, random_commuting_scenario
from qagreement.sweeps import branch_pairs, perturb, zero_one_instance

TOL = 1e-9
seeds = st.integers(0, 2**31 - 1)


def test_zero_one_example2():
    rep = zero_one_check(example2())
    assert abs(rep.value) <= TOL
    assert [i for i, _, _ in rep.per_branch] == [0, 1, 2]


def test_zero_one_without_bob_certainty_is_exactly_zero():
    # Alice certain of E on branch 0, Bob never certain of not-E
    fac = HilbertFactorization((2, 2))
    comp = subspace_blocks(2, [(0,), (1,)])
    prop = np.kron(np.diag([1, 0]), np.eye(2))
    s = scenario_from_pure_state(fac, np.array([1, 1, 1, 1]) / 2, comp, comp, prop)
    rep = zero_one_check(s)
    assert rep.alice_certain_e == (0,)
    assert rep.bob_certain_not_e == ()
    assert rep.value == 0
    assert not rep.nontrivial


@given(seeds)
def test_zero_one_impossibility_property(seed):
    rep = zero_one_check(zero_one_instance(seed, seed % 48))
    assert rep.value <= 1e-8 and rep.value >= -TOL


def test_perturbation_identical_states():
    s = example1()
    q = math.cos(math.pi / 6) ** 2
    chk = check_state_perturbation(s, s.rho, q, q)
    assert chk.gap == 0 and chk.bound == 0 and chk.holds


def test_perturbation_example1_depolarized():
    s = example1()
    q = math.cos(math.pi / 6) ** 2
    rho_b = 0.99 * s.rho + 0.01 * np.eye(48) / 48
    chk = check_state_perturbation(s, rho_b, q, q)
    assert chk.gap <= chk.bound
    assert chk.c_alice == pytest.approx(1 / 3) and chk.c_bob > 0


def test_perturbation_bound_formula():
    s = example1()
    q = math.cos(math.pi / 6) ** 2
    tr = run_recursion(s, q, q)
    rho_b = 0.9 * s.rho + 0.1 * np.eye(48) / 48
    b = state_perturbation_bound(s.rho, rho_b, tr.a_star, tr.b_star)
    denom = max(la.expectation(tr.b_star @ tr.a_star, s.rho), la.expectation(tr.a_star @ tr.b_star, rho_b))
    assert b == pytest.approx(2 * la.trace_norm(s.rho - rho_b) / denom)
    with pytest.raises(ZeroConditioningWeight):
        state_perturbation_bound(s.rho, s.rho, np.zeros((48, 48)), tr.b_star)


@given(seeds)
def test_perturbation_bound_property(seed):
    rng = np.random.default_rng(seed)
    s = random_commuting_scenario(rng, (2, 3, 2), sectored=True)
    rho_b = perturb(s.rho, rng, 0.05)
    assert la.trace_norm(s.rho - rho_b) <= 0.05 + 1e-12
    for qa, qb in branch_pairs(s):
        if run_recursion(s, qa, qb).cc_weight <= TOL:
            continue
        try:
            chk = check_state_perturbation(s, rho_b, qa, qb)
        except ZeroConditioningWeight:
            continue
        assert chk.holds


def test_epsilon_config_validation():
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            EpsilonConfig(bad)


def test_tiny_epsilon_matches_exact_recursion():
    s = example1()
    q = math.cos(math.pi / 6) ** 2
    exact = run_recursion(s, q, q)
    eps = run_epsilon_recursion(s, q, q, EpsilonConfig(1e-12))
    assert eps.alice_indices == exact.alice_indices and eps.bob_indices == exact.bob_indices
    assert eps.cc_weight == pytest.approx(exact.cc_weight)
    assert epsilon_bound_holds(eps)
    with pytest.raises(ValueError):
        epsilon_bound_holds(exact)


def _nearly_certain_bob(eps):
    """Two-qubit-plus-qubit scenario where Bob's outcome 0 has Pr[A_0] = 1 - eps/2."""
    fac = HilbertFactorization((2, 2, 2))
    comp = subspace_blocks(2, [(0,), (1,)])
    prop = np.kron(np.eye(4), np.diag([1, 0]))
    a, b = math.sqrt(1 - eps / 2), math.sqrt(eps / 2)
    psi = np.zeros(8)
    psi[0b000] = a  # Alice 0, Bob 0, property holds
    psi[0b101] = b  # Alice 1, Bob 0, property fails
    psi[0b111] = 0.0
    psi /= np.linalg.norm(psi)
    return scenario_from_pure_state(fac, psi, comp, comp, prop)


def test_epsilon_admits_nearly_certain_branch():
    eps = 0.01
    s = _nearly_certain_bob(eps)
    # q_A = 1 on Alice branch 0; Bob's branch 0 gives A_0 probability 1 - eps/2
    exact = run_recursion(s, 1.0, 1 - eps / 2)
    relaxed = run_epsilon_recursion(s, 1.0, 1 - eps / 2, EpsilonConfig(eps))
    assert exact.cc_weight <= TOL
    assert 0 in relaxed.bob_indices[-1]
    assert relaxed.cc_weight > TOL
    assert epsilon_bound_holds(relaxed)


def test_relax_assignment_flag_widens_initial_matching():
    s = _nearly_certain_bob(0.01)
    strict = run_epsilon_recursion(s, 1.0, 1.0, EpsilonConfig(0.01))
    loose = run_epsilon_recursion(s, 1.0, 1.0, EpsilonConfig(0.01, relax_assignment=True))
    assert strict.bob_indices[0] == ()
    assert loose.bob_indices[0] == (0,)


@given(seeds, st.sampled_from([0.001, 0.01, 0.05]))
def test_epsilon_bound_and_monotonicity(seed, eps):
    rng = np.random.default_rng(seed)
    s = random_commuting_scenario(rng, (2, 2, 3), sectored=True, leak=float(rng.uniform(0, 3 * eps)))
    for qa, qb in branch_pairs(s):
        exact = run_recursion(s, qa, qb)
        relaxed = run_epsilon_recursion(s, qa, qb, EpsilonConfig(eps))
        assert epsilon_bound_holds(relaxed)
        assert la.max_abs(exact.a_star @ relaxed.a_star - exact.a_star) <= TOL
        assert la.max_abs(exact.b_star @ relaxed.b_star - exact.b_star) <= TOL
