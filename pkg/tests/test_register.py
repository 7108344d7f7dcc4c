import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qagreement import linalg as la
from qagreement.epistemics import Kind, achieved_probabilities, classify_trace
from qagreement.errors import NonCommutingMeasurements, ZeroConditioningWeight
from qagreement.quantum_model import Agent, HilbertFactorization, Measurement, Scenario, subspace_blocks
from qagreement.register import (TranscriptSet, build_recorded, kraus_completeness, recorded_cond_prob,
                                 run_recorded_recursion)
from qagreement.scenarios import example1, example2, random_commuting_scenario

TOL = 1e-9
seeds = st.integers(0, 2**31 - 1)


@pytest.fixture(scope="module")
def rec2():
    return build_recorded(example2())


def test_example2_blocks(rec2):
    weights = rec2.block_weights()
    nonzero = {t: w for t, w in weights.items() if w > TOL}
    assert set(nonzero) == {(0, 0), (1, 0), (2, 1)}
    assert all(w == pytest.approx(1 / 3, abs=TOL) for w in nonzero.values())
    assert rec2.transcripts.register_dim == 6
    assert rec2.off_block_norm() <= TOL
    assert kraus_completeness(rec2) <= TOL
    assert np.trace(rec2.rho_prime).real == pytest.approx(1, abs=TOL)


def test_example2_recorded_probabilities(rec2):
    pe = rec2.property_ext
    alice = [recorded_cond_prob(rec2, pe, p).value for p in rec2.alice_reg_projectors]
    bob = [recorded_cond_prob(rec2, pe, p).value for p in rec2.bob_reg_projectors]
    assert alice == pytest.approx([0.5, 0.5, 0.0], abs=TOL)
    assert bob == pytest.approx([0.5, 0.0], abs=TOL)
    # recording disturbs a property that fails to commute with Alice: 1/3, not the base prior 2/3
    prior = recorded_cond_prob(rec2, pe, np.eye(rec2.dim)).value
    assert prior == pytest.approx(1 / 3, abs=TOL)


def test_unconditioned_recorded_probability_matches_base_when_commuting():
    s = example1()
    rs = build_recorded(s)
    prior = recorded_cond_prob(rs, rs.property_ext, np.eye(rs.dim)).value
    assert prior == pytest.approx(la.expectation(s.property, s.rho), abs=TOL)


def test_example2_recorded_recursion(rec2):
    tr = run_recorded_recursion(rec2, 0.5, 0.5)
    assert tr.stabilization_index == 0
    assert tr.cc_weight == pytest.approx(2 / 3, abs=TOL)
    assert classify_trace(tr).kind is Kind.AGREEMENT
    assert run_recorded_recursion(rec2, 0.0, 0.0).cc_weight == pytest.approx(1 / 3, abs=TOL)
    assert run_recorded_recursion(rec2, 0.5, 1.0).cc_weight <= TOL
    assert run_recorded_recursion(rec2, 0.3, 0.3).cc_weight <= TOL


def test_register_restores_commutation(rec2):
    ops = [*rec2.alice_reg_projectors, *rec2.bob_reg_projectors, rec2.property_ext]
    assert max(la.commutator_norm(p, q) for p in ops for q in ops) <= TOL


def test_single_branch_eigenstate():
    fac = HilbertFactorization((2, 2))
    comp = subspace_blocks(2, [(0,), (1,)])
    from qagreement.quantum_model import scenario_from_pure_state

    s = scenario_from_pure_state(fac, [0, 0, 1, 0], comp, comp, np.eye(4))
    w = build_recorded(s).block_weights()
    assert w[(1, 0)] == pytest.approx(1)
    assert sum(w.values()) == pytest.approx(1)


def test_zero_weight_register_outcome(rec2):
    fac = HilbertFactorization((2, 2))
    comp = subspace_blocks(2, [(0,), (1,)])
    from qagreement.quantum_model import scenario_from_pure_state

    rs = build_recorded(scenario_from_pure_state(fac, [1, 0, 0, 0], comp, comp, np.eye(4)))
    with pytest.raises(ZeroConditioningWeight):
        recorded_cond_prob(rs, rs.property_ext, rs.alice_reg_projectors[1])


def test_noncommuting_measurements_refused():
    fac = HilbertFactorization((2,), ("Shared",))
    h = np.array([[1, 1], [1, 1]]) / 2
    alice = Measurement(Agent.ALICE, (np.diag([1, 0]), np.diag([0, 1])))
    bob = Measurement(Agent.BOB, (h, np.eye(2) - h))
    s = Scenario(fac, np.eye(2) / 2, alice, bob, np.diag([1, 0]))
    with pytest.raises(NonCommutingMeasurements):
        build_recorded(s)


def test_transcripts_distinct():
    with pytest.raises(ValueError):
        TranscriptSet(((0, 0), (0, 0)))


@given(seeds)
def test_recorded_agreement_on_random_scenarios(seed):
    s = random_commuting_scenario(seed, (2, 2, 2), sectored=bool(seed % 2))
    rs = build_recorded(s)
    assert np.trace(rs.rho_prime).real == pytest.approx(1, abs=TOL)
    assert kraus_completeness(rs) <= TOL and rs.off_block_norm() <= TOL
    for qa in achieved_probabilities(rs.alice_reg, rs.property_ext, rs.rho_prime):
        for qb in achieved_probabilities(rs.bob_reg, rs.property_ext, rs.rho_prime):
            assert classify_trace(run_recorded_recursion(rs, qa, qb)).kind is not Kind.CCD
