import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from qagreement import linalg as la
from qagreement.errors import DimensionMismatch, InvalidOperator
from qagreement.quantum_model import (Agent, HilbertFactorization, Measurement, Role, Scenario,
                                      check_commutation, embed_local, embed_operator,
                                      scenario_from_pure_state, subspace_blocks,
                                      trivial_measurement)
from qagreement.scenarios import (example1, example2, random_commuting_scenario, random_density,
                                  random_local_measurement, random_noncommuting_scenario)

Z = np.diag([1, -1]).astype(complex)
seeds = st.integers(0, 2**32 - 1)


def projectors(bases):
    return [b @ b.conj().T for b in bases]


def test_factorization_roles():
    fac = HilbertFactorization((2, 3, 2))
    assert fac.roles == (Role.ALICE, Role.BOB, Role.INACCESSIBLE)
    assert fac.total_dim == 12
    assert fac.index_of(Role.BOB) == 1
    with pytest.raises(InvalidOperator):
        HilbertFactorization((2, 2), ("Alice", "Alice"))
    with pytest.raises(InvalidOperator):
        HilbertFactorization((2, 0))
    assert HilbertFactorization((2, 2, 2, 2)).roles == (Role.SHARED,) * 4


def test_embed_local_examples():
    fac = HilbertFactorization((2, 2))
    assert np.array_equal(embed_local(Z, 0, fac), np.kron(Z, np.eye(2)))
    fac3 = HilbertFactorization((2, 3, 2))
    assert np.array_equal(embed_local(np.eye(3), 1, fac3), np.eye(12))
    fac8 = HilbertFactorization((2, 2, 2))
    p = embed_local(np.diag([1, 0]), 2, fac8)
    expected = [1.0 if digits[2] == 0 else 0.0
                for digits in np.ndindex(2, 2, 2)]
    assert np.array_equal(np.diag(p).real, expected)
    assert la.max_abs(p - np.diag(np.diag(p))) == 0


def test_embed_errors():
    fac = HilbertFactorization((2, 3))
    with pytest.raises(IndexError):
        embed_local(np.eye(2), 2, fac)
    with pytest.raises(DimensionMismatch):
        embed_local(np.eye(2), 1, fac)
    with pytest.raises(InvalidOperator):
        embed_operator(np.eye(4), [0, 0], HilbertFactorization((2, 2)))


@given(seeds, st.lists(st.integers(1, 3), min_size=1, max_size=3))
def test_embed_local_matches_enumeration(seed, dims):
    rng = np.random.default_rng(seed)
    fac = HilbertFactorization(tuple(dims))
    k = int(rng.integers(len(dims)))
    op = rng.normal(size=(dims[k], dims[k])) + 1j * rng.normal(size=(dims[k], dims[k]))
    ref = oracles.embed_by_enumeration(op, k, dims)
    assert oracles.max_diff(embed_local(op, k, fac), ref) == 0


@given(seeds)
def test_embed_operator_on_factor_subsets_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    dims = [int(d) for d in rng.integers(1, 4, size=3)]
    factors = [int(f) for f in rng.permutation(3)[: int(rng.integers(1, 4))]]
    d = math.prod(dims[f] for f in factors)
    op = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    ref = oracles.embed_multi_by_enumeration(op, factors, dims)
    assert oracles.max_diff(embed_operator(op, factors, HilbertFactorization(tuple(dims))), ref) == 0


@given(seeds)
def test_embedding_preserves_projectors_and_commutes_across_factors(seed):
    rng = np.random.default_rng(seed)
    fac = HilbertFactorization((2, 3, 2))
    pa = projectors(random_local_measurement(rng, 2, 2))
    pb = projectors(random_local_measurement(rng, 3, 2))
    for p in pa:
        ea = embed_local(p, 0, fac)
        assert la.is_projector(ea)
        for q in pb:
            assert la.commutator_norm(ea, embed_local(q, 1, fac)) <= 1e-12


def test_measurement_validation():
    with pytest.raises(InvalidOperator):
        Measurement(Agent.ALICE, (np.diag([1, 0]), np.diag([1, 1])))  # overlapping
    with pytest.raises(InvalidOperator):
        Measurement(Agent.ALICE, (np.diag([1, 0]),))  # incomplete
    with pytest.raises(InvalidOperator):
        Measurement(Agent.ALICE, (np.array([[1, 1], [0, 0]]), np.diag([0, 1])))
    m = Measurement("Bob", (np.diag([1, 0]), np.diag([0, 1])))
    assert m.agent is Agent.BOB and m.count == 2
    assert np.array_equal(m.combine([0, 1]), np.eye(2))


@given(seeds, st.integers(2, 6), st.integers(1, 4))
def test_measurement_probabilities_sum_to_one(seed, d, count):
    rng = np.random.default_rng(seed)
    count = min(count, d)
    meas = Measurement(Agent.ALICE, tuple(projectors(random_local_measurement(rng, d, count))))
    rho = random_density(rng, d)
    assert abs(sum(la.expectation(p, rho) for p in meas.projectors) - 1) <= 1e-9


def test_scenario_validation():
    fac = HilbertFactorization((2, 2))
    alice = trivial_measurement(Agent.ALICE, 4)
    bob = trivial_measurement(Agent.BOB, 4)
    with pytest.raises(InvalidOperator):
        Scenario(fac, np.diag([1.5, -0.5, 0, 0]), alice, bob, np.eye(4))
    with pytest.raises(InvalidOperator):
        Scenario(fac, np.eye(4) / 4, alice, bob, np.eye(4) * 0.5)
    with pytest.raises(DimensionMismatch):
        Scenario(fac, np.eye(2) / 2, alice, bob, np.eye(4))
    with pytest.raises(InvalidOperator):
        Scenario(fac, np.eye(4) / 4, bob, alice, np.eye(4))


def test_scenario_from_pure_state_product():
    fac = HilbertFactorization((2, 2))
    comp = subspace_blocks(2, [(0,), (1,)])
    s = scenario_from_pure_state(fac, [1, 0, 0, 0], comp, comp, np.eye(4))
    assert np.array_equal(s.rho, np.diag([1, 0, 0, 0]))
    with pytest.raises(InvalidOperator):
        scenario_from_pure_state(fac, [1, 1, 0, 0], comp, comp, np.eye(4))


def test_scenario_from_pure_state_bell():
    fac = HilbertFactorization((2, 2))
    comp = subspace_blocks(2, [(0,), (1,)])
    s = scenario_from_pure_state(fac, np.array([1, 0, 0, 1]) / math.sqrt(2), comp, comp, np.eye(4))
    for meas in (s.alice, s.bob):
        assert [la.expectation(p, s.rho) for p in meas] == pytest.approx([0.5, 0.5], abs=1e-12)


def test_example2_prior():
    s = example2()
    assert la.expectation(s.property, s.rho) == pytest.approx(2 / 3, abs=1e-9)


def test_commutation_flags_on_examples():
    r1 = check_commutation(example1())
    assert r1.ab_ok and r1.alice_e_ok and r1.bob_e_ok and r1.commuting
    r2 = check_commutation(example2())
    assert r2.ab_ok and r2.bob_e_ok and not r2.alice_e_ok
    assert r2.max_violation > la.TOL
    s = example2()
    assert la.commutator_norm(s.alice[0], s.property) > 0


def test_trivial_bob_always_commutes():
    s = example2()
    s2 = Scenario(s.factorization, s.rho, s.alice, trivial_measurement(Agent.BOB, s.dim), s.property)
    assert check_commutation(s2).ab_ok


def test_state_commutation_flag():
    s = example1()
    assert check_commutation(s).rho_ok is None
    assert check_commutation(s, include_state=True).rho_ok is False
    mixed = s.with_state(np.eye(s.dim) / s.dim)
    assert check_commutation(mixed, include_state=True).rho_ok is True


@given(seeds)
def test_generators_respect_commutation_labels(seed):
    assert check_commutation(random_commuting_scenario(seed, sectored=bool(seed % 2))).commuting
    assert check_commutation(random_noncommuting_scenario(seed)).ab_ok
