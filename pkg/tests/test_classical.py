import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qagreement.classical import (ClassicalModel, NoSignalingBox, OUTCOME_ORDER, box_conditional,
                                  box_from_global, check_zero_one_chain, classical_recursion,
                                  global_assignment_model, pooled_posterior, signed_conditional,
                                  signed_realization_check, signed_zero_one_chain, to_weight,
                                  zero_one_chain)
from qagreement.errors import ContextError, InvalidOperator, SignedConditioning, ZeroConditioningWeight
from qagreement.scenarios import (SIGNED_WEIGHTS, pooling_model, product_box, random_rational_model,
                                  signed_phase_space_model, zero_one_box)
from qagreement.sweeps import instance_rng

F = Fraction
POINTS = list(itertools.product((0, 1), repeat=3))  # (a, b, e) in binary order
PAIRS = (("a", "b"), ("a", "e"), ("b", "e"))


def test_to_weight():
    assert to_weight(1) == F(1) and isinstance(to_weight("3/16"), Fraction)
    assert isinstance(to_weight(0.25), float)


def test_model_validation():
    with pytest.raises(InvalidOperator):
        ClassicalModel(("x", "y"), (F(1, 2), F(1, 3)), ({"x", "y"},), ({"x", "y"},), {"x"})
    with pytest.raises(InvalidOperator):
        ClassicalModel(("x", "y"), (F(3, 2), F(-1, 2)), ({"x", "y"},), ({"x", "y"},), {"x"})
    with pytest.raises(InvalidOperator):
        ClassicalModel(("x", "y"), (F(1, 2), F(1, 2)), ({"x"},), ({"x", "y"},), {"x"})
    with pytest.raises(InvalidOperator):
        ClassicalModel(("x", "y"), (F(1, 2), F(1, 2)), ({"x"}, {"y"}), ({"x", "y"},), {"z"})


def test_pooling_model():
    m = pooling_model()
    tr = classical_recursion(m, F(1, 2), F(1, 2))
    assert tr.c_inf == frozenset(m.states) and tr.weight == 1
    assert pooled_posterior(m, "w1") == 1
    assert pooled_posterior(m, "w2") == 0
    assert pooled_posterior(m, "w4") == 1


def test_unattained_q_gives_empty_common_certainty():
    tr = classical_recursion(pooling_model(), F(1, 3), F(1, 2))
    assert tr.c_inf == frozenset() and tr.weight == 0


def test_pooled_posterior_of_sure_event():
    m = pooling_model()
    sure = ClassicalModel(m.states, m.weights, m.alice_partition, m.bob_partition, m.states)
    assert all(pooled_posterior(sure, s) == 1 for s in m.states)


def test_zero_weight_cell_rejected():
    m = ClassicalModel(("x", "y"), (F(1), F(0)), ({"x"}, {"y"}), ({"x", "y"},), {"x"})
    with pytest.raises(SignedConditioning):
        classical_recursion(m, 1, 1)
    with pytest.raises(SignedConditioning):
        classical_recursion(signed_phase_space_model(), F(1, 2), F(1, 2))


@given(st.integers(0, 2**31 - 1))
def test_classical_agreement_property(seed):
    m = random_rational_model(instance_rng(seed, 0))
    qa = {m.weight(m.event & c) / m.weight(c) for c in m.alice_partition}
    qb = {m.weight(m.event & c) / m.weight(c) for c in m.bob_partition}
    for a in qa:
        for b in qb:
            tr = classical_recursion(m, a, b)
            if tr.weight > 0:
                assert a == b
            assert tr.c_inf <= tr.a_final and tr.c_inf <= tr.b_final


def test_box_conditionals_and_chain():
    box = zero_one_box()
    assert box_conditional(box, ("e", 1), ("a", 1)) == 1
    assert box_conditional(box, ("b", 1), ("a", 1)) == 1
    assert box_conditional(box, ("e", 0), ("b", 1)) == 1
    assert check_zero_one_chain(box)
    assert not check_zero_one_chain(product_box())
    assert box.marginal("b", 1, ("a", "b")) == F(1, 2)
    assert box.marginal("b", 1, ("b", "e")) == F(1, 2)


def test_box_errors():
    box = zero_one_box()
    with pytest.raises(ContextError):
        box_conditional(box, ("a", 1), ("a", 0))
    with pytest.raises(ContextError):
        NoSignalingBox(("a", "b"), {("a", "c"): dict.fromkeys(OUTCOME_ORDER, F(1, 4))})
    signaling = {("a", "b"): (F(1), 0, 0, 0), ("a", "e"): (F(1, 4),) * 4,
                 ("b", "e"): (F(1, 4),) * 4}
    with pytest.raises(InvalidOperator):
        NoSignalingBox.from_rows(("a", "b", "e"), signaling)
    with pytest.raises(InvalidOperator):
        NoSignalingBox.from_rows(("a", "b"), {("a", "b"): (F(1, 2), F(1, 2), F(1, 2), F(-1, 2))})
    # zero marginal: a never yields 1
    sure = {("a", "b"): (F(1), 0, 0, 0), ("a", "e"): (F(1), 0, 0, 0), ("b", "e"): (F(1), 0, 0, 0)}
    zbox = NoSignalingBox.from_rows(("a", "b", "e"), sure)
    with pytest.raises(ZeroConditioningWeight):
        box_conditional(zbox, ("e", 1), ("a", 1))
    assert zero_one_chain(zbox).alice_certain_event is None
    assert not check_zero_one_chain(zbox)


def test_signed_table():
    m = signed_phase_space_model()
    assert sum(m.weights) == 1
    assert m.weights[3] == F(-1, 16) and m.weights[4] == F(-3, 16)
    assert signed_realization_check(m, zero_one_box())
    uniform = global_assignment_model(("a", "b", "e"), [F(1, 8)] * 8, "a", "b", ("e", 1))
    assert not signed_realization_check(uniform, zero_one_box())


def test_signed_chain_at_w7():
    m = signed_phase_space_model()
    a1 = frozenset(s for s in m.states if m.assignments[s]["a"] == 1)
    b1 = frozenset(s for s in m.states if m.assignments[s]["b"] == 1)
    assert signed_conditional(m, m.event, a1) == 1
    assert signed_conditional(m, b1, a1) == 1
    assert signed_conditional(m, a1, a1) == 1
    ch = signed_zero_one_chain(m, "w7")
    assert ch.zero_one
    assert ch.alice_prob_event == 1 and ch.alice_prob_bob_certain_not == 1
    assert ch.bob_certain_not_event == b1


def test_signed_realization_label_mismatch():
    with pytest.raises(ContextError):
        signed_realization_check(pooling_model(), zero_one_box())


def _chain_from_global(weights):
    return check_zero_one_chain(box_from_global(("a", "b", "e"), weights, PAIRS))


def test_no_nonnegative_global_distribution_has_the_chain():
    # The chain only depends on which global points carry weight, so checking
    # one distribution per support pattern covers the whole simplex.
    for mask in range(1, 256):
        support = [k for k in range(8) if mask >> k & 1]
        w = [F(1, len(support)) if k in support else F(0) for k in range(8)]
        assert not _chain_from_global(w), support


def test_no_grid_distribution_has_the_chain():
    rng = np.random.default_rng(64)
    for _ in range(2000):
        cuts = np.sort(rng.choice(np.arange(0, 65), size=7, replace=True))
        parts = np.diff(np.concatenate([[0], cuts, [64]]))
        assert not _chain_from_global([F(int(p), 64) for p in parts])


def test_box_from_signed_table_is_the_zero_one_box():
    box = box_from_global(("a", "b", "e"), SIGNED_WEIGHTS, PAIRS)
    assert box.contexts == zero_one_box().contexts
