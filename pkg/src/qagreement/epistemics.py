"""Born-Lueders conditioning, certainty operators and the common-certainty recursion.

The recursion alternates between the two agents::

    A_0 = Q_A(E; q_A)            B_0 = Q_B(E; q_B)
    A_{n+1} = A_n C_A(B_n)       B_{n+1} = B_n C_B(A_n)

until both operators repeat.  ``C_X(F)`` is the sum of agent X's outcome
projectors on which X assigns probability one to ``F``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import linalg as la
from .errors import NonProjectorProduct, ZeroConditioningWeight
from .linalg import TOL, ComplexMatrix
from .quantum_model import Measurement, Scenario


@dataclass(frozen=True)
class ConditionalProbability:
    value: float
    conditioning_weight: float

    def __float__(self):
        return self.value


def _clamp(p: float) -> float:
    return min(1.0, max(0.0, p))


def cond_prob(prop, cond, rho, tol: float = TOL) -> ConditionalProbability:
    """``Tr(prop . cond rho cond) / Tr(cond rho)``, the probability of ``prop``
    after conditioning ``rho`` on the outcome ``cond``."""
    prop, cond, rho = la.as_matrix(prop), la.as_matrix(cond), la.as_matrix(rho)
    weight = la.expectation(cond, rho)
    if weight <= tol:
        raise ZeroConditioningWeight(f"conditioning weight {weight:.3g} is not positive", weight)
    value = la.expectation(prop, cond @ rho @ cond) / weight
    return ConditionalProbability(_clamp(value), weight)


def luders_update(cond, rho, tol: float = TOL) -> ComplexMatrix:
    cond, rho = la.as_matrix(cond), la.as_matrix(rho)
    weight = la.expectation(cond, rho)
    if weight <= tol:
        raise ZeroConditioningWeight(f"conditioning weight {weight:.3g} is not positive", weight)
    return cond @ rho @ cond / weight


class _Branches:
    """Unnormalized post-measurement states ``P_k rho P_k`` and their weights."""

    def __init__(self, meas: Measurement, rho: ComplexMatrix, tol: float = TOL):
        self.meas = meas
        self.posts = [p @ rho @ p for p in meas.projectors]
        self.weights = [float(np.real(np.trace(s))) for s in self.posts]
        self.live = [k for k, w in enumerate(self.weights) if w > tol]

    def prob(self, prop, k: int) -> float:
        return _clamp(la.expectation(prop, self.posts[k]) / self.weights[k])

    def matching(self, prop, accept: Callable[[float], bool]) -> tuple:
        return tuple(k for k in self.live if accept(self.prob(prop, k)))


def branch_probabilities(meas: Measurement, prop, rho) -> list:
    """``(k, weight, probability)`` per outcome; probability is ``None`` for
    outcomes of (numerically) zero weight."""
    br = _Branches(meas, la.as_matrix(rho))
    prop = la.as_matrix(prop)
    return [(k, br.weights[k], br.prob(prop, k) if k in br.live else None)
            for k in range(meas.count)]


def achieved_probabilities(meas: Measurement, prop, rho, tol_q: float = TOL) -> list:
    """Distinct branch probabilities (merged within ``tol_q``), ascending."""
    vals = sorted(p for _, _, p in branch_probabilities(meas, prop, rho) if p is not None)
    out: list = []
    for v in vals:
        if not out or v - out[-1] > tol_q:
            out.append(v)
    return out


def assignment_indices(meas: Measurement, prop, q: float, rho, tol_q: float = TOL) -> tuple:
    if tol_q <= 0:
        raise ValueError("tol_q must be positive")
    return _Branches(meas, la.as_matrix(rho)).matching(la.as_matrix(prop),
                                                      lambda p: abs(p - q) <= tol_q)


def assignment_projector(meas: Measurement, prop, q: float, rho, tol_q: float = TOL) -> ComplexMatrix:
    """Sum of the outcome projectors on which the agent assigns probability ``q`` to ``prop``."""
    return meas.combine(assignment_indices(meas, prop, q, rho, tol_q))


def certainty_projector(meas: Measurement, prop, rho, epsilon: Optional[float] = None) -> ComplexMatrix:
    """``Q_X(F; 1)``; with ``epsilon`` the threshold relaxes to probability >= 1 - epsilon."""
    br = _Branches(meas, la.as_matrix(rho))
    return meas.combine(br.matching(la.as_matrix(prop), _certainty_test(epsilon)))


def _certainty_test(epsilon: Optional[float]) -> Callable[[float], bool]:
    if epsilon is None:
        return lambda p: abs(p - 1.0) <= TOL
    return lambda p: p >= 1.0 - epsilon - TOL


@dataclass(frozen=True, eq=False)
class RecursionTrace:
    levels: tuple  # ((A_0, B_0), ..., (A_N, B_N))
    alice_indices: tuple  # outcome indices making up each A_n
    bob_indices: tuple
    stabilization_index: int
    a_star: ComplexMatrix
    b_star: ComplexMatrix
    c_star: ComplexMatrix
    cc_weight: float
    q_alice: float
    q_bob: float
    epsilon: Optional[float] = None

    @property
    def refined(self) -> bool:
        """True when the recursion needed at least one refinement step."""
        return self.stabilization_index > 0


def run_measurement_recursion(alice: Measurement, bob: Measurement, prop, rho,
                              q_alice: float, q_bob: float, *, tol_q: float = TOL,
                              epsilon: Optional[float] = None) -> RecursionTrace:
    """Run the certainty recursion for arbitrary measurement families.

    This is the shared engine behind :func:`run_recursion`, the recorded
    (register) recursion and the (1 - epsilon)-certainty variant.
    """
    prop, rho = la.as_matrix(prop), la.as_matrix(rho)
    ba, bb = _Branches(alice, rho), _Branches(bob, rho)
    certain = _certainty_test(epsilon)

    ka = ba.matching(prop, lambda p: abs(p - q_alice) <= tol_q)
    kb = bb.matching(prop, lambda p: abs(p - q_bob) <= tol_q)
    a, b = alice.combine(ka), bob.combine(kb)
    levels, a_idx, b_idx = [(a, b)], [ka], [kb]

    cap = alice.count + bob.count + 1
    for n in range(cap):
        ca = ba.matching(b, certain)
        cb = bb.matching(a, certain)
        a_next = a @ alice.combine(ca)
        b_next = b @ bob.combine(cb)
        for label, op in (("A", a_next), ("B", b_next)):
            if not la.is_projector(op):
                raise NonProjectorProduct(f"{label}_{n + 1} is not a projector")
        if la.max_abs(a_next - a) <= TOL and la.max_abs(b_next - b) <= TOL:
            break
        a, b = a_next, b_next
        ka = tuple(k for k in ka if k in ca)
        kb = tuple(k for k in kb if k in cb)
        levels.append((a, b))
        a_idx.append(ka)
        b_idx.append(kb)
    else:  # pragma: no cover - each refinement drops a branch, so the cap is never hit
        raise RuntimeError("certainty recursion did not stabilize")

    c = a @ b
    return RecursionTrace(tuple(levels), tuple(a_idx), tuple(b_idx), len(levels) - 1,
                          a, b, c, la.expectation(c, rho), q_alice, q_bob, epsilon)


def run_recursion(s: Scenario, q_alice: float, q_bob: float, tol_q: float = TOL) -> RecursionTrace:
    return run_measurement_recursion(s.alice, s.bob, s.property, s.rho, q_alice, q_bob, tol_q=tol_q)


class Kind(str, enum.Enum):
    AGREEMENT = "Agreement"
    CCD = "CCD"
    NO_COMMON_CERTAINTY = "NoCommonCertainty"


@dataclass(frozen=True, eq=False)
class Classification:
    kind: Kind
    q_alice: float
    q_bob: float
    trace: RecursionTrace


def classify_trace(trace: RecursionTrace) -> Classification:
    if trace.cc_weight <= TOL:
        kind = Kind.NO_COMMON_CERTAINTY
    elif abs(trace.q_alice - trace.q_bob) <= TOL:
        kind = Kind.AGREEMENT
    else:
        kind = Kind.CCD
    return Classification(kind, trace.q_alice, trace.q_bob, trace)


def classify(s: Scenario, q_alice: float, q_bob: float, tol_q: float = TOL) -> Classification:
    return classify_trace(run_recursion(s, q_alice, q_bob, tol_q))


def verify_nondisturbance(trace: RecursionTrace, rho) -> float:
    """Max-entry distance between Alice's post-certainty state before and after
    Bob's certainty operator is applied.  Zero (to rounding) when the scenario commutes."""
    rho = la.as_matrix(rho)
    a, b = trace.a_star, trace.b_star
    ba = b @ a
    after = luders_update_general(ba, rho)
    before = luders_update(a, rho)
    return la.max_abs(after - before)


def luders_update_general(op, rho, tol: float = TOL) -> ComplexMatrix:
    """``op rho op^dagger / Tr(op rho op^dagger)`` for a not necessarily Hermitian ``op``."""
    post = op @ rho @ op.conj().T
    weight = float(np.real(np.trace(post)))
    if weight <= tol:
        raise ZeroConditioningWeight(f"conditioning weight {weight:.3g} is not positive", weight)
    return post / weight


def final_step_gap(s: Scenario, trace: RecursionTrace) -> float:
    """Largest gap between an Alice branch probability of E and the probability of E
    conditioned on her whole common-certainty projector, over branches in ``A_*``."""
    coarse = cond_prob(s.property, trace.a_star, s.rho).value
    branches = trace.alice_indices[-1]
    return max((abs(cond_prob(s.property, s.alice[i], s.rho).value - coarse) for i in branches),
               default=0.0)
