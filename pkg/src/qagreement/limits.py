"""Bounds on disagreement: the 0-1 impossibility check, state-perturbation
robustness and (1 - epsilon)-certainty."""

from __future__ import annotations

from dataclasses import dataclass

from . import linalg as la
from .epistemics import (RecursionTrace, _Branches, assignment_indices, cond_prob,
                         run_measurement_recursion, run_recursion)
from .errors import ZeroConditioningWeight
from .linalg import TOL, ComplexMatrix
from .quantum_model import Scenario


@dataclass(frozen=True)
class ZeroOneWitnessReport:
    value: float
    per_branch: tuple  # (i, Pr[E; P_A^i], Pr[Q_B(E;0); P_A^i]) for positive-weight branches
    alice_certain_e: tuple  # outcomes i with Pr[E; P_A^i] = 1
    bob_certain_not_e: tuple  # outcomes j with Pr[E; P_B^j] = 0
    alice_certain_bob_certain_not_e: tuple  # outcomes i with Pr[Q_B(E;0); P_A^i] = 1

    @property
    def nontrivial(self) -> bool:
        """Both certainty operators entering the witness are nonzero."""
        return bool(self.alice_certain_e and self.bob_certain_not_e)


def zero_one_check(s: Scenario) -> ZeroOneWitnessReport:
    """Weight of the state on "Alice certain of E and certain Bob is certain of not-E".

    Quantum mechanics forces this to vanish for every scenario, commuting or not.
    """
    ka1 = assignment_indices(s.alice, s.property, 1.0, s.rho)
    kb0 = assignment_indices(s.bob, s.property, 0.0, s.rho)
    qb0 = s.bob.combine(kb0)
    branches = _Branches(s.alice, s.rho)
    kc = branches.matching(qb0, lambda p: abs(p - 1.0) <= TOL)
    witness = s.alice.combine(ka1) @ s.alice.combine(kc)
    value = la.expectation(witness, s.rho)
    per_branch = tuple((i, branches.prob(s.property, i), branches.prob(qb0, i)) for i in branches.live)
    return ZeroOneWitnessReport(value, per_branch, ka1, kb0, kc)


def state_perturbation_bound(rho_a, rho_b, a_star, b_star) -> float:
    """``2 ||rho_a - rho_b||_1 / max(Tr(B A rho_a), Tr(A B rho_b))``."""
    rho_a, rho_b = la.as_matrix(rho_a), la.as_matrix(rho_b)
    a_star, b_star = la.as_matrix(a_star), la.as_matrix(b_star)
    wa = la.expectation(b_star @ a_star, rho_a)
    wb = la.expectation(a_star @ b_star, rho_b)
    denom = max(wa, wb)
    if denom <= TOL:
        raise ZeroConditioningWeight("common-certainty weight vanishes on both states", denom)
    return 2.0 * la.trace_norm(rho_a - rho_b) / denom


@dataclass(frozen=True)
class PerturbationCheck:
    q_alice: float
    q_bob: float
    bound: float
    c_alice: float
    c_bob: float
    trace_distance: float

    @property
    def gap(self) -> float:
        return abs(self.q_alice - self.q_bob)

    @property
    def holds(self) -> bool:
        return self.gap <= self.bound + TOL


def check_state_perturbation(s: Scenario, rho_b, q_alice: float, q_bob: float,
                             tol_q: float = TOL) -> PerturbationCheck:
    """Compare Alice's estimate under ``s.rho`` with Bob's under ``rho_b``.

    The common-certainty projector ``C_*`` comes from the recursion at
    ``s.rho``; both agents' estimates are the probability of E conditioned on
    that one ``C_*``, each under their own state.
    """
    rho_b = la.as_matrix(rho_b)
    tr = run_recursion(s, q_alice, q_bob, tol_q)
    c = tr.c_star
    pa = cond_prob(s.property, c, s.rho)
    pb = cond_prob(s.property, c, rho_b)
    bound = state_perturbation_bound(s.rho, rho_b, tr.a_star, tr.b_star)
    return PerturbationCheck(pa.value, pb.value, bound, pa.conditioning_weight,
                             pb.conditioning_weight, la.trace_norm(s.rho - rho_b))


@dataclass(frozen=True)
class EpsilonConfig:
    epsilon: float
    relax_assignment: bool = False  # also match A_0, B_0 within epsilon instead of tol_q

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")


def run_epsilon_recursion(s: Scenario, q_alice: float, q_bob: float, cfg: EpsilonConfig,
                          tol_q: float = TOL) -> RecursionTrace:
    """Certainty recursion with the probability-one test replaced by >= 1 - epsilon."""
    if cfg.relax_assignment:
        tol_q = max(tol_q, cfg.epsilon)
    return run_measurement_recursion(s.alice, s.bob, s.property, s.rho, q_alice, q_bob,
                                     tol_q=tol_q, epsilon=cfg.epsilon)


def epsilon_bound_holds(trace: RecursionTrace) -> bool:
    """``|q_A - q_B| <= 2 epsilon`` whenever the epsilon-recursion has positive weight."""
    if trace.epsilon is None:
        raise ValueError("trace was not produced by the epsilon recursion")
    if trace.cc_weight <= TOL:
        return True
    return abs(trace.q_alice - trace.q_bob) <= 2 * trace.epsilon + TOL
