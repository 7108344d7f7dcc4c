"""Recording measurement transcripts in a classical register.

Every transcript ``r = (i, j)`` gets a pointer state ``|r>`` and the recorded
state is ``rho' = sum_r M_r rho M_r^dagger (x) |r><r|`` with
``M_(i,j) = P_A^i P_B^j``.  The agents then condition on register projectors,
which commute with each other and with ``P_E (x) I_R``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .epistemics import ConditionalProbability, RecursionTrace, cond_prob, run_measurement_recursion
from .errors import NonCommutingMeasurements
from .linalg import TOL, ComplexMatrix
from .quantum_model import Agent, Measurement, Scenario, check_commutation


@dataclass(frozen=True)
class TranscriptSet:
    transcripts: tuple  # ((i, j), ...) in register-basis order

    def __post_init__(self):
        if len(set(self.transcripts)) != len(self.transcripts):
            raise ValueError("transcripts must be distinct")

    @property
    def register_dim(self) -> int:
        return len(self.transcripts)

    def alice_outcome(self, r: int) -> int:
        return self.transcripts[r][0]

    def bob_outcome(self, r: int) -> int:
        return self.transcripts[r][1]


@dataclass(frozen=True, eq=False)
class RecordedScenario:
    base: Scenario
    transcripts: TranscriptSet
    kraus: tuple
    rho_prime: ComplexMatrix
    alice_reg: Measurement
    bob_reg: Measurement
    property_ext: ComplexMatrix

    @property
    def alice_reg_projectors(self) -> tuple:
        return self.alice_reg.projectors

    @property
    def bob_reg_projectors(self) -> tuple:
        return self.bob_reg.projectors

    @property
    def dim(self) -> int:
        return self.rho_prime.shape[0]

    def block(self, r: int) -> ComplexMatrix:
        """The base-space block of ``rho'`` attached to pointer state ``r``."""
        d, n = self.base.dim, self.transcripts.register_dim
        return self.rho_prime.reshape(d, n, d, n)[:, r, :, r]

    def block_weights(self) -> dict:
        return {t: float(np.real(np.trace(self.block(r))))
                for r, t in enumerate(self.transcripts.transcripts)}

    def off_block_norm(self) -> float:
        """Largest entry coupling two different pointer states."""
        d, n = self.base.dim, self.transcripts.register_dim
        t = self.rho_prime.reshape(d, n, d, n).copy()
        for r in range(n):
            t[:, r, :, r] = 0
        return la.max_abs(t)


def _pointer_projector(indices, n: int) -> ComplexMatrix:
    p = la.zeros(n)
    for r in indices:
        p[r, r] = 1.0
    return p


def build_recorded(s: Scenario) -> RecordedScenario:
    if not check_commutation(s).ab_ok:
        raise NonCommutingMeasurements("Alice's and Bob's outcome projectors do not commute; "
                                       "the joint readout is not defined")
    la_, lb = s.alice.count, s.bob.count
    transcripts = TranscriptSet(tuple((i, j) for i in range(la_) for j in range(lb)))
    n = transcripts.register_dim
    kraus = tuple(s.alice[i] @ s.bob[j] for i, j in transcripts.transcripts)
    rho_prime = sum(np.kron(m @ s.rho @ m.conj().T, _pointer_projector([r], n))
                    for r, m in enumerate(kraus))
    eye = la.identity(s.dim)
    alice_reg = Measurement(Agent.ALICE, tuple(
        np.kron(eye, _pointer_projector([r for r, t in enumerate(transcripts.transcripts) if t[0] == i], n))
        for i in range(la_)))
    bob_reg = Measurement(Agent.BOB, tuple(
        np.kron(eye, _pointer_projector([r for r, t in enumerate(transcripts.transcripts) if t[1] == j], n))
        for j in range(lb)))
    return RecordedScenario(s, transcripts, kraus, rho_prime, alice_reg, bob_reg,
                            np.kron(s.property, la.identity(n)))


def kraus_completeness(rs: RecordedScenario) -> float:
    """Max-entry deviation of ``sum_r M_r^dagger M_r`` from the identity."""
    total = sum(m.conj().T @ m for m in rs.kraus)
    return la.max_abs(total - la.identity(rs.base.dim))


def recorded_cond_prob(rs: RecordedScenario, prop_ext, reg_proj) -> ConditionalProbability:
    return cond_prob(prop_ext, reg_proj, rs.rho_prime)


def run_recorded_recursion(rs: RecordedScenario, q_alice: float, q_bob: float,
                           tol_q: float = TOL) -> RecursionTrace:
    return run_measurement_recursion(rs.alice_reg, rs.bob_reg, rs.property_ext, rs.rho_prime,
                                     q_alice, q_bob, tol_q=tol_q)
