"""Measurement scenarios: factorized Hilbert space, shared state, two projective
measurements and a property of interest.

All operators are stored already embedded in the global space.  Construction
validates eagerly, so any ``Scenario`` that exists is well formed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import linalg as la
from .errors import DimensionMismatch, InvalidOperator
from .linalg import TOL, ComplexMatrix


class Role(str, enum.Enum):
    ALICE = "Alice"
    BOB = "Bob"
    INACCESSIBLE = "Inaccessible"
    SHARED = "Shared"


class Agent(str, enum.Enum):
    ALICE = "Alice"
    BOB = "Bob"


@dataclass(frozen=True)
class HilbertFactorization:
    dims: tuple
    roles: tuple = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise InvalidOperator(f"factor dimensions must be positive, got {self.dims}")
        roles = self.roles or _default_roles(len(dims))
        roles = tuple(Role(r) for r in roles)
        if len(roles) != len(dims):
            raise InvalidOperator("one role label is required per factor")
        if roles.count(Role.ALICE) > 1 or roles.count(Role.BOB) > 1:
            raise InvalidOperator("at most one factor may be labeled Alice and one Bob")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "roles", roles)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def index_of(self, role: Role) -> int:
        return self.roles.index(Role(role))


def _default_roles(n: int) -> tuple:
    if n == 3:
        return (Role.ALICE, Role.BOB, Role.INACCESSIBLE)
    if n == 2:
        return (Role.ALICE, Role.BOB)
    return (Role.SHARED,) * n


def embed_operator(op, factors: Sequence[int], factorization: HilbertFactorization) -> ComplexMatrix:
    """Embed an operator acting on ``factors`` (in the listed order) into the full space.

    Identities are placed on every other factor.
    """
    dims = factorization.dims
    factors = [int(f) for f in factors]
    if len(set(factors)) != len(factors):
        raise InvalidOperator(f"repeated factor index in {factors}")
    for f in factors:
        if not 0 <= f < len(dims):
            raise IndexError(f"factor index {f} out of range for {len(dims)} factors")
    op = la.as_matrix(op)
    local_dim = math.prod(dims[f] for f in factors)
    if op.shape[0] != local_dim:
        raise DimensionMismatch(f"operator has dim {op.shape[0]}, factors {factors} need {local_dim}")
    rest = [k for k in range(len(dims)) if k not in factors]
    full = np.kron(op, la.identity(math.prod(dims[k] for k in rest)))
    order = factors + rest
    if order == list(range(len(dims))):
        return full
    n = len(dims)
    shape = [dims[k] for k in order]
    t = full.reshape(shape + shape)
    # axis j of t belongs to factor order[j]; move it back to position order[j]
    perm = [order.index(k) for k in range(n)]
    t = t.transpose(perm + [n + p for p in perm])
    total = factorization.total_dim
    return np.ascontiguousarray(t.reshape(total, total))


def embed_local(op, factor_index: int, factorization: HilbertFactorization) -> ComplexMatrix:
    return embed_operator(op, [factor_index], factorization)


@dataclass(frozen=True, eq=False)
class Measurement:
    """A complete family of mutually orthogonal projectors, embedded globally."""

    agent: Agent
    projectors: tuple
    tol: float = TOL

    def __post_init__(self):
        object.__setattr__(self, "agent", Agent(self.agent))
        projs = tuple(la.as_matrix(p) for p in self.projectors)
        if not projs:
            raise InvalidOperator("a measurement needs at least one projector")
        dim = projs[0].shape[0]
        for k, p in enumerate(projs):
            if p.shape[0] != dim:
                raise DimensionMismatch("all projectors of a measurement must share one dimension")
            if not la.is_projector(p, self.tol):
                raise InvalidOperator(f"{self.agent.value} outcome {k} is not a projector")
        for k in range(len(projs)):
            for m in range(k + 1, len(projs)):
                if la.max_abs(projs[k] @ projs[m]) > self.tol:
                    raise InvalidOperator(
                        f"{self.agent.value} outcomes {k} and {m} have overlapping ranges")
        if la.max_abs(sum(projs) - la.identity(dim)) > self.tol:
            raise InvalidOperator(f"{self.agent.value} projectors do not sum to the identity")
        object.__setattr__(self, "projectors", projs)

    @property
    def count(self) -> int:
        return len(self.projectors)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def __len__(self):
        return len(self.projectors)

    def __getitem__(self, k):
        return self.projectors[k]

    def combine(self, indices) -> ComplexMatrix:
        """Sum of the projectors for the given outcome indices."""
        out = la.zeros(self.dim)
        for k in indices:
            out = out + self.projectors[k]
        return out


def measurement_from_blocks(agent, blocks, factor_index: int,
                            factorization: HilbertFactorization) -> Measurement:
    """Build a measurement from local projectors acting on one factor."""
    return Measurement(agent, tuple(embed_local(b, factor_index, factorization) for b in blocks))


def subspace_blocks(local_dim: int, index_sets) -> list:
    """Local diagonal projectors onto spans of computational basis vectors."""
    blocks = []
    for idx in index_sets:
        b = la.zeros(local_dim)
        for k in idx:
            b[k, k] = 1.0
        blocks.append(b)
    return blocks


@dataclass(frozen=True, eq=False)
class Scenario:
    factorization: HilbertFactorization
    rho: ComplexMatrix
    alice: Measurement
    bob: Measurement
    property: ComplexMatrix
    name: str = ""
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        rho = la.as_matrix(self.rho)
        prop = la.as_matrix(self.property)
        dim = self.factorization.total_dim
        for label, n in (("rho", rho.shape[0]), ("alice", self.alice.dim),
                         ("bob", self.bob.dim), ("property", prop.shape[0])):
            if n != dim:
                raise DimensionMismatch(f"{label} has dim {n}, factorization needs {dim}")
        if self.alice.agent is not Agent.ALICE or self.bob.agent is not Agent.BOB:
            raise InvalidOperator("measurement agents must be (Alice, Bob)")
        if not la.is_density(rho):
            raise InvalidOperator("rho is not a density matrix")
        if not la.is_projector(prop):
            raise InvalidOperator("property is not a projector")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "property", prop)
        object.__setattr__(self, "parameters", dict(self.parameters))

    @property
    def dim(self) -> int:
        return self.factorization.total_dim

    def with_state(self, rho, name: str = "") -> "Scenario":
        return Scenario(self.factorization, rho, self.alice, self.bob, self.property,
                        name=name or self.name, parameters=self.parameters)


@dataclass(frozen=True)
class CommutationReport:
    ab_ok: bool
    alice_e_ok: bool
    bob_e_ok: bool
    max_violation: float
    rho_ok: Optional[bool] = None

    @property
    def commuting(self) -> bool:
        """Both structural conditions hold (Alice/Bob and each agent with the property)."""
        return self.ab_ok and self.alice_e_ok and self.bob_e_ok


def _max_commutator(ps, qs) -> float:
    return max((la.commutator_norm(p, q) for p in ps for q in qs), default=0.0)


def check_commutation(s: Scenario, *, include_state: bool = False, tol: float = TOL) -> CommutationReport:
    """Check pairwise commutation of the agents' outcomes with each other and with the property.

    With ``include_state`` the report also says whether every outcome projector
    commutes with the state, the alternative sufficient condition for the
    two-lab and single-lab variants.
    """
    ab = _max_commutator(s.alice.projectors, s.bob.projectors)
    ae = _max_commutator(s.alice.projectors, [s.property])
    be = _max_commutator(s.bob.projectors, [s.property])
    worst = max(ab, ae, be)
    rho_ok = None
    if include_state:
        rv = _max_commutator(s.alice.projectors + s.bob.projectors, [s.rho])
        rho_ok = rv <= tol
        worst = max(worst, rv)
    return CommutationReport(ab <= tol, ae <= tol, be <= tol, worst, rho_ok)


def scenario_from_pure_state(factorization: HilbertFactorization, state_vector, alice_blocks,
                             bob_blocks, property, *, alice_factor: Optional[int] = None,
                             bob_factor: Optional[int] = None, name: str = "",
                             parameters: Optional[dict] = None) -> Scenario:
    """Scenario with ``rho = |psi><psi|`` and locally specified measurements.

    ``property`` must already be a global operator.  Local blocks are embedded
    on the Alice and Bob factors of ``factorization`` unless explicit factor
    indices are given.
    """
    psi = np.asarray(state_vector, dtype=np.complex128).reshape(-1)
    if psi.shape[0] != factorization.total_dim:
        raise DimensionMismatch(f"state vector has length {psi.shape[0]}, "
                                f"expected {factorization.total_dim}")
    if abs(np.vdot(psi, psi).real - 1.0) > TOL:
        raise InvalidOperator("state vector is not normalized")
    if alice_factor is None:
        alice_factor = factorization.index_of(Role.ALICE)
    if bob_factor is None:
        bob_factor = factorization.index_of(Role.BOB)
    alice = measurement_from_blocks(Agent.ALICE, alice_blocks, alice_factor, factorization)
    bob = measurement_from_blocks(Agent.BOB, bob_blocks, bob_factor, factorization)
    return Scenario(factorization, la.outer(psi), alice, bob, property,
                    name=name, parameters=parameters or {})


def trivial_measurement(agent, dim: int) -> Measurement:
    return Measurement(agent, (la.identity(dim),))
