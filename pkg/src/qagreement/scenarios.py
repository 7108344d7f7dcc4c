"""Worked examples and seeded random scenario generators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import linalg as la
from .classical import ClassicalModel, NoSignalingBox, global_assignment_model
from .quantum_model import (Agent, HilbertFactorization, Measurement, Scenario, embed_local,
                            embed_operator, scenario_from_pure_state, subspace_blocks)


def _ket(dims: Sequence[int], *digits: int) -> np.ndarray:
    v = np.zeros(math.prod(dims), dtype=np.complex128)
    v[np.ravel_multi_index(digits, dims)] = 1.0
    return v


def example1(theta: float = math.pi / 3) -> Scenario:
    """Commuting scenario on dimensions (4, 6, 2) whose recursion needs one refinement step.

    Alice's sectors are ``A_i = span{|2i>, |2i+1>}`` and Bob's
    ``B_j = span{|2j>, |2j+1>}``; the Bell state on ``A_i (x) B_j`` is
    ``(|2i, 2j> + |2i+1, 2j+1>)/sqrt(2)``.
    """
    dims = (4, 6, 2)
    fac = HilbertFactorization(dims)

    def bell(i, j, c):
        return (_ket(dims, 2 * i, 2 * j, c) + _ket(dims, 2 * i + 1, 2 * j + 1, c)) / math.sqrt(2)

    psi = (bell(0, 0, 0) + bell(1, 1, 0) + bell(1, 2, 1)) / math.sqrt(3)
    phi = np.array([math.cos(theta / 2), math.sin(theta / 2)], dtype=np.complex128)
    prop = embed_local(la.outer(phi), 2, fac)
    return scenario_from_pure_state(
        fac, psi, subspace_blocks(4, [(0, 1), (2, 3)]),
        subspace_blocks(6, [(0, 1), (2, 3), (4, 5)]), prop,
        name="example1", parameters={"theta": float(theta)})


def example2() -> Scenario:
    """Scenario on dims (3, 2, 2) exhibiting common certainty of disagreement.

    Bob's basis ``{|beta_0>, |beta_1>}`` is the computational basis.
    """
    dims = (3, 2, 2)
    fac = HilbertFactorization(dims)
    psi = (_ket(dims, 0, 0, 0) + _ket(dims, 1, 0, 0) + _ket(dims, 2, 1, 1)) / math.sqrt(3)
    phi_ac = np.zeros(6, dtype=np.complex128)
    phi_ac[[0, 2]] = 1 / math.sqrt(2)  # (|0>_A|0>_C + |1>_A|0>_C)/sqrt(2) on A (x) C
    prop = embed_operator(la.outer(phi_ac), [0, 2], fac)
    return scenario_from_pure_state(fac, psi, subspace_blocks(3, [(0,), (1,), (2,)]),
                                    subspace_blocks(2, [(0,), (1,)]), prop, name="example2")


# ---------------------------------------------------------------------------
# classical corpus


def pooling_model() -> ClassicalModel:
    """Four equally likely states; Alice sees rows, Bob columns, E = {w1, w4}."""
    q = Fraction(1, 4)
    return ClassicalModel(("w1", "w2", "w3", "w4"), (q, q, q, q),
                          ({"w1", "w2"}, {"w3", "w4"}), ({"w1", "w3"}, {"w2", "w4"}),
                          {"w1", "w4"})


def zero_one_box() -> NoSignalingBox:
    """Superquantum box over measurements a, b, e with 0-1 disagreement."""
    h, q = Fraction(1, 2), Fraction(1, 4)
    return NoSignalingBox.from_rows(("a", "b", "e"), {
        ("a", "b"): (h, 0, q, q),
        ("a", "e"): (h, 0, q, q),
        ("b", "e"): (0, h, h, 0),
    })


def product_box() -> NoSignalingBox:
    q = Fraction(1, 4)
    row = (q, q, q, q)
    return NoSignalingBox.from_rows(("a", "b", "e"),
                                    {("a", "b"): row, ("a", "e"): row, ("b", "e"): row})


SIGNED_WEIGHTS = tuple(Fraction(n, 16) for n in (3, 5, 5, -1, -3, 3, 3, 1))


def signed_phase_space_model() -> ClassicalModel:
    """Signed measure on global assignments of (a, b, e) realizing :func:`zero_one_box`.

    States ``w0..w7`` enumerate ``(a, b, e)`` in binary order.
    """
    return global_assignment_model(("a", "b", "e"), SIGNED_WEIGHTS, "a", "b", ("e", 1))


# ---------------------------------------------------------------------------
# random generators


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state_vector(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_density(rng: np.random.Generator, d: int, rank: Optional[int] = None) -> np.ndarray:
    rank = rank or d
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_composition(rng: np.random.Generator, total: int, parts: int) -> list:
    """Random sizes, each >= 1, summing to ``total``."""
    if not 1 <= parts <= total:
        raise ValueError(f"cannot split dimension {total} into {parts} nonempty blocks")
    cuts = sorted(rng.choice(np.arange(1, total), size=parts - 1, replace=False)) if parts > 1 else []
    edges = [0, *cuts, total]
    return [int(edges[k + 1] - edges[k]) for k in range(parts)]


def random_local_measurement(rng: np.random.Generator, d: int, count: int) -> list:
    """Orthonormal bases of a random decomposition of C^d into ``count`` subspaces."""
    u = random_unitary(rng, d)
    sizes = random_composition(rng, d, count)
    out, start = [], 0
    for s in sizes:
        out.append(u[:, start:start + s])
        start += s
    return out


def random_projector(rng: np.random.Generator, d: int, rank: Optional[int] = None) -> np.ndarray:
    if rank is None:
        rank = int(rng.integers(1, d)) if d > 1 else 1
    return la.projector_onto(random_unitary(rng, d)[:, :rank])


def _bases_to_projectors(bases) -> list:
    return [b @ b.conj().T for b in bases]


@dataclass
class _Parts:
    fac: HilbertFactorization
    alice: list  # local orthonormal bases per Alice outcome
    bob: list
    alice_meas: Measurement = field(init=False)
    bob_meas: Measurement = field(init=False)

    def __post_init__(self):
        self.alice_meas = Measurement(Agent.ALICE, tuple(
            embed_local(p, 0, self.fac) for p in _bases_to_projectors(self.alice)))
        self.bob_meas = Measurement(Agent.BOB, tuple(
            embed_local(p, 1, self.fac) for p in _bases_to_projectors(self.bob)))


def _cell_vector(rng, parts: _Parts, i: int, j: int, c_basis: np.ndarray) -> np.ndarray:
    """Random vector in ``A_i (x) B_j (x) span(c_basis)``."""
    a = parts.alice[i] @ (rng.standard_normal(parts.alice[i].shape[1])
                          + 1j * rng.standard_normal(parts.alice[i].shape[1]))
    b = parts.bob[j] @ (rng.standard_normal(parts.bob[j].shape[1])
                        + 1j * rng.standard_normal(parts.bob[j].shape[1]))
    c = c_basis @ (rng.standard_normal(c_basis.shape[1]) + 1j * rng.standard_normal(c_basis.shape[1]))
    return np.kron(np.kron(a, b), c)


def _random_branch_counts(rng, d_a: int, d_b: int, minimum: int = 1) -> tuple:
    return (int(rng.integers(min(minimum, d_a), d_a + 1)), int(rng.integers(min(minimum, d_b), d_b + 1)))


def _range_basis(p: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    w, v = np.linalg.eigh(p)
    return v[:, w > 1 - tol]


def _as_rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_commuting_scenario(seed, dims: Sequence[int] = (2, 2, 2),
                              branch_counts: Optional[Sequence[int]] = None, *,
                              sectored: bool = False, leak: float = 0.0,
                              mixed: bool = False) -> Scenario:
    """Random scenario satisfying both commutation conditions by construction.

    Alice and Bob measure random orthogonal decompositions of their factors and
    the property is a random projector on the inaccessible factor.  By default
    the state is a Haar-random pure state.  With ``sectored`` the state is
    supported on a random set of ``(Alice outcome, Bob outcome)`` cells, with the
    inaccessible part of each cell drawn inside the property's range, its
    kernel, or anywhere; ``leak`` then adds that much weight of a generic
    random vector.  ``mixed`` replaces the superposition by a mixture of cells.
    """
    rng = _as_rng(seed)
    d_a, d_b, d_c = (int(d) for d in dims)
    if min(d_a, d_b, d_c) < 2:
        raise ValueError(f"each factor needs dimension >= 2, got {tuple(dims)}")
    if branch_counts is None:
        branch_counts = _random_branch_counts(rng, d_a, d_b, minimum=2 if sectored else 1)
    l_a, l_b = branch_counts
    fac = HilbertFactorization((d_a, d_b, d_c))
    parts = _Parts(fac, random_local_measurement(rng, d_a, l_a), random_local_measurement(rng, d_b, l_b))
    pe_local = random_projector(rng, d_c)
    prop = embed_local(pe_local, 2, fac)

    if not sectored:
        rho = la.outer(random_state_vector(rng, fac.total_dim))
    else:
        choices = [_range_basis(pe_local), _range_basis(np.eye(d_c) - pe_local), np.eye(d_c)]
        cells = [(i, j) for i in range(l_a) for j in range(l_b)]
        chosen = [c for c in cells if rng.random() < 0.5] or [cells[int(rng.integers(len(cells)))]]
        label = _cell_labels(rng, l_a, 3)
        vecs = [_cell_vector(rng, parts, i, j, choices[label(i)]) for i, j in chosen]
        rho = _combine(rng, vecs, mixed)
        if leak > 0:
            rho = (1 - leak) * rho + leak * la.outer(random_state_vector(rng, fac.total_dim))
    return Scenario(fac, _hermitize(rho), parts.alice_meas, parts.bob_meas, prop,
                    name="random_commuting", parameters={"sectored": float(sectored), "leak": leak})


def _cell_labels(rng, l_a: int, n_labels: int) -> Callable[[int], int]:
    """Label chooser for cells: half the time fixed per Alice outcome, otherwise per cell."""
    if rng.random() < 0.5:
        fixed = rng.integers(0, n_labels, size=l_a)
        return lambda i: int(fixed[i])
    return lambda i: int(rng.integers(n_labels))


def _combine(rng, vecs, mixed: bool) -> np.ndarray:
    if mixed:
        weights = rng.random(len(vecs)) + 0.1
        rho = sum(w * la.outer(v / np.linalg.norm(v)) for w, v in zip(weights, vecs))
        return rho / np.trace(rho).real
    psi = sum(vecs)
    return la.outer(psi / np.linalg.norm(psi))


def _hermitize(rho: np.ndarray) -> np.ndarray:
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_noncommuting_scenario(seed, dims: Sequence[int] = (2, 2, 2),
                                 branch_counts: Optional[Sequence[int]] = None, *,
                                 structured: bool = False) -> Scenario:
    """Random scenario whose property is a random projector on Alice's and the
    inaccessible factor jointly, so it generally fails to commute with Alice.

    ``structured`` builds the state from vectors lying in Alice/Bob outcome
    cells intersected with the property's range or kernel, which makes the
    agents' certainty operators nonzero far more often than a generic state.
    """
    rng = _as_rng(seed)
    d_a, d_b, d_c = (int(d) for d in dims)
    if branch_counts is None:
        branch_counts = _random_branch_counts(rng, d_a, d_b, minimum=2 if structured else 1)
        # a single Alice outcome commutes with everything; keep her measurement nontrivial
        branch_counts = (max(branch_counts[0], 2), branch_counts[1])
    l_a, l_b = branch_counts
    fac = HilbertFactorization((d_a, d_b, d_c))
    parts = _Parts(fac, random_local_measurement(rng, d_a, l_a), random_local_measurement(rng, d_b, l_b))

    d_ac = d_a * d_c
    # plant a few property vectors inside single Alice sectors so that certainty of E is reachable
    planted = []
    for _ in range(int(rng.integers(0, 3))):
        i = int(rng.integers(l_a))
        a = parts.alice[i] @ (rng.standard_normal(parts.alice[i].shape[1])
                              + 1j * rng.standard_normal(parts.alice[i].shape[1]))
        planted.append(np.kron(a, random_state_vector(rng, d_c)))
    extra = int(rng.integers(0 if planted else 1, max(2, d_ac // 2)))
    vecs = planted + [random_state_vector(rng, d_ac) for _ in range(extra)]
    pe_ac = la.projector_onto(np.array(vecs).T)
    if np.trace(pe_ac).real > d_ac - 0.5:  # keep the property nontrivial
        pe_ac = la.projector_onto(np.array(vecs[:-1]).T) if len(vecs) > 1 else random_projector(rng, d_ac, 1)
    prop = embed_operator(pe_ac, [0, 2], fac)

    if not structured:
        rho = la.outer(random_state_vector(rng, fac.total_dim))
        return Scenario(fac, rho, parts.alice_meas, parts.bob_meas, prop, name="random_noncommuting")

    e_basis = _range_basis(pe_ac)
    ne_basis = _range_basis(np.eye(d_ac) - pe_ac)
    vecs = []
    label = _cell_labels(rng, l_a, 3)
    for _ in range(int(rng.integers(1, 5))):
        i, j = int(rng.integers(l_a)), int(rng.integers(l_b))
        sector = np.kron(parts.alice[i] @ parts.alice[i].conj().T, np.eye(d_c))
        target = (e_basis, ne_basis, None)[label(i)]
        if target is None:
            ac_basis = _range_basis(sector)
        else:
            ac_basis = _intersection_basis(sector, target @ target.conj().T)
            if ac_basis.shape[1] == 0:
                ac_basis = target
        ac = ac_basis @ (rng.standard_normal(ac_basis.shape[1]) + 1j * rng.standard_normal(ac_basis.shape[1]))
        b = parts.bob[j] @ (rng.standard_normal(parts.bob[j].shape[1])
                            + 1j * rng.standard_normal(parts.bob[j].shape[1]))
        # ac lives on A (x) C; insert Bob's factor in the middle
        v = np.einsum("ac,b->abc", ac.reshape(d_a, d_c), b).reshape(-1)
        vecs.append(v)
    rho = _combine(rng, vecs, mixed=bool(rng.integers(2)))
    return Scenario(fac, _hermitize(rho), parts.alice_meas, parts.bob_meas, prop,
                    name="random_noncommuting")


def _intersection_basis(p: np.ndarray, q: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of ``ran(p) & ran(q)`` for projectors ``p``, ``q``."""
    return _range_basis(p @ q @ p, tol)


def random_rational_model(seed, n_states: Optional[int] = None, max_weight: int = 3) -> ClassicalModel:
    """Random unsigned model with small integer weights (exact Fractions) and
    random partitions; every partition cell has positive weight."""
    rng = _as_rng(seed)
    n = n_states or int(rng.integers(2, 13))
    names = tuple(f"s{k}" for k in range(n))
    while True:
        raw = rng.integers(0, max_weight + 1, size=n)
        if raw.sum() == 0:
            continue
        alice = _random_partition(rng, names)
        bob = _random_partition(rng, names)
        w = dict(zip(names, raw))
        if all(sum(w[s] for s in c) > 0 for c in (*alice, *bob)):
            break
    total = int(raw.sum())
    event = frozenset(s for s in names if rng.random() < 0.5)
    return ClassicalModel(names, tuple(Fraction(int(x), total) for x in raw), alice, bob, event)


def _random_partition(rng, names) -> tuple:
    k = int(rng.integers(1, len(names) + 1))
    labels = rng.integers(0, k, size=len(names))
    cells = {}
    for s, lab in zip(names, labels):
        cells.setdefault(int(lab), set()).add(s)
    return tuple(frozenset(c) for c in cells.values())


@dataclass(frozen=True)
class ExampleSpec:
    name: str
    kind: str  # quantum | classical | box
    builder: Callable
    parameters: dict = field(default_factory=dict)
    description: str = ""

    def build(self, **overrides):
        return self.builder(**{**self.parameters, **overrides})


EXAMPLES = {
    spec.name: spec for spec in (
        ExampleSpec("example1", "quantum", example1, {"theta": math.pi / 3},
                    "commuting system on dims (4, 6, 2); recursion refines once"),
        ExampleSpec("example2", "quantum", example2, {},
                    "system on dims (3, 2, 2) with common certainty of disagreement"),
        ExampleSpec("pooling", "classical", pooling_model, {},
                    "4-state model: common certainty of 1/2 differs from pooled posteriors"),
        ExampleSpec("zero-one-box", "box", zero_one_box, {},
                    "no-signaling box exhibiting 0-1 disagreement"),
        ExampleSpec("product-box", "box", product_box, {}, "independent uniform box"),
        ExampleSpec("signed-phase-space", "classical", signed_phase_space_model, {},
                    "signed measure on global assignments realizing zero-one-box"),
    )
}
