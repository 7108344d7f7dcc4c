"""Finite classical models, no-signaling boxes and signed phase-space measures.

Weights are kept as :class:`fractions.Fraction` whenever the inputs are
rational, so equalities such as ``p(E | cell) == q`` are decided exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Hashable, Mapping, Optional, Sequence

from .errors import ContextError, InvalidOperator, SignedConditioning, ZeroConditioningWeight
from .linalg import TOL

#: Column order used by box tables: outcomes (x, y) of the context pair (X, Y).
OUTCOME_ORDER = ((0, 0), (1, 0), (0, 1), (1, 1))


def to_weight(x):
    """Exact Fraction for ints, Fractions and rational strings like ``"3/16"``; float otherwise."""
    if isinstance(x, (Rational, str)):
        return Fraction(x)
    return float(x)


def _is_exact(*values) -> bool:
    return all(isinstance(v, Fraction) for v in values)


def _equal(x, y) -> bool:
    if _is_exact(x, y):
        return x == y
    return abs(float(x) - float(y)) <= TOL


def _zero(x) -> bool:
    return x == 0 if isinstance(x, Fraction) else abs(x) <= TOL


@dataclass(frozen=True)
class ClassicalModel:
    states: tuple
    weights: tuple
    alice_partition: tuple
    bob_partition: tuple
    event: frozenset
    signed: bool = False
    assignments: Optional[Mapping] = field(default=None, compare=False)

    def __post_init__(self):
        states = tuple(self.states)
        if len(set(states)) != len(states):
            raise InvalidOperator("states must be distinct")
        if len(self.weights) != len(states):
            raise InvalidOperator("one weight per state is required")
        weights = tuple(to_weight(w) for w in self.weights)
        total = sum(weights)
        if not _equal(total, Fraction(1) if _is_exact(total) else 1.0):
            raise InvalidOperator(f"weights sum to {total}, not 1")
        if not self.signed and any(float(w) < -TOL for w in weights):
            raise InvalidOperator("negative weight in an unsigned model")
        alice = tuple(frozenset(c) for c in self.alice_partition)
        bob = tuple(frozenset(c) for c in self.bob_partition)
        for name, part in (("alice", alice), ("bob", bob)):
            covered = [w for c in part for w in c]
            if sorted(map(states.index, covered)) != list(range(len(states))):
                raise InvalidOperator(f"{name} partition does not cover the states disjointly")
        event = frozenset(self.event)
        if not event <= set(states):
            raise InvalidOperator("event contains unknown states")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "alice_partition", alice)
        object.__setattr__(self, "bob_partition", bob)
        object.__setattr__(self, "event", event)

    @property
    def exact(self) -> bool:
        return _is_exact(*self.weights)

    def weight(self, subset) -> Fraction | float:
        w = dict(zip(self.states, self.weights))
        return sum((w[s] for s in subset), Fraction(0) if self.exact else 0.0)

    def cell(self, partition: Sequence[frozenset], state: Hashable) -> frozenset:
        for c in partition:
            if state in c:
                return c
        raise KeyError(state)


def _conditional(m: ClassicalModel, event, cell):
    w = m.weight(cell)
    if w <= 0 if isinstance(w, Fraction) else w <= TOL:
        raise SignedConditioning(f"conditioning cell {sorted(map(str, cell))} has weight {w}")
    return m.weight(frozenset(event) & cell) / w


@dataclass(frozen=True)
class ClassicalTrace:
    a_levels: tuple
    b_levels: tuple
    a_final: frozenset
    b_final: frozenset
    c_inf: frozenset
    weight: Fraction | float


def classical_recursion(m: ClassicalModel, q_alice, q_bob) -> ClassicalTrace:
    """Set-valued certainty recursion on a finite probability space."""
    if m.signed:
        raise SignedConditioning("the certainty recursion needs an unsigned measure")
    q_alice, q_bob = to_weight(q_alice), to_weight(q_bob)

    def assigns(partition, target, q):
        out = set()
        for c in partition:
            if _equal(_conditional(m, target, c), q):
                out |= c
        return frozenset(out)

    a = assigns(m.alice_partition, m.event, q_alice)
    b = assigns(m.bob_partition, m.event, q_bob)
    a_levels, b_levels = [a], [b]
    while True:
        one = Fraction(1)
        a_next = a & assigns(m.alice_partition, b, one)
        b_next = b & assigns(m.bob_partition, a, one)
        if a_next == a and b_next == b:
            break
        a, b = a_next, b_next
        a_levels.append(a)
        b_levels.append(b)
    c = frozenset.intersection(*a_levels, *b_levels)
    return ClassicalTrace(tuple(a_levels), tuple(b_levels), a, b, c, m.weight(c))


def pooled_posterior(m: ClassicalModel, state):
    """Probability of the event given both agents' cells at ``state``."""
    joint = m.cell(m.alice_partition, state) & m.cell(m.bob_partition, state)
    w = m.weight(joint)
    if _zero(w) or w < 0:
        raise ZeroConditioningWeight(f"joint cell at {state!r} has weight {w}", float(w))
    return m.weight(m.event & joint) / w


def signed_conditional(m: ClassicalModel, event, cell):
    """``lambda(event & cell) / lambda(cell)``; may leave [0, 1] for signed measures."""
    cell = frozenset(cell)
    w = m.weight(cell)
    if _zero(w):
        raise ZeroConditioningWeight(f"cell {sorted(map(str, cell))} has zero weight", float(w))
    return m.weight(frozenset(event) & cell) / w


@dataclass(frozen=True)
class SignedChain:
    state: Hashable
    alice_cell: frozenset
    alice_prob_event: Fraction | float
    bob_certain_not_event: frozenset  # states where Bob assigns probability 0 to the event
    alice_prob_bob_certain_not: Fraction | float

    @property
    def zero_one(self) -> bool:
        return _equal(self.alice_prob_event, to_weight(1)) and \
            _equal(self.alice_prob_bob_certain_not, to_weight(1))


def signed_zero_one_chain(m: ClassicalModel, state) -> SignedChain:
    """Alice's conditional chain at ``state``: her probability of the event, and her
    probability that Bob assigns probability zero to it."""
    cell = m.cell(m.alice_partition, state)
    p_event = signed_conditional(m, m.event, cell)
    bob_zero = frozenset().union(*[c for c in m.bob_partition
                                   if not _zero(m.weight(c))
                                   and _zero(signed_conditional(m, m.event, c))])
    return SignedChain(state, cell, p_event, bob_zero, signed_conditional(m, bob_zero, cell))


def global_assignment_model(labels: Sequence[str], weights: Mapping | Sequence,
                            alice_label: str, bob_label: str, event: tuple,
                            signed: bool = True) -> ClassicalModel:
    """Model on the phase space of global assignments ``{0,1}^labels``.

    ``weights`` is either a sequence in lexicographic order of assignments (first
    label most significant) or a mapping from outcome tuples to weights.
    Alice and Bob are partitioned by the value of their own label; ``event`` is
    ``(label, outcome)``.
    """
    labels = tuple(labels)
    points = list(itertools.product((0, 1), repeat=len(labels)))
    if not isinstance(weights, Mapping):
        weights = dict(zip(points, weights))
    names = [f"w{k}" for k in range(len(points))]
    assign = {n: dict(zip(labels, p)) for n, p in zip(names, points)}

    def split(label):
        return tuple(frozenset(n for n in names if assign[n][label] == v) for v in (0, 1))

    ev_label, ev_val = event
    return ClassicalModel(tuple(names), tuple(weights[p] for p in points), split(alice_label),
                          split(bob_label),
                          frozenset(n for n in names if assign[n][ev_label] == ev_val),
                          signed=signed, assignments=assign)


@dataclass(frozen=True)
class NoSignalingBox:
    """Joint outcome distributions for pairs of compatible binary measurements.

    ``contexts`` maps an ordered label pair ``(X, Y)`` to ``{(x, y): prob}``.
    """

    labels: tuple
    contexts: Mapping

    def __post_init__(self):
        labels = tuple(self.labels)
        ctx = {}
        for pair, dist in self.contexts.items():
            x, y = pair
            if x == y or x not in labels or y not in labels:
                raise ContextError(f"bad context {pair}")
            dist = {tuple(k): to_weight(v) for k, v in dist.items()}
            if set(dist) != set(OUTCOME_ORDER):
                raise InvalidOperator(f"context {pair} must list all four outcome pairs")
            if any(float(v) < -TOL for v in dist.values()):
                raise InvalidOperator(f"context {pair} has a negative entry")
            if not _equal(sum(dist.values()), to_weight(1) if _is_exact(*dist.values()) else 1.0):
                raise InvalidOperator(f"context {pair} does not sum to 1")
            ctx[(x, y)] = dist
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "contexts", ctx)
        bad = self.signaling_violations()
        if bad:
            raise InvalidOperator(f"box is signaling: {bad[0]}")

    @classmethod
    def from_rows(cls, labels, rows: Mapping) -> "NoSignalingBox":
        """Build from rows listed in ``OUTCOME_ORDER``, keyed by context pair."""
        return cls(labels, {pair: dict(zip(OUTCOME_ORDER, row)) for pair, row in rows.items()})

    def context_for(self, x: str, y: str):
        """Return ``(pair, swapped)`` for the context containing both labels."""
        if (x, y) in self.contexts:
            return (x, y), False
        if (y, x) in self.contexts:
            return (y, x), True
        raise ContextError(f"{x} and {y} are not jointly measurable")

    def marginal(self, label: str, outcome: int, pair) -> Fraction | float:
        dist = self.contexts[pair]
        pos = pair.index(label)
        return sum(v for k, v in dist.items() if k[pos] == outcome)

    def signaling_violations(self) -> list:
        out = []
        for label in self.labels:
            pairs = [p for p in self.contexts if label in p]
            for o in (0, 1):
                vals = [self.marginal(label, o, p) for p in pairs]
                if any(not _equal(v, vals[0]) for v in vals[1:]):
                    out.append((label, o, dict(zip(pairs, vals))))
        return out


def box_conditional(box: NoSignalingBox, target: tuple, given: tuple):
    """``Pr[target | given]`` within the context containing both labels."""
    (tl, to), (gl, go) = target, given
    if tl == gl:
        raise ContextError("target and conditioning measurement must differ")
    pair, swapped = box.context_for(gl, tl)
    dist = box.contexts[pair]
    if swapped:
        joint = dist[(to, go)]
        marg = box.marginal(gl, go, pair)
    else:
        joint = dist[(go, to)]
        marg = box.marginal(gl, go, pair)
    if _zero(marg):
        raise ZeroConditioningWeight(f"Pr[{gl}={go}] is zero", float(marg))
    return joint / marg


@dataclass(frozen=True)
class ChainReport:
    alice_certain_event: Optional[Fraction | float]
    alice_certain_bob_outcome: Optional[Fraction | float]
    bob_certain_not_event: Optional[Fraction | float]

    @property
    def holds(self) -> bool:
        one = to_weight(1)
        vals = (self.alice_certain_event, self.alice_certain_bob_outcome, self.bob_certain_not_event)
        return all(v is not None and _equal(v, one if isinstance(v, Fraction) else 1.0) for v in vals)


def zero_one_chain(box: NoSignalingBox, alice: str = "a", bob: str = "b", event: str = "e") -> ChainReport:
    """The three conditionals of the implication triangle
    ``alice=1 => event=1``, ``alice=1 => bob=1``, ``bob=1 => event=0``.
    An undefined conditional (zero-probability outcome) is reported as ``None``."""

    def cond(target, given):
        try:
            return box_conditional(box, target, given)
        except ZeroConditioningWeight:
            return None

    return ChainReport(cond((event, 1), (alice, 1)), cond((bob, 1), (alice, 1)),
                       cond((event, 0), (bob, 1)))


def check_zero_one_chain(box: NoSignalingBox, alice: str = "a", bob: str = "b",
                         event: str = "e") -> bool:
    return zero_one_chain(box, alice, bob, event).holds


def signed_realization_check(m: ClassicalModel, box: NoSignalingBox) -> bool:
    """True iff every context distribution of ``box`` is a marginal of ``m``."""
    if m.assignments is None:
        raise ContextError("model carries no global assignments")
    known = set(next(iter(m.assignments.values())))
    if not set(box.labels) <= known:
        raise ContextError(f"box labels {box.labels} not covered by model labels {sorted(known)}")
    w = dict(zip(m.states, m.weights))
    for (x, y), dist in box.contexts.items():
        for (ox, oy), p in dist.items():
            lam = sum((w[s] for s, a in m.assignments.items() if a[x] == ox and a[y] == oy),
                      Fraction(0) if m.exact else 0.0)
            if not _equal(lam, p):
                return False
    return True


def box_from_global(labels: Sequence[str], weights: Mapping | Sequence,
                    pairs: Sequence[tuple]) -> NoSignalingBox:
    """Marginalize a global distribution over ``{0,1}^labels`` onto the given contexts."""
    labels = tuple(labels)
    points = list(itertools.product((0, 1), repeat=len(labels)))
    if not isinstance(weights, Mapping):
        weights = dict(zip(points, weights))
    ctx = {}
    for x, y in pairs:
        ix, iy = labels.index(x), labels.index(y)
        ctx[(x, y)] = {o: sum(to_weight(weights[p]) for p in points if (p[ix], p[iy]) == o)
                       for o in OUTCOME_ORDER}
    return NoSignalingBox(labels, ctx)
