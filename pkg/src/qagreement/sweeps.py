"""Seeded randomized property runs.

Each sweep draws scenarios from the generators in :mod:`scenarios`, evaluates
one property per instance and returns the measured values next to the bound
they must respect.  Instance ``k`` of a sweep with seed ``s`` always uses the
generator ``default_rng([s, k])``, so a failing instance can be replayed alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import linalg as la
from .classical import _conditional, classical_recursion
from .epistemics import achieved_probabilities, classify_trace, run_recursion
from .errors import ZeroConditioningWeight
from .limits import EpsilonConfig, check_state_perturbation, run_epsilon_recursion, zero_one_check
from .linalg import TOL
from .register import build_recorded, run_recorded_recursion
from .scenarios import (random_commuting_scenario, random_density, random_noncommuting_scenario,
                        random_rational_model)

COMMUTING_DIMS = ((2, 2, 2), (3, 2, 2), (2, 3, 2), (2, 2, 3), (3, 3, 2), (3, 2, 3), (2, 3, 3),
                  (3, 3, 3), (4, 3, 3), (3, 4, 3))
ZERO_ONE_DIMS = ((2, 2, 2), (3, 2, 2), (2, 3, 2), (2, 2, 3), (3, 2, 3), (2, 3, 3), (3, 3, 2),
                 (4, 3, 2), (2, 4, 3), (3, 4, 2), (2, 2, 4), (4, 2, 3))
EPSILONS = (0.001, 0.01, 0.05)


@dataclass
class SweepResult:
    kind: str
    seed: int
    count: int
    values: list = field(default_factory=list)  # measured quantity per checked item
    bounds: list = field(default_factory=list)  # bound the value must not exceed
    failures: list = field(default_factory=list)  # (instance, detail)
    stats: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def add(self, value: float, bound: float, instance: int, detail: str = "") -> None:
        self.values.append(float(value))
        self.bounds.append(float(bound))
        if value > bound:
            self.failures.append((instance, detail or f"{value:.3g} > {bound:.3g}"))

    def bump(self, key: str, by: int = 1) -> None:
        self.stats[key] = self.stats.get(key, 0) + by

    def summary(self) -> dict:
        vals = np.asarray(self.values, dtype=float)
        return {
            "kind": self.kind,
            "seed": self.seed,
            "count": self.count,
            "checks": len(self.values),
            "failures": len(self.failures),
            "max_value": float(vals.max()) if vals.size else 0.0,
            "passed": self.passed,
            **{k: self.stats[k] for k in sorted(self.stats)},
        }


def instance_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng([seed, k])


def commuting_instance(seed: int, k: int):
    """Instance ``k`` of the commuting family: generic, sectored or sectored-mixed."""
    rng = instance_rng(seed, k)
    dims = COMMUTING_DIMS[k % len(COMMUTING_DIMS)]
    mode = k % 3
    return random_commuting_scenario(rng, dims, sectored=mode > 0, mixed=mode == 2)


def zero_one_instance(seed: int, k: int):
    rng = instance_rng(seed, k)
    dims = ZERO_ONE_DIMS[k % len(ZERO_ONE_DIMS)]
    mode = k % 4
    if mode == 0:
        return random_commuting_scenario(rng, dims, sectored=True, mixed=bool(k % 8 == 4))
    if mode == 1:
        return random_commuting_scenario(rng, dims)
    return random_noncommuting_scenario(rng, dims, structured=mode == 2)


def branch_pairs(s, tol_q: float = TOL) -> list:
    """All ``(q_A, q_B)`` pairs realized by some positive-weight branch of each agent."""
    qa = achieved_probabilities(s.alice, s.property, s.rho, tol_q)
    qb = achieved_probabilities(s.bob, s.property, s.rho, tol_q)
    return [(a, b) for a in qa for b in qb]


def agreement_sweep(seed: int, count: int) -> SweepResult:
    """Commuting scenarios never exhibit common certainty of disagreement."""
    res = SweepResult("agreement", seed, count)
    for k in range(count):
        s = commuting_instance(seed, k)
        for qa, qb in branch_pairs(s):
            c = classify_trace(run_recursion(s, qa, qb))
            res.bump(c.kind.value)
            if c.trace.cc_weight > TOL:
                res.add(abs(qa - qb), TOL, k, f"CCD at q=({qa:.6g}, {qb:.6g})")
    return res


def zero_one_sweep(seed: int, count: int, bound: float = 1e-8) -> SweepResult:
    res = SweepResult("zero-one", seed, count)
    for k in range(count):
        rep = zero_one_check(zero_one_instance(seed, k))
        res.bump("nontrivial", int(rep.nontrivial))
        res.add(abs(rep.value), bound, k)
    return res


def register_sweep(seed: int, count: int) -> SweepResult:
    """After recording, no realized pair shows common certainty of disagreement."""
    res = SweepResult("register", seed, count)
    for k in range(count):
        # the register multiplies the dimension by l_A * l_B, so stay small
        s = random_commuting_scenario(instance_rng(seed, k), COMMUTING_DIMS[k % 4],
                                      sectored=k % 3 > 0, mixed=k % 3 == 2)
        rs = build_recorded(s)
        qa_vals = achieved_probabilities(rs.alice_reg, rs.property_ext, rs.rho_prime)
        qb_vals = achieved_probabilities(rs.bob_reg, rs.property_ext, rs.rho_prime)
        for qa in qa_vals:
            for qb in qb_vals:
                tr = run_recorded_recursion(rs, qa, qb)
                if tr.cc_weight > TOL:
                    res.bump("recorded_common_certainty")
                    res.add(abs(qa - qb), TOL, k, f"recorded CCD at q=({qa:.6g}, {qb:.6g})")
    return res


def epsilon_sweep(seed: int, count: int, epsilons=EPSILONS) -> SweepResult:
    """``|q_A - q_B| <= 2 epsilon`` whenever (1 - epsilon)-common certainty has weight."""
    res = SweepResult("epsilon", seed, count)
    for eps in epsilons:
        cfg = EpsilonConfig(eps)
        for k in range(count):
            rng = instance_rng(seed, k)
            dims = COMMUTING_DIMS[k % len(COMMUTING_DIMS)]
            leak = float(rng.uniform(0.0, 3 * eps))
            s = random_commuting_scenario(rng, dims, sectored=True, leak=leak, mixed=bool(k % 2))
            for qa, qb in branch_pairs(s):
                tr = run_epsilon_recursion(s, qa, qb, cfg)
                if tr.cc_weight > TOL:
                    res.bump(f"common_certainty_eps_{eps:g}")
                    res.add(abs(qa - qb), 2 * eps + TOL, k)
    return res


def perturb(rho, rng: np.random.Generator, max_norm: float = 0.1):
    """Depolarize or mix toward a random state; trace distance at most ``max_norm``."""
    d = rho.shape[0]
    t = float(rng.uniform(0.0, max_norm / 2))
    target = la.identity(d) / d if rng.random() < 0.5 else random_density(rng, d)
    return (1 - t) * rho + t * target


def perturbation_sweep(seed: int, count: int, max_norm: float = 0.1,
                       max_attempts: int | None = None) -> SweepResult:
    """State-perturbation robustness over ``count`` pairs with common certainty."""
    res = SweepResult("perturbation", seed, count)
    attempts = max_attempts or 20 * count
    valid = 0
    for k in range(attempts):
        if valid >= count:
            break
        rng = instance_rng(seed, k)
        s = random_commuting_scenario(rng, COMMUTING_DIMS[k % 7], sectored=True, mixed=bool(k % 2))
        rho_b = perturb(s.rho, rng, max_norm)
        used = False
        for qa, qb in branch_pairs(s):
            if run_recursion(s, qa, qb).cc_weight <= TOL:
                continue
            try:
                chk = check_state_perturbation(s, rho_b, qa, qb)
            except ZeroConditioningWeight:
                res.bump("skipped_zero_weight")
                continue
            used = True
            res.add(chk.gap, chk.bound + TOL, k)
            res.stats["max_trace_distance"] = max(res.stats.get("max_trace_distance", 0.0),
                                                  chk.trace_distance)
        valid += used
    res.stats["pairs"] = valid
    return res


def classical_sweep(seed: int, count: int) -> SweepResult:
    """Exact classical agreement on random rational models."""
    res = SweepResult("classical", seed, count)
    for k in range(count):
        m = random_rational_model(instance_rng(seed, k))
        qa = {_conditional(m, m.event, c) for c in m.alice_partition}
        qb = {_conditional(m, m.event, c) for c in m.bob_partition}
        for a in sorted(qa):
            for b in sorted(qb):
                tr = classical_recursion(m, a, b)
                if tr.weight > 0:
                    res.bump("common_certainty")
                    res.add(0.0 if a == b else 1.0, 0.0, k, f"exact disagreement {a} vs {b}")
    return res


SWEEPS: dict[str, Callable[[int, int], SweepResult]] = {
    "agreement": agreement_sweep,
    "zero-one": zero_one_sweep,
    "register": register_sweep,
    "epsilon": epsilon_sweep,
    "perturbation": perturbation_sweep,
    "classical": classical_sweep,
}
