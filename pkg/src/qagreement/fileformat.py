"""JSON scenario files.

A file is an object ``{"format_version": 1, "kind": ..., "payload": {...}}``
with ``kind`` one of ``quantum``, ``classical`` or ``box``.  Complex numbers
are two-element ``[re, im]`` arrays; plain numbers are read as real.
Rational weights may be written as strings such as ``"3/16"``.

Quantum payload keys::

    dims          list of factor dimensions
    roles         optional per-factor labels (Alice, Bob, Inaccessible, Shared)
    state         {"vector": [...]} or {"density": [[...], ...]}
    alice, bob    {"factor": k, "subspaces": [[basis indices], ...]}
                  {"factor": k, "blocks": [local matrices]}
                  {"projectors": [full-space matrices]}
    property      {"matrix": full-space matrix}
                  {"factors": [k, ...], "matrix": local matrix}
                  {"factors": [k, ...], "vectors": [spanning vectors]}
    example       alternative to all of the above: {"name": ..., "parameters": {...}}
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import linalg as la
from .classical import OUTCOME_ORDER, ClassicalModel, NoSignalingBox
from .errors import AgreementError, InvalidOperator
from .quantum_model import (Agent, HilbertFactorization, Measurement, Role, Scenario,
                            embed_local, embed_operator, subspace_blocks)

FORMAT_VERSION = 1
KINDS = ("quantum", "classical", "box")


class ParseError(AgreementError, ValueError):
    pass


def _complex(x) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    raise ParseError(f"not a complex number: {x!r}")


def _vector(data) -> np.ndarray:
    return np.array([_complex(x) for x in data], dtype=np.complex128)


def _matrix(data) -> np.ndarray:
    try:
        return la.as_matrix([[_complex(x) for x in row] for row in data])
    except (TypeError, InvalidOperator) as exc:
        raise ParseError(f"bad matrix: {exc}") from exc


def _encode_complex(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def encode_matrix(m) -> list:
    return [[_encode_complex(z) for z in row] for row in np.asarray(m)]


def _encode_weight(w):
    return f"{w.numerator}/{w.denominator}" if isinstance(w, Fraction) else float(w)


def _require(payload: dict, key: str):
    if key not in payload:
        raise ParseError(f"payload is missing required key {key!r}")
    return payload[key]


# ---------------------------------------------------------------------------
# quantum


def _measurement(agent: Agent, spec: dict, fac: HilbertFactorization, role: Role) -> Measurement:
    if "projectors" in spec:
        projs = [_matrix(p) for p in spec["projectors"]]
        return Measurement(agent, tuple(projs))
    factor = spec.get("factor", fac.index_of(role) if role in fac.roles else None)
    if factor is None:
        raise ParseError(f"{agent.value}: no factor index given and no factor labeled {role.value}")
    d = fac.dims[factor]
    if "subspaces" in spec:
        blocks = subspace_blocks(d, spec["subspaces"])
    elif "blocks" in spec:
        blocks = [_matrix(b) for b in spec["blocks"]]
    else:
        raise ParseError(f"{agent.value}: measurement needs 'projectors', 'subspaces' or 'blocks'")
    return Measurement(agent, tuple(embed_local(b, factor, fac) for b in blocks))


def _property(spec: dict, fac: HilbertFactorization) -> np.ndarray:
    factors = spec.get("factors")
    if "vectors" in spec:
        if factors is None:
            raise ParseError("property 'vectors' needs 'factors'")
        local = la.projector_onto(np.array([_vector(v) for v in spec["vectors"]]).T)
        return embed_operator(local, factors, fac)
    m = _matrix(_require(spec, "matrix"))
    return m if factors is None else embed_operator(m, factors, fac)


def parse_quantum(payload: dict) -> Scenario:
    if "example" in payload:
        from .scenarios import EXAMPLES

        ex = payload["example"]
        spec = EXAMPLES.get(ex.get("name"))
        if spec is None or spec.kind != "quantum":
            raise ParseError(f"unknown quantum example {ex.get('name')!r}")
        return spec.build(**ex.get("parameters", {}))
    fac = HilbertFactorization(tuple(_require(payload, "dims")), tuple(payload.get("roles", ())))
    state = _require(payload, "state")
    if "vector" in state:
        psi = _vector(state["vector"])
        if psi.shape[0] != fac.total_dim:
            raise ParseError(f"state vector has length {psi.shape[0]}, dims need {fac.total_dim}")
        norm = np.vdot(psi, psi).real
        if abs(norm - 1.0) > la.TOL:
            raise ParseError(f"state vector is not normalized (norm^2 = {norm:.6g})")
        rho = la.outer(psi)
    elif "density" in state:
        rho = _matrix(state["density"])
    else:
        raise ParseError("state needs 'vector' or 'density'")
    alice = _measurement(Agent.ALICE, _require(payload, "alice"), fac, Role.ALICE)
    bob = _measurement(Agent.BOB, _require(payload, "bob"), fac, Role.BOB)
    prop = _property(_require(payload, "property"), fac)
    return Scenario(fac, rho, alice, bob, prop, name=payload.get("name", ""),
                    parameters=payload.get("parameters", {}))


def serialize_quantum(s: Scenario) -> dict:
    return {
        "name": s.name,
        "dims": list(s.factorization.dims),
        "roles": [r.value for r in s.factorization.roles],
        "parameters": dict(s.parameters),
        "state": {"density": encode_matrix(s.rho)},
        "alice": {"projectors": [encode_matrix(p) for p in s.alice.projectors]},
        "bob": {"projectors": [encode_matrix(p) for p in s.bob.projectors]},
        "property": {"matrix": encode_matrix(s.property)},
    }


# ---------------------------------------------------------------------------
# classical and boxes


def parse_classical(payload: dict) -> ClassicalModel:
    if "example" in payload:
        from .scenarios import EXAMPLES

        spec = EXAMPLES.get(payload["example"].get("name"))
        if spec is None or spec.kind != "classical":
            raise ParseError(f"unknown classical example {payload['example'].get('name')!r}")
        return spec.build()
    assignments = payload.get("assignments")
    return ClassicalModel(
        tuple(_require(payload, "states")), tuple(_require(payload, "weights")),
        tuple(frozenset(c) for c in _require(payload, "alice_partition")),
        tuple(frozenset(c) for c in _require(payload, "bob_partition")),
        frozenset(_require(payload, "event")), signed=bool(payload.get("signed", False)),
        assignments={k: dict(v) for k, v in assignments.items()} if assignments else None)


def _sorted_cell(c, order) -> list:
    return sorted(c, key=order.index)


def serialize_classical(m: ClassicalModel) -> dict:
    order = list(m.states)
    out = {
        "states": order,
        "weights": [_encode_weight(w) for w in m.weights],
        "alice_partition": [_sorted_cell(c, order) for c in m.alice_partition],
        "bob_partition": [_sorted_cell(c, order) for c in m.bob_partition],
        "event": _sorted_cell(m.event, order),
        "signed": m.signed,
    }
    if m.assignments is not None:
        out["assignments"] = {s: dict(m.assignments[s]) for s in order}
    return out


def parse_box(payload: dict) -> NoSignalingBox:
    if "example" in payload:
        from .scenarios import EXAMPLES

        spec = EXAMPLES.get(payload["example"].get("name"))
        if spec is None or spec.kind != "box":
            raise ParseError(f"unknown box example {payload['example'].get('name')!r}")
        return spec.build()
    contexts = {}
    for ctx in _require(payload, "contexts"):
        pair = tuple(_require(ctx, "pair"))
        probs = _require(ctx, "probabilities")
        if len(pair) != 2 or len(probs) != 4:
            raise ParseError(f"context {pair} needs a label pair and four probabilities")
        contexts[pair] = dict(zip(OUTCOME_ORDER, probs))
    return NoSignalingBox(tuple(_require(payload, "labels")), contexts)


def serialize_box(box: NoSignalingBox) -> dict:
    return {
        "labels": list(box.labels),
        "contexts": [{"pair": list(pair), "probabilities": [_encode_weight(dist[o]) for o in OUTCOME_ORDER]}
                     for pair, dist in box.contexts.items()],
    }


# ---------------------------------------------------------------------------

_PARSERS = {"quantum": parse_quantum, "classical": parse_classical, "box": parse_box}


def parse_document(doc: Any):
    """Parse a decoded JSON document into a Scenario, ClassicalModel or NoSignalingBox."""
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ParseError(f"kind must be one of {KINDS}, got {kind!r}")
    payload = doc.get("payload")
    if not isinstance(payload, dict):
        raise ParseError("payload must be a JSON object")
    try:
        return _PARSERS[kind](payload)
    except ParseError:
        raise
    except (AgreementError, ValueError, KeyError, IndexError, TypeError) as exc:
        raise ParseError(f"invalid {kind} payload: {exc}") from exc


def kind_of(obj) -> str:
    if isinstance(obj, Scenario):
        return "quantum"
    if isinstance(obj, ClassicalModel):
        return "classical"
    if isinstance(obj, NoSignalingBox):
        return "box"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_document(obj) -> dict:
    kind = kind_of(obj)
    payload = {"quantum": serialize_quantum, "classical": serialize_classical,
               "box": serialize_box}[kind](obj)
    return {"format_version": FORMAT_VERSION, "kind": kind, "payload": payload}


def load(path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON ({exc})") from exc
    return parse_document(doc)


def dump(obj, path=None) -> str:
    text = json.dumps(to_document(obj), indent=1)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text
