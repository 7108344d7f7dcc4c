"""Command-line front end.

    qagreement classify SOURCE Q_A Q_B [--epsilon E] [--tol-q T]
    qagreement record SOURCE Q_A Q_B
    qagreement bounds SOURCE [SOURCE_B] [--epsilon E] [--q-alice Q --q-bob Q]
    qagreement box SOURCE [--realizes BOX] [--state NAME]
    qagreement sweep --kind KIND [--seed S] [--count N]
    qagreement examples list | dump NAME [-o FILE]

SOURCE is a JSON scenario file or the name of a built-in example.  Every
command takes ``--json`` for machine-readable output and ``--figure PATH`` to
render a matplotlib figure of the result.

Exit codes: 0 success, 1 parse or validation error, 2 mathematical error
(zero conditioning weight, non-convergence), 3 a checked property failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import fileformat
from . import linalg as la
from .classical import (ClassicalModel, NoSignalingBox, OUTCOME_ORDER, box_conditional,
                        classical_recursion, signed_realization_check, signed_zero_one_chain,
                        zero_one_chain)
from .epistemics import (classify_trace, final_step_gap, run_recursion,
                         verify_nondisturbance)
from .errors import AgreementError, ZeroConditioningWeight
from .limits import EpsilonConfig, check_state_perturbation, epsilon_bound_holds, run_epsilon_recursion
from .linalg import TOL
from .quantum_model import Scenario, check_commutation
from .register import build_recorded, kraus_completeness, recorded_cond_prob, run_recorded_recursion
from .scenarios import EXAMPLES
from .sweeps import SWEEPS, branch_pairs

EXIT_OK, EXIT_INPUT, EXIT_MATH, EXIT_VIOLATION = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; here 2 is reserved for mathematical errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# input helpers


def _parse_param(text: str):
    key, sep, value = text.partition("=")
    if not sep:
        raise fileformat.ParseError(f"--param expects KEY=VALUE, got {text!r}")
    return key, float(value)


def load_source(source: str, params=(), theta=None):
    """Load a scenario file, or build the named example with parameter overrides."""
    overrides = dict(_parse_param(p) for p in params)
    if theta is not None:
        overrides["theta"] = theta
    path = Path(source)
    if path.exists():
        if overrides:
            raise fileformat.ParseError("parameter overrides apply to built-in examples only")
        return fileformat.load(path)
    spec = EXAMPLES.get(source)
    if spec is None:
        raise fileformat.ParseError(f"{source}: no such file or built-in example "
                                    f"(examples: {', '.join(EXAMPLES)})")
    try:
        return spec.build(**overrides)
    except TypeError as exc:
        raise fileformat.ParseError(f"{source}: {exc}") from exc


def parse_q(text: str) -> Fraction:
    """Probability argument; fractions such as ``1/2`` stay exact."""
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise fileformat.ParseError(f"not a probability: {text!r}") from exc
    if not 0 <= q <= 1:
        raise fileformat.ParseError(f"probability {text} outside [0, 1]")
    return q


def _expect(obj, kind, what: str):
    if not isinstance(obj, kind):
        raise fileformat.ParseError(f"{what} needs a {kind.__name__}, got {type(obj).__name__}")
    return obj


def _num(x):
    """JSON-friendly number: exact fractions as strings, floats rounded away from noise."""
    if isinstance(x, Fraction):
        return str(x)
    x = float(x)
    return 0.0 if abs(x) < 1e-15 else x


# ---------------------------------------------------------------------------
# output


class Report:
    """Ordered key/value lines plus tab-separated tables."""

    def __init__(self, command: str):
        self.command = command
        self.fields: dict = {}
        self.tables: dict = {}

    def set(self, key: str, value) -> None:
        self.fields[key] = value

    def table(self, name: str, header: list, rows: list) -> None:
        self.tables[name] = (header, rows)

    def as_dict(self) -> dict:
        out = {"command": self.command, **self.fields}
        for name, (header, rows) in self.tables.items():
            out[name] = [dict(zip(header, r)) for r in rows]
        return out

    def render(self, as_json: bool) -> str:
        if as_json:
            return json.dumps(self.as_dict(), sort_keys=True, default=_num)
        lines = []
        for key, value in self.fields.items():
            lines.append(f"{key}\t{_fmt(value)}")
        for name, (header, rows) in self.tables.items():
            lines.append("")
            lines.append(f"# {name}")
            lines.append("\t".join(header))
            lines.extend("\t".join(_fmt(v) for v in r) for r in rows)
        return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{_num(v):.10g}"
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v) if v else "-"
    if v is None:
        return "undefined"
    return str(v)


# ---------------------------------------------------------------------------
# classify


def _classify_quantum(s: Scenario, args, rep: Report):
    qa, qb = float(args.q_alice), float(args.q_bob)
    if args.epsilon is not None:
        tr = run_epsilon_recursion(s, qa, qb, EpsilonConfig(args.epsilon), args.tol_q)
        rep.set("epsilon", args.epsilon)
    else:
        tr = run_recursion(s, qa, qb, args.tol_q)
    c = classify_trace(tr)
    comm = check_commutation(s)
    rep.set("scenario", s.name or "-")
    rep.set("dims", list(s.factorization.dims))
    rep.set("commuting", comm.commuting)
    rep.set("q_alice", qa)
    rep.set("q_bob", qb)
    rows = []
    for n, (a, b) in enumerate(tr.levels):
        rows.append([n, list(tr.alice_indices[n]), list(tr.bob_indices[n]),
                     la.expectation(a, s.rho), la.expectation(b, s.rho)])
    rep.table("levels", ["n", "alice_branches", "bob_branches", "weight_A", "weight_B"], rows)
    rep.set("stabilization_index", tr.stabilization_index)
    rep.set("cc_weight", tr.cc_weight)
    rep.set("kind", c.kind.value)
    if tr.cc_weight > TOL and args.epsilon is None:
        rep.set("nondisturbance", verify_nondisturbance(tr, s.rho))
        rep.set("final_step_gap", final_step_gap(s, tr))
    if args.figure:
        from .plotting import recursion_figure

        rep.set("figure", str(recursion_figure(tr, s.rho, args.figure)))
    return EXIT_OK


def _classify_classical(m: ClassicalModel, args, rep: Report):
    tr = classical_recursion(m, args.q_alice, args.q_bob)
    rep.set("q_alice", args.q_alice)
    rep.set("q_bob", args.q_bob)
    rows = [[n, sorted(a, key=m.states.index), sorted(b, key=m.states.index)]
            for n, (a, b) in enumerate(zip(tr.a_levels, tr.b_levels))]
    rep.table("levels", ["n", "A_n", "B_n"], rows)
    rep.set("common_certainty", sorted(tr.c_inf, key=m.states.index))
    rep.set("cc_weight", tr.weight)
    if tr.weight <= 0:
        kind = "NoCommonCertainty"
    else:
        kind = "Agreement" if args.q_alice == args.q_bob else "CCD"
    rep.set("kind", kind)
    return EXIT_OK


def cmd_classify(args, rep: Report) -> int:
    obj = load_source(args.source, args.param, args.theta)
    if isinstance(obj, Scenario):
        return _classify_quantum(obj, args, rep)
    if args.epsilon is not None:
        raise fileformat.ParseError("--epsilon applies to quantum scenarios only")
    return _classify_classical(_expect(obj, ClassicalModel, "classify"), args, rep)


# ---------------------------------------------------------------------------
# record


def cmd_record(args, rep: Report) -> int:
    s = _expect(load_source(args.source, args.param, args.theta), Scenario, "record")
    rs = build_recorded(s)
    weights = rs.block_weights()
    rep.set("scenario", s.name or "-")
    rep.set("register_dim", rs.transcripts.register_dim)
    rep.set("kraus_completeness", kraus_completeness(rs))
    rep.set("off_block_norm", rs.off_block_norm())
    rep.table("transcripts", ["i", "j", "weight"],
              [[i, j, w] for (i, j), w in weights.items() if w > TOL or args.all_transcripts])
    rows = []
    for agent, meas in (("alice", rs.alice_reg), ("bob", rs.bob_reg)):
        for k, p in enumerate(meas.projectors):
            try:
                cp = recorded_cond_prob(rs, rs.property_ext, p)
                rows.append([agent, k, cp.conditioning_weight, cp.value])
            except ZeroConditioningWeight:
                rows.append([agent, k, 0.0, None])
    rep.table("recorded_branches", ["agent", "outcome", "weight", "prob_E"], rows)
    qa, qb = float(args.q_alice), float(args.q_bob)
    tr = run_recorded_recursion(rs, qa, qb, args.tol_q)
    c = classify_trace(tr)
    rep.set("q_alice", qa)
    rep.set("q_bob", qb)
    rep.set("stabilization_index", tr.stabilization_index)
    rep.set("cc_weight", tr.cc_weight)
    rep.set("kind", c.kind.value)
    if args.figure:
        from .plotting import block_weight_figure

        rep.set("figure", str(block_weight_figure(weights, args.figure)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# bounds


def _pairs(s: Scenario, args) -> list:
    if (args.q_alice is None) != (args.q_bob is None):
        raise fileformat.ParseError("give both --q-alice and --q-bob, or neither")
    if args.q_alice is not None:
        return [(float(args.q_alice), float(args.q_bob))]
    return branch_pairs(s)


def cmd_bounds(args, rep: Report) -> int:
    s = _expect(load_source(args.source, args.param, args.theta), Scenario, "bounds")
    rows, ok = [], True
    if args.source_b is not None:
        if args.epsilon is not None:
            raise fileformat.ParseError("give a second state or --epsilon, not both")
        other = _expect(load_source(args.source_b), Scenario, "bounds")
        if other.dim != s.dim:
            raise fileformat.ParseError(f"states have dimensions {s.dim} and {other.dim}")
        rep.set("mode", "perturbation")
        rep.set("trace_distance", la.trace_norm(s.rho - other.rho))
        for qa, qb in _pairs(s, args):
            if run_recursion(s, qa, qb).cc_weight <= TOL:
                continue
            chk = check_state_perturbation(s, other.rho, qa, qb)
            ok &= chk.holds
            rows.append([qa, qb, chk.q_alice, chk.q_bob, chk.gap, chk.bound, chk.holds])
        rep.table("checks", ["q_alice", "q_bob", "estimate_A", "estimate_B", "gap", "bound",
                             "holds"], rows)
    else:
        if args.epsilon is None:
            raise fileformat.ParseError("bounds needs a second state file or --epsilon")
        cfg = EpsilonConfig(args.epsilon)
        rep.set("mode", "epsilon")
        rep.set("epsilon", args.epsilon)
        for qa, qb in _pairs(s, args):
            tr = run_epsilon_recursion(s, qa, qb, cfg)
            if tr.cc_weight <= TOL:
                continue
            holds = epsilon_bound_holds(tr)
            ok &= holds
            rows.append([qa, qb, tr.cc_weight, abs(qa - qb), 2 * args.epsilon, holds])
        rep.table("checks", ["q_alice", "q_bob", "cc_weight", "gap", "bound", "holds"], rows)
    rep.set("pairs_with_common_certainty", len(rows))
    rep.set("max_gap", max((r[-3] for r in rows), default=0.0))
    rep.set("verdict", "pass" if ok else "fail")
    if args.figure and rows:
        from .plotting import sweep_figure

        rep.set("figure", str(sweep_figure([r[-3] for r in rows], [r[-2] for r in rows],
                                           args.figure, f"{rep.fields['mode']} bound",
                                           "common-certainty pair")))
    return EXIT_OK if ok else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# box


def _conditional_rows(box: NoSignalingBox) -> list:
    rows = []
    for x, y in box.contexts:
        for given, target in (((x, 0), y), ((x, 1), y), ((y, 0), x), ((y, 1), x)):
            for o in (0, 1):
                try:
                    p = box_conditional(box, (target, o), given)
                except ZeroConditioningWeight:
                    p = None
                rows.append([f"{target}={o}", f"{given[0]}={given[1]}", p])
    return rows


def _box_report(box: NoSignalingBox, args, rep: Report) -> None:
    rep.set("labels", list(box.labels))
    rep.set("no_signaling", not box.signaling_violations())
    rep.table("contexts", ["pair", *[f"p{x}{y}" for x, y in OUTCOME_ORDER]],
              [[f"{x},{y}", *[d[o] for o in OUTCOME_ORDER]] for (x, y), d in box.contexts.items()])
    rep.table("conditionals", ["target", "given", "prob"], _conditional_rows(box))
    a, b, e = args.chain
    chain = zero_one_chain(box, a, b, e)
    rep.set(f"Pr[{e}=1|{a}=1]", chain.alice_certain_event)
    rep.set(f"Pr[{b}=1|{a}=1]", chain.alice_certain_bob_outcome)
    rep.set(f"Pr[{e}=0|{b}=1]", chain.bob_certain_not_event)
    rep.set("zero_one_chain", chain.holds)


def cmd_box(args, rep: Report) -> int:
    obj = load_source(args.source)
    if isinstance(obj, NoSignalingBox):
        if args.realizes:
            raise fileformat.ParseError("--realizes takes a box and needs a signed model as SOURCE")
        _box_report(obj, args, rep)
        if args.figure:
            from .plotting import box_figure

            rep.set("figure", str(box_figure(obj, args.figure)))
        return EXIT_OK
    m = _expect(obj, ClassicalModel, "box")
    total = sum(m.weights)
    rep.set("signed", m.signed)
    rep.set("total_weight", total)
    rep.set("negative_weights", [s for s, w in zip(m.states, m.weights) if w < 0])
    if args.realizes:
        box = _expect(load_source(args.realizes), NoSignalingBox, "--realizes")
        rep.set("realizes", signed_realization_check(m, box))
    states = [args.state] if args.state else list(m.states)
    rows = []
    for st in states:
        if st not in m.states:
            raise fileformat.ParseError(f"unknown state {st!r}")
        ch = signed_zero_one_chain(m, st)
        rows.append([st, ch.alice_prob_event, ch.alice_prob_bob_certain_not, ch.zero_one])
    rep.table("signed_chain", ["state", "Pr[E|A cell]", "Pr[Bob certain not E|A cell]", "zero_one"], rows)
    rep.set("zero_one_states", [r[0] for r in rows if r[-1]])
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep and examples


def cmd_sweep(args, rep: Report) -> int:
    res = SWEEPS[args.kind](args.seed, args.count)
    for key, value in res.summary().items():
        rep.set(key, value)
    if res.failures:
        rep.table("failure_details", ["instance", "detail"], [list(f) for f in res.failures[:50]])
    if args.figure:
        from .plotting import sweep_figure

        rep.set("figure", str(sweep_figure(res.values, res.bounds, args.figure,
                                           f"{args.kind} sweep, seed {args.seed}", "check")))
    return EXIT_OK if res.passed else EXIT_VIOLATION


def _depolarize(s: Scenario, p: float) -> Scenario:
    if not 0 <= p <= 1:
        raise fileformat.ParseError("--depolarize needs a value in [0, 1]")
    rho = (1 - p) * s.rho + p * la.identity(s.dim) / s.dim
    return s.with_state(rho, name=f"{s.name}-depolarized")


def cmd_examples(args, rep: Report) -> int:
    if args.action == "list":
        rep.table("examples", ["name", "kind", "parameters", "description"],
                  [[e.name, e.kind, json.dumps(e.parameters), e.description] for e in EXAMPLES.values()])
        return EXIT_OK
    if not args.name:
        raise fileformat.ParseError("examples dump needs an example NAME")
    obj = load_source(args.name, args.param, args.theta) if args.name in EXAMPLES else None
    if obj is None:
        raise fileformat.ParseError(f"unknown example {args.name!r}")
    if args.depolarize is not None:
        obj = _depolarize(_expect(obj, Scenario, "--depolarize"), args.depolarize)
    if isinstance(obj, Scenario) and not getattr(obj, "name", ""):
        obj = obj.with_state(obj.rho, name=args.name)
    text = fileformat.dump(obj, args.output)
    if args.output:
        rep.set("written", args.output)
        rep.set("kind", fileformat.kind_of(obj))
    else:
        rep.fields["__raw__"] = text
    if args.figure and isinstance(obj, Scenario):
        from .plotting import branch_figure

        rep.set("figure", str(branch_figure(obj, args.figure)))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--figure", metavar="PATH", help="also write a matplotlib figure")

    source = _Parser(add_help=False)
    source.add_argument("source", help="scenario file or built-in example name")
    source.add_argument("--theta", type=float, help="angle parameter of example1")
    source.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                        help="builder parameter override for a built-in example")

    p = _Parser(prog="qagreement", description="Common certainty and agreement in quantum "
                "and classical epistemic scenarios.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("classify", parents=[common, source], help="run the certainty recursion")
    c.add_argument("q_alice", type=parse_q)
    c.add_argument("q_bob", type=parse_q)
    c.add_argument("--epsilon", type=float, help="use (1 - epsilon)-certainty")
    c.add_argument("--tol-q", type=float, default=TOL, help="assignment tolerance (default 1e-9)")
    c.set_defaults(func=cmd_classify)

    r = sub.add_parser("record", parents=[common, source], help="classical register pipeline")
    r.add_argument("q_alice", type=parse_q)
    r.add_argument("q_bob", type=parse_q)
    r.add_argument("--tol-q", type=float, default=TOL)
    r.add_argument("--all-transcripts", action="store_true", help="list zero-weight transcripts too")
    r.set_defaults(func=cmd_record)

    b = sub.add_parser("bounds", parents=[common, source], help="robustness bounds")
    b.add_argument("source_b", nargs="?", help="perturbed state (file or example)")
    b.add_argument("--epsilon", type=float)
    b.add_argument("--q-alice", type=parse_q)
    b.add_argument("--q-bob", type=parse_q)
    b.set_defaults(func=cmd_bounds)

    x = sub.add_parser("box", parents=[common], help="no-signaling box and signed-measure checks")
    x.add_argument("source", help="box or classical model (file or example name)")
    x.add_argument("--realizes", metavar="BOX", help="box the signed model should reproduce")
    x.add_argument("--state", help="evaluate the signed chain at this state only")
    x.add_argument("--chain", nargs=3, default=("a", "b", "e"), metavar=("A", "B", "E"),
                   help="labels of Alice's, Bob's and the event measurement")
    x.set_defaults(func=cmd_box)

    w = sub.add_parser("sweep", parents=[common], help="seeded randomized property run")
    w.add_argument("--kind", choices=sorted(SWEEPS), default="agreement")
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--count", type=int, default=100)
    w.set_defaults(func=cmd_sweep)

    e = sub.add_parser("examples", parents=[common], help="list or dump the built-in corpus")
    e.add_argument("action", choices=("list", "dump"))
    e.add_argument("name", nargs="?")
    e.add_argument("--theta", type=float)
    e.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    e.add_argument("--depolarize", type=float, metavar="P", help="mix the state with I/d")
    e.add_argument("-o", "--output", help="write the scenario file here")
    e.set_defaults(func=cmd_examples)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    rep = Report(args.command)
    try:
        code = args.func(args, rep)
    except ArithmeticError as exc:
        branch = getattr(exc, "branch", None)
        extra = f" (branch {branch})" if branch is not None else ""
        print(f"qagreement: mathematical error: {exc}{extra}", file=sys.stderr)
        return EXIT_MATH
    except (AgreementError, ValueError, KeyError) as exc:
        print(f"qagreement: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    raw = rep.fields.pop("__raw__", None)  # a dumped scenario file is already JSON
    print(raw if raw is not None else rep.render(args.json))
    return code


if __name__ == "__main__":
    sys.exit(main())
