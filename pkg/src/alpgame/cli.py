"""Command-line front end.

Every command prints one JSON document (or writes it to ``--output``).
Exit codes: 0 success, 1 verification failure, 2 input error, 3 internal
invariant failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from alpgame.equilibrium import alp_region_binary, is_alp, verify_equilibrium
from alpgame.evidence import EvidenceStructure
from alpgame.lp import SolverInvariantError
from alpgame.model import Belief, PersuasionProblem, ProblemError, load_problem
from alpgame.rational import SchemaError, format_rational, parse_rational
from alpgame.seqgame import final_distribution, message_equivalence_check, plan_from_json, tree_posteriors
from alpgame.signals import Signal, SignalError
from alpgame.solver import grid_oracle, solve

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


class InputError(Exception):
    """Bad command-line input that is not tied to a schema key."""


def _read_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError("<root>", f"{path}: invalid JSON: {exc}") from None


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _emit(doc: Any, output: str | None) -> None:
    text = dumps(doc)
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def parse_belief(text: str, problem: PersuasionProblem) -> Belief:
    """``q`` (probability of the second state, two states only) or a comma-separated vector."""
    parts = [p.strip() for p in text.split(",")]
    probs = [parse_rational(p, "--belief") for p in parts]
    if len(probs) == 1 and problem.n_states != 2:
        raise SchemaError("--belief", "a single number needs a two-state problem; pass a full vector")
    if len(probs) not in (1, problem.n_states):
        raise SchemaError("--belief", f"expected {problem.n_states} entries, got {len(probs)}")
    try:
        return Belief.binary(probs[0]) if len(probs) == 1 else Belief(tuple(probs))
    except ValueError as exc:
        raise SchemaError("--belief", str(exc)) from None


def load_signal(path: str, problem: PersuasionProblem) -> Signal:
    data = _read_json(path)
    if isinstance(data, dict):
        if "signal" not in data:
            raise SchemaError("signal", "missing key")
        data = data["signal"]
    return Signal.from_json(data, problem.states)


def cmd_solve(args: argparse.Namespace) -> int:
    problem = load_problem(args.problem)
    result = solve(problem)
    doc = result.to_json(problem.states, benchmark=args.benchmark)
    if args.oracle is not None:
        if args.oracle < 1:
            raise InputError("--oracle needs a positive denominator")
        oracle = grid_oracle(problem, args.oracle)
        if oracle > result.value:
            raise SolverInvariantError(f"grid oracle {oracle} exceeds the solver value {result.value}")
        doc["oracle"] = {
            "denominator": args.oracle,
            "value": format_rational(oracle),
            "matches": oracle == result.value,
        }
    _emit(doc, args.output)
    return EXIT_OK


def cmd_alp(args: argparse.Namespace) -> int:
    problem = load_problem(args.problem)
    if args.region:
        if problem.n_states != 2:
            raise InputError("--region needs a two-state problem")
        region = alp_region_binary(problem)
        doc = {"states": list(problem.states), "axis": f"Pr({problem.states[1]})", "region": region.to_json()}
    else:
        belief = parse_belief(args.belief, problem)
        res = is_alp(problem, belief, enumerate_subsets=args.enumerate)
        doc = {"belief": [format_rational(p) for p in belief], **res.to_json()}
    _emit(doc, args.output)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    problem = load_problem(args.problem)
    signal = load_signal(args.signal, problem)
    evidence = None
    if args.evidence:
        evidence = EvidenceStructure.from_json(_read_json(args.evidence), problem.states)
    report = verify_equilibrium(problem, signal, evidence)
    _emit(report.to_json(problem.states), args.output)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_simulate(args: argparse.Namespace) -> int:
    problem = load_problem(args.problem)
    data = _read_json(args.plan)
    if isinstance(data, dict) and "plan" in data:
        data = data["plan"]
    plan = plan_from_json(data, problem.states)
    report = message_equivalence_check(problem, plan)
    dist = final_distribution(problem, plan)
    doc = {
        "states": list(problem.states),
        "sequence": report.sequence.to_json(),
        "evidence": report.evidence.to_json(),
        "bijection": report.to_json(problem.states),
        "distribution": dist.to_json(),
        "matches_tree_posteriors": dist == tree_posteriors(problem, plan),
    }
    _emit(doc, args.output)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_figure(args: argparse.Namespace) -> int:
    # deferred so the other commands never pay for the matplotlib import
    from alpgame.figures import write_figure

    problem = load_problem(args.problem)
    if problem.n_states != 2:
        raise InputError("figures need a two-state problem")
    data, svg, js = write_figure(problem, args.output)
    doc = {"svg": str(svg), "data": str(js), **data.to_json()}
    sys.stdout.write(dumps(doc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alpgame", description="Exact solver for the private-experimentation disclosure game.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, helptext: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("problem", help="problem JSON file")
        return p

    p = add("solve", "maximal equilibrium value and an optimal signal")
    p.add_argument("--benchmark", action="store_true", help="include the unconstrained public-experimentation value")
    p.add_argument("--oracle", type=int, metavar="D", help="cross-check against ALP beliefs on the 1/D grid")
    p.add_argument("--output", metavar="PATH", help="write the JSON here instead of stdout")
    p.set_defaults(func=cmd_solve)

    p = add("alp", "test a belief, or describe the whole ALP region for two states")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--belief", help="Pr(second state), or a comma-separated probability vector")
    g.add_argument("--region", action="store_true", help="report the ALP region (two-state problems)")
    p.add_argument("--enumerate", action="store_true", help="check every strict subset instead of singletons")
    p.add_argument("--output", metavar="PATH", help="write the JSON here instead of stdout")
    p.set_defaults(func=cmd_alp)

    p = add("verify", "check an equilibrium built on a signal")
    p.add_argument("signal", help="signal JSON file")
    p.add_argument("--evidence", metavar="PATH", help="evidence structure JSON (default: trivial then signal)")
    p.add_argument("--output", metavar="PATH", help="write the JSON here instead of stdout")
    p.set_defaults(func=cmd_verify)

    p = add("simulate", "convert an experimentation plan and check message equivalence")
    p.add_argument("plan", help="plan JSON file")
    p.add_argument("--output", metavar="PATH", help="write the JSON here instead of stdout")
    p.set_defaults(func=cmd_simulate)

    p = add("figure", "render the three-panel SVG and its data")
    p.add_argument("--output", metavar="PATH", default="figure.svg", help="SVG path; the data goes next to it as .json")
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SolverInvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, ProblemError, SignalError, OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
