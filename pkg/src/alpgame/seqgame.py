"""Sequential private experimentation and its static reformulation.

An experimentation plan is a finite decision tree: at each node the sender
either stops or runs an experiment and moves to the child for the observed
outcome.  :func:`plan_to_sequence` turns the tree into a refinement-ordered
signal sequence whose stage ``k`` holds the cells of the nodes reached
after ``k`` experiments (stopped branches carry over unchanged).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterator, Mapping, Sequence

from alpgame.evidence import EvidenceStructure, SignalSequence, evidence_from_sequence
from alpgame.model import Belief, PersuasionProblem
from alpgame.rational import SchemaError, format_rational, parse_rational
from alpgame.signals import (
    PosteriorDistribution,
    Realization,
    Region,
    Signal,
    induced_distribution,
)

ROOT_LABEL = "root"


@dataclass(frozen=True)
class Experiment:
    """Outcome distributions conditional on each state.

    ``likelihood[y][w]`` is the probability of outcome ``outcomes[y]`` in
    state ``states[w]``.
    """

    name: str
    outcomes: tuple[str, ...]
    states: tuple[str, ...]
    likelihood: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if not self.outcomes:
            raise ValueError(f"experiment {self.name!r} has no outcomes")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise ValueError(f"experiment {self.name!r} repeats an outcome")
        if len(self.likelihood) != len(self.outcomes) or any(len(r) != len(self.states) for r in self.likelihood):
            raise ValueError(f"experiment {self.name!r}: likelihood table has the wrong shape")
        for w, state in enumerate(self.states):
            col = [row[w] for row in self.likelihood]
            if any(p < 0 for p in col) or sum(col) != 1:
                raise ValueError(f"experiment {self.name!r}: likelihoods at state {state!r} must be a distribution")

    def prob(self, outcome: str, state: str) -> Fraction:
        return self.likelihood[self.outcomes.index(outcome)][self.states.index(state)]

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "outcomes": list(self.outcomes),
            "likelihood": {
                y: {s: format_rational(self.likelihood[i][w]) for w, s in enumerate(self.states)}
                for i, y in enumerate(self.outcomes)
            },
        }

    @classmethod
    def from_json(cls, data: Any, states: Sequence[str], key: str, default_name: str) -> Experiment:
        if not isinstance(data, dict) or not isinstance(data.get("outcomes"), list) or "likelihood" not in data:
            raise SchemaError(key, "experiment needs 'outcomes' and 'likelihood'")
        outcomes = data["outcomes"]
        lik = data["likelihood"]
        if not isinstance(lik, dict):
            raise SchemaError(f"{key}.likelihood", "expected an object keyed by outcome")
        table = []
        for y in outcomes:
            row = lik.get(y)
            if not isinstance(row, dict):
                raise SchemaError(f"{key}.likelihood.{y}", "missing outcome row")
            table.append(tuple(parse_rational(row.get(s, 0), f"{key}.likelihood.{y}.{s}") for s in states))
        try:
            return cls(str(data.get("name", default_name)), tuple(outcomes), tuple(states), tuple(table))
        except ValueError as exc:
            raise SchemaError(key, str(exc)) from None


@dataclass(frozen=True)
class PlanNode:
    """A stop node (``experiment is None``) or an experiment with one child per outcome."""

    experiment: Experiment | None = None
    children: Mapping[str, PlanNode] = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment is None:
            if self.children:
                raise ValueError("a stop node has no children")
        elif set(self.children) != set(self.experiment.outcomes):
            raise ValueError(f"experiment {self.experiment.name!r} needs exactly one child per outcome")

    @property
    def is_stop(self) -> bool:
        return self.experiment is None

    @property
    def depth(self) -> int:
        if self.is_stop:
            return 0
        return 1 + max(c.depth for c in self.children.values())

    def to_json(self) -> Any:
        if self.is_stop:
            return "stop"
        return {
            "experiment": self.experiment.to_json(),
            "children": {y: self.children[y].to_json() for y in self.experiment.outcomes},
        }


STOP = PlanNode()
ExperimentationPlan = PlanNode


def plan_from_json(data: Any, states: Sequence[str], key: str = "plan") -> PlanNode:
    counter = iter(range(1, 10**9))

    def build(node: Any, k: str) -> PlanNode:
        if node == "stop":
            return STOP
        if not isinstance(node, dict) or "experiment" not in node or not isinstance(node.get("children"), dict):
            raise SchemaError(k, "node must be \"stop\" or an object with 'experiment' and 'children'")
        exp = Experiment.from_json(node["experiment"], states, f"{k}.experiment", f"lambda{next(counter)}")
        children = {}
        for y in exp.outcomes:
            if y not in node["children"]:
                raise SchemaError(f"{k}.children.{y}", "missing child for outcome")
            children[y] = build(node["children"][y], f"{k}.children.{y}")
        return PlanNode(exp, children)

    return build(data, key)


History = tuple[tuple[Experiment, str], ...]


def truncation_messages(history: History) -> list[History]:
    """All right-truncations of the history, shortest (empty) first."""
    history = tuple(history)
    return [history[:k] for k in range(len(history) + 1)]


def history_str(history: History) -> str:
    if not history:
        return "{}"
    return "{" + ", ".join(f"({e.name},{y})" for e, y in history) + "}"


@dataclass(frozen=True)
class _Node:
    history: History
    label: str
    region: Region
    plan: PlanNode


def _walk(problem: PersuasionProblem, plan: PlanNode) -> Iterator[_Node]:
    """Depth-first walk over reachable nodes; zero-measure branches are pruned."""
    stack = [_Node((), ROOT_LABEL, Region.whole(problem.states), plan)]
    while stack:
        node = stack.pop()
        yield node
        if node.plan.is_stop:
            continue
        exp = node.plan.experiment
        pieces: dict[str, dict[str, Any]] = {y: {} for y in exp.outcomes}
        for state in problem.states:
            section = node.region.section(state)
            lengths = [exp.prob(y, state) * section.measure for y in exp.outcomes]
            for y, piece in zip(exp.outcomes, section.carve(lengths)):
                pieces[y][state] = piece
        children = []
        for y in exp.outcomes:
            region = Region.from_mapping(pieces[y])
            if not region:
                continue
            label = y if node.label == ROOT_LABEL else f"{node.label}/{y}"
            children.append(_Node(node.history + ((exp, y),), label, region, node.plan.children[y]))
        stack.extend(reversed(children))


def plan_to_sequence(problem: PersuasionProblem, plan: PlanNode) -> SignalSequence:
    """Stages ``(trivial, after 1 experiment, ..., after depth experiments)``."""
    nodes = list(_walk(problem, plan))
    depth = max(len(n.history) for n in nodes)
    stages = []
    for k in range(depth + 1):
        cells = [
            Realization(n.label, n.region)
            for n in nodes
            if len(n.history) == k or (len(n.history) < k and n.plan.is_stop)
        ]
        stages.append(Signal(problem.states, tuple(cells)))
    return SignalSequence(tuple(stages))


def terminal_histories(problem: PersuasionProblem, plan: PlanNode) -> list[tuple[History, str, Region]]:
    return [(n.history, n.label, n.region) for n in _walk(problem, plan) if n.plan.is_stop]


def tree_posteriors(problem: PersuasionProblem, plan: PlanNode) -> PosteriorDistribution:
    """Posteriors at terminal histories computed directly by Bayes' rule on the tree."""
    atoms = []
    for history, _, _ in terminal_histories(problem, plan):
        joint = []
        for state, p in zip(problem.states, problem.prior):
            lik = Fraction(1)
            for exp, y in history:
                lik *= exp.prob(y, state)
            joint.append(p * lik)
        total = sum(joint)
        if total > 0:
            atoms.append((Belief(tuple(j / total for j in joint)), total))
    return PosteriorDistribution(tuple(atoms)).merged()


@dataclass
class HistoryCheck:
    history: History
    label: str
    truncations: list[History]
    messages: list[Region]
    mapping: list[tuple[int, Region]]
    bijective: bool

    def to_json(self, states: Sequence[str]) -> dict[str, Any]:
        return {
            "history": history_str(self.history),
            "cell": self.label,
            "truncation_messages": [history_str(h) for h in self.truncations],
            "evidence_messages": [m.to_json(states) for m in self.messages],
            "sizes": [len(self.truncations), len(self.messages)],
            "bijective": self.bijective,
        }


@dataclass
class EquivalenceReport:
    checks: list[HistoryCheck]
    sequence: SignalSequence
    evidence: EvidenceStructure

    @property
    def passed(self) -> bool:
        return all(c.bijective for c in self.checks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c.truncations) for c in self.checks)

    def to_json(self, states: Sequence[str]) -> dict[str, Any]:
        return {
            "status": "pass" if self.passed else "fail",
            "sizes": list(self.sizes),
            "histories": [c.to_json(states) for c in self.checks],
        }


def message_equivalence_check(problem: PersuasionProblem, plan: PlanNode) -> EquivalenceReport:
    """Match truncation-feasible messages with the induced evidence messages.

    For each terminal history ``h`` the truncation of length ``k`` is sent
    to the stage-``k`` cell containing the final cell of ``h``; the check
    passes when this map is a bijection onto the feasible message set.
    """
    seq = plan_to_sequence(problem, plan)
    evidence = evidence_from_sequence(seq)
    checks = []
    for history, label, region in terminal_histories(problem, plan):
        truncs = truncation_messages(history)
        msgs = list(evidence.messages(label))
        mapping = [(k, seq.stages[k].cell_containing(region).region) for k in range(len(truncs))]
        images = [cell for _, cell in mapping]
        bijective = len(set(images)) == len(images) and set(images) == set(msgs)
        checks.append(HistoryCheck(history, label, truncs, msgs, mapping, bijective))
    return EquivalenceReport(checks, seq, evidence)


def final_distribution(problem: PersuasionProblem, plan: PlanNode) -> PosteriorDistribution:
    return induced_distribution(problem, plan_to_sequence(problem, plan).stages[-1])


__all__ = [
    "Experiment",
    "ExperimentationPlan",
    "EquivalenceReport",
    "History",
    "PlanNode",
    "STOP",
    "final_distribution",
    "message_equivalence_check",
    "plan_from_json",
    "plan_to_sequence",
    "terminal_histories",
    "tree_posteriors",
    "truncation_messages",
]
