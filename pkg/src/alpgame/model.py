"""Persuasion problems, beliefs and the receiver's best response.

Everything is exact: probabilities and utilities are ``Fraction`` values.
The receiver breaks ties in the sender's favour (largest sender utility,
then smallest action index), so the indirect utility is upper
semicontinuous and attains its maximum on every closed set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

from alpgame.rational import SchemaError, format_rational, parse_rational


class ProblemError(ValueError):
    """The persuasion problem violates one of its invariants."""


class ZeroPriorError(ProblemError):
    """A state carries zero prior probability."""


@dataclass(frozen=True)
class Belief:
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        probs = tuple(Fraction(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if not probs:
            raise ValueError("belief over an empty state space")
        if any(p < 0 for p in probs):
            raise ValueError(f"negative probability in belief {self}")
        if sum(probs) != 1:
            raise ValueError(f"belief does not sum to 1: {self}")

    @property
    def support(self) -> frozenset[int]:
        return frozenset(i for i, p in enumerate(self.probs) if p > 0)

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, i: int) -> Fraction:
        return self.probs[i]

    def __iter__(self):
        return iter(self.probs)

    def __str__(self) -> str:
        return "(" + ", ".join(str(p) for p in self.probs) + ")"

    @classmethod
    def degenerate(cls, n: int, i: int) -> Belief:
        return cls(tuple(Fraction(int(j == i)) for j in range(n)))

    @classmethod
    def binary(cls, p: Fraction | int | str) -> Belief:
        """Belief on two states putting probability ``p`` on the second one."""
        p = parse_rational(p, "belief") if isinstance(p, str) else Fraction(p)
        return cls((1 - p, p))

    @classmethod
    def uniform(cls, n: int, over: Iterable[int] | None = None) -> Belief:
        idx = sorted(range(n) if over is None else over)
        w = Fraction(1, len(idx))
        return cls(tuple(w if j in idx else Fraction(0) for j in range(n)))


@dataclass(frozen=True)
class PersuasionProblem:
    """Finite states and actions, a full-support prior, and both utilities.

    ``receiver_utility[a][w]`` is the receiver's payoff from action ``a`` in
    state ``w``; ``sender_utility[a]`` does not depend on the state.  Build
    instances through :func:`make_problem`, which merges actions the
    receiver cannot tell apart.
    """

    states: tuple[str, ...]
    actions: tuple[str, ...]
    prior: Belief
    receiver_utility: tuple[tuple[Fraction, ...], ...]
    sender_utility: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.states or not self.actions:
            raise ProblemError("need at least one state and one action")
        if len(set(self.states)) != len(self.states):
            raise ProblemError("state identifiers are not unique")
        if len(set(self.actions)) != len(self.actions):
            raise ProblemError("action identifiers are not unique")
        if len(self.prior) != len(self.states):
            raise ProblemError("prior length differs from the number of states")
        zero = [s for s, p in zip(self.states, self.prior) if p == 0]
        if zero:
            raise ZeroPriorError(f"states with zero prior probability: {zero}")
        if len(self.receiver_utility) != len(self.actions) or len(self.sender_utility) != len(self.actions):
            raise ProblemError("utility tables do not match the action list")
        if any(len(row) != len(self.states) for row in self.receiver_utility):
            raise ProblemError("receiver utility rows must have one entry per state")
        if len(set(self.receiver_utility)) != len(self.receiver_utility):
            raise ProblemError("actions with identical receiver utilities; use make_problem to merge them")
        # problems key several caches; hashing every Fraction on each lookup is the bottleneck
        object.__setattr__(
            self, "_hash", hash((self.states, self.actions, self.prior, self.receiver_utility, self.sender_utility))
        )

    def __hash__(self) -> int:
        return self._hash

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    def state_index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise KeyError(f"unknown state {state!r}") from None

    def state_indices(self, subset: Iterable[str | int]) -> frozenset[int]:
        return frozenset(s if isinstance(s, int) else self.state_index(s) for s in subset)

    def state_names(self, indices: Iterable[int]) -> list[str]:
        return [self.states[i] for i in sorted(indices)]

    def expected_utilities(self, belief: Belief) -> list[Fraction]:
        check_belief(self, belief)
        return [sum((p * u for p, u in zip(belief.probs, row) if p), Fraction(0)) for row in self.receiver_utility]

    def to_dict(self) -> dict[str, Any]:
        return {
            "states": list(self.states),
            "actions": list(self.actions),
            "prior": [format_rational(p) for p in self.prior],
            "receiver_utility": [[format_rational(u) for u in row] for row in self.receiver_utility],
            "sender_utility": [format_rational(v) for v in self.sender_utility],
        }


def make_problem(
    states: Sequence[str],
    actions: Sequence[str],
    prior: Sequence[Fraction | int | str] | Belief,
    receiver_utility: Sequence[Sequence[Fraction | int | str]],
    sender_utility: Sequence[Fraction | int | str],
) -> PersuasionProblem:
    """Validate and canonicalize a problem.

    Actions with identical receiver-utility vectors are merged into the
    first of them in list order; the merged action keeps the identifier of
    the group's tie-break winner and the group's largest sender utility.
    """
    def q(x, key):
        return parse_rational(x, key) if not isinstance(x, Fraction) else x

    if not isinstance(prior, Belief):
        try:
            prior = Belief(tuple(q(p, "prior") for p in prior))
        except ValueError as exc:
            if isinstance(exc, SchemaError):
                raise
            raise ProblemError(f"invalid prior: {exc}") from None
    u = [tuple(q(x, "receiver_utility") for x in row) for row in receiver_utility]
    v = [q(x, "sender_utility") for x in sender_utility]
    if len(u) != len(actions) or len(v) != len(actions):
        raise ProblemError("utility tables do not match the action list")

    groups: dict[tuple[Fraction, ...], list[int]] = {}
    for a, row in enumerate(u):
        groups.setdefault(row, []).append(a)
    names, rows, values = [], [], []
    for row, members in groups.items():
        winner = min(members, key=lambda a: (-v[a], a))
        names.append(actions[winner])
        rows.append(row)
        values.append(v[winner])
    return PersuasionProblem(tuple(states), tuple(names), prior, tuple(rows), tuple(values))


def check_belief(problem: PersuasionProblem, belief: Belief) -> None:
    if len(belief) != problem.n_states:
        raise ValueError(f"belief has {len(belief)} entries, problem has {problem.n_states} states")


def best_action_index(problem: PersuasionProblem, belief: Belief) -> int:
    eu = problem.expected_utilities(belief)
    top = max(eu)
    tied = [a for a, x in enumerate(eu) if x == top]
    return min(tied, key=lambda a: (-problem.sender_utility[a], a))


def best_action(problem: PersuasionProblem, belief: Belief) -> str:
    """Receiver's optimal action, ties broken towards the sender."""
    return problem.actions[best_action_index(problem, belief)]


def indirect_utility(problem: PersuasionProblem, belief: Belief) -> Fraction:
    return problem.sender_utility[best_action_index(problem, belief)]


def problem_from_dict(data: Any) -> PersuasionProblem:
    if not isinstance(data, dict):
        raise SchemaError("<root>", "problem must be a JSON object")
    for key in ("states", "actions", "prior", "receiver_utility", "sender_utility"):
        if key not in data:
            raise SchemaError(key, "missing key")
        if not isinstance(data[key], list):
            raise SchemaError(key, "expected an array")
    states, actions = data["states"], data["actions"]
    for key, ids in (("states", states), ("actions", actions)):
        if not ids:
            raise SchemaError(key, "must not be empty")
        if not all(isinstance(x, str) for x in ids):
            raise SchemaError(key, "identifiers must be strings")
        if len(set(ids)) != len(ids):
            raise SchemaError(key, "identifiers must be unique")
    if len(data["prior"]) != len(states):
        raise SchemaError("prior", "needs one entry per state")
    prior = [parse_rational(p, f"prior[{i}]") for i, p in enumerate(data["prior"])]
    if len(data["receiver_utility"]) != len(actions):
        raise SchemaError("receiver_utility", "needs one row per action")
    u = []
    for a, row in enumerate(data["receiver_utility"]):
        if not isinstance(row, list) or len(row) != len(states):
            raise SchemaError(f"receiver_utility[{a}]", "needs one entry per state")
        u.append([parse_rational(x, f"receiver_utility[{a}][{w}]") for w, x in enumerate(row)])
    if len(data["sender_utility"]) != len(actions):
        raise SchemaError("sender_utility", "needs one entry per action")
    v = [parse_rational(x, f"sender_utility[{a}]") for a, x in enumerate(data["sender_utility"])]
    if any(p < 0 for p in prior) or sum(prior) != 1:
        raise SchemaError("prior", "entries must be nonnegative and sum to 1")
    if any(p == 0 for p in prior):
        raise ZeroPriorError("prior: states with zero prior probability are not supported")
    return make_problem(states, actions, prior, u, v)


def load_problem(path: str | Path) -> PersuasionProblem:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("<root>", f"invalid JSON: {exc}") from None
    return problem_from_dict(data)
