import json
import random
from fractions import Fraction as F

import pytest

from conftest import CASES, problem_pool
from alpgame.model import (
    Belief,
    PersuasionProblem,
    ProblemError,
    ZeroPriorError,
    best_action,
    indirect_utility,
    load_problem,
    make_problem,
    problem_from_dict,
)
from alpgame.rational import SchemaError


@pytest.mark.parametrize(
    "mu, action",
    [(F(1, 5), "status_quo"), (F(1), "big_raise"), (F(2, 5), "small_raise"), (F(4, 5), "big_raise"), (F(0), "status_quo")],
)
def test_best_action_pd(pd, mu, action):
    assert best_action(pd, Belief.binary(mu)) == action


@pytest.mark.parametrize("mu, value", [(F(0), 0), (F(4, 5), F(6, 5)), (F(1, 2), 1), (F(39, 100), 0)])
def test_indirect_utility_pd(pd, mu, value):
    assert indirect_utility(pd, Belief.binary(mu)) == value


def test_belief_validation():
    with pytest.raises(ValueError):
        Belief((F(1, 2), F(1, 3)))
    with pytest.raises(ValueError):
        Belief((F(3, 2), F(-1, 2)))
    assert Belief((F(1), F(0), F(0))).support == frozenset({0})
    assert Belief.uniform(3, [0, 2]).probs == (F(1, 2), F(0), F(1, 2))


def test_zero_prior_rejected():
    with pytest.raises(ZeroPriorError):
        make_problem(["a", "b"], ["x"], [1, 0], [[0, 0]], [0])


def test_duplicate_actions_merged():
    p = make_problem(["a", "b"], ["x", "y", "z"], ["1/2", "1/2"], [[1, 0], [0, 1], [1, 0]], [1, 2, 5])
    assert p.actions == ("z", "y")
    assert p.sender_utility == (F(5), F(2))
    assert best_action(p, Belief.binary(0)) == "z"


def test_problem_rejects_raw_duplicates():
    with pytest.raises(ProblemError):
        PersuasionProblem(("a",), ("x", "y"), Belief((F(1),)), ((F(0),), (F(0),)), (F(0), F(1)))


@pytest.mark.parametrize(
    "patch, key",
    [
        ({"prior": ["1/2", 0.5]}, "prior"),
        ({"states": "bad"}, "states"),
        ({"sender_utility": [0, 1]}, "sender_utility"),
        ({"receiver_utility": [[0, 0], [-2, 3], [-6]]}, "receiver_utility"),
        ({"actions": ["a", "a", "b"]}, "actions"),
    ],
)
def test_schema_errors_name_the_key(fixtures_dir, patch, key):
    data = json.loads((fixtures_dir / "pd.json").read_text())
    data.update(patch)
    with pytest.raises(SchemaError) as err:
        problem_from_dict(data)
    assert err.value.key.startswith(key)


def test_missing_key(fixtures_dir):
    data = json.loads((fixtures_dir / "pd.json").read_text())
    del data["prior"]
    with pytest.raises(SchemaError) as err:
        problem_from_dict(data)
    assert err.value.key == "prior"


def test_roundtrip_to_dict(pd, fixtures_dir):
    assert problem_from_dict(json.loads(json.dumps(pd.to_dict()))) == pd
    assert load_problem(fixtures_dir / "pd.json") == pd


def _random_belief(rng, n, den=12):
    cuts = sorted(rng.randint(0, den) for _ in range(n - 1))
    return Belief(tuple(F(b - a, den) for a, b in zip([0] + cuts, cuts + [den])))


def test_cells_are_convex():
    rng = random.Random(11)
    for p in problem_pool(101, CASES):
        n = p.n_states
        b1, b2 = _random_belief(rng, n), _random_belief(rng, n)
        a = best_action(p, b1)
        if best_action(p, b2) != a:
            continue
        t = F(rng.randint(0, 8), 8)
        mix = Belief(tuple(t * x + (1 - t) * y for x, y in zip(b1, b2)))
        eu = p.expected_utilities(mix)
        assert eu[p.actions.index(a)] == max(eu)


def test_ties_resolved_for_sender():
    rng = random.Random(12)
    for p in problem_pool(102, CASES):
        b = _random_belief(rng, p.n_states, den=4)
        eu = p.expected_utilities(b)
        tied = [a for a in range(p.n_actions) if eu[a] == max(eu)]
        assert indirect_utility(p, b) == max(p.sender_utility[a] for a in tied)


def test_invariance_to_shifts_and_scaling():
    rng = random.Random(13)
    for p in problem_pool(103, CASES):
        b = _random_belief(rng, p.n_states)
        shift = [F(rng.randint(-4, 4), 2) for _ in range(p.n_states)]
        scale = F(rng.randint(1, 6), 3)
        u2 = [[scale * (x + s) for x, s in zip(row, shift)] for row in p.receiver_utility]
        q = make_problem(p.states, p.actions, p.prior, u2, p.sender_utility)
        assert best_action(q, b) == best_action(p, b)
