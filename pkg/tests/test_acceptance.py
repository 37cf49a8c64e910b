"""End-to-end acceptance criteria, driven through the command-line entry point.

Each test carries an ``acceptance`` marker; conftest prints one PASS/FAIL
line per criterion at the end of the run.
"""

import json
from fractions import Fraction as F

import pytest

import properties
from conftest import CASES, FIXTURES
from alpgame import cli
from alpgame.model import Belief, load_problem
from alpgame.signals import PosteriorDistribution, Signal, is_bayes_plausible, likelihood, posterior

PD = str(FIXTURES / "pd.json")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, _ = capsys.readouterr()
    return code, json.loads(out)


def mapping(doc):
    return PosteriorDistribution.from_json(doc).as_mapping()


def b(q):
    return Belief.binary(F(q))


@pytest.mark.acceptance(1, "benchmark value 1/2 with the 50/50 small-raise spread")
def test_benchmark(capsys):
    code, doc = run(capsys, "solve", PD, "--benchmark")
    assert code == 0
    assert doc["benchmark"]["value"] == "1/2"
    assert mapping(doc["benchmark"]["distribution"]) == {b("2/5"): F(1, 2), b(0): F(1, 2)}


@pytest.mark.acceptance(2, "ALP region is {0} U [4/5, 1] with 4/5 closed")
def test_alp_region(capsys):
    code, doc = run(capsys, "alp", PD, "--region")
    assert code == 0
    region = doc["region"]
    assert region["text"] == "{0} ∪ [4/5, 1]"
    point, interval = region["pieces"]
    assert point == {"lo": 0, "hi": 0, "lo_closed": True, "hi_closed": True}
    assert interval == {"lo": "4/5", "hi": 1, "lo_closed": True, "hi_closed": True}


@pytest.mark.acceptance(3, "constrained optimum 3/10 with likelihood(g1|bad) = 1/16")
def test_constrained_optimum(capsys):
    code, doc = run(capsys, "solve", PD)
    assert code == 0
    assert doc["value"] == "3/10"
    dist = PosteriorDistribution.from_json(doc["distribution"])
    assert dist.as_mapping() == {b("4/5"): F(1, 4), b(0): F(3, 4)}
    pd = load_problem(PD)
    assert is_bayes_plausible(pd, dist)
    # a 2/5 weight on the high posterior does not average back to the prior
    assert not is_bayes_plausible(pd, PosteriorDistribution(((b("4/5"), F(2, 5)), (b(0), F(3, 5)))))
    signal = Signal.from_json(doc["signal"], pd.states)
    (high,) = [r.label for r in signal if posterior(pd, signal, r.label) == b("4/5")]
    assert likelihood(signal, high, "bad") == F(1, 16)
    assert likelihood(signal, high, "good") == 1


@pytest.mark.acceptance(4, "lambda1 fails P3 (6/5 against 1 at 2/5); lambda1' passes")
def test_deviation_detection(capsys):
    code, doc = run(capsys, "verify", PD, str(FIXTURES / "lambda1.json"))
    assert code == 1
    assert doc["clauses"] == {"P1": True, "P2": True, "P3": False}
    (w,) = doc["witnesses"]
    assert w["punishment"]["value"] == "6/5"
    assert w["on_path_value"] == 1
    assert w["posterior"] == ["3/5", "2/5"]
    code, doc = run(capsys, "verify", PD, str(FIXTURES / "lambda1prime.json"))
    assert code == 0
    assert doc["clauses"] == {"P1": True, "P2": True, "P3": True}


@pytest.mark.acceptance(5, "plan reproduces the staged cells and a (2, 3, 3) message bijection")
def test_sequential_equivalence(capsys):
    code, doc = run(capsys, "simulate", PD, str(FIXTURES / "plan.json"))
    assert code == 0
    pd = load_problem(PD)
    final = Signal.from_json(doc["sequence"]["stages"][-1], pd.states)
    measures = sorted((r.region.measure("bad"), r.region.measure("good")) for r in final)
    assert measures == [(0, 1), (F(3, 8), 0), (F(5, 8), 0)]
    assert doc["bijection"]["status"] == "pass"
    assert doc["bijection"]["sizes"] == [2, 3, 3]


@pytest.mark.acceptance(6, "randomized property suites")
def test_property_suites():
    assert properties.signals_martingale_roundtrip() == CASES
    assert properties.alp_singleton_matches_enumeration() >= CASES
    assert properties.punishment_monotone() >= CASES
    assert properties.sandwich() == CASES
    cases, equal = properties.oracle_bounds()
    assert cases == CASES and equal > 0
    cases, attained = properties.converse_holds()
    assert cases == CASES and attained > 0
    cases, profitable = properties.join_dominance()
    assert cases == CASES and profitable > 0


@pytest.mark.acceptance(7, "figure envelope (0,0), (4/5,6/5), (1,6/5) with deterministic bytes")
def test_figure(capsys, tmp_path):
    outputs = []
    for name in ("one.svg", "two.svg"):
        code, doc = run(capsys, "figure", PD, "--output", str(tmp_path / name))
        assert code == 0
        outputs.append(doc)
    assert outputs[0]["envelope"] == [[0, 0], ["4/5", "6/5"], [1, "6/5"]]
    assert (tmp_path / "one.svg").read_bytes() == (tmp_path / "two.svg").read_bytes()
    assert (tmp_path / "one.json").read_bytes() == (tmp_path / "two.json").read_bytes()
