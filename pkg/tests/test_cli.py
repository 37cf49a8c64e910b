import json
from fractions import Fraction as F
import subprocess
import sys

import pytest

from conftest import FIXTURES
from alpgame import cli
from alpgame.evidence import EvidenceStructure
from alpgame.model import load_problem
from alpgame.signals import PosteriorDistribution, Signal

PD = str(FIXTURES / "pd.json")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), err


def test_solve(capsys):
    code, doc, _ = run(capsys, "solve", PD, "--benchmark", "--oracle", "20")
    assert code == 0
    assert doc["value"] == "3/10"
    assert doc["status"] == "attained"
    assert doc["full_revelation_value"] == "6/25"
    assert doc["certificate"] == [0, "3/2"]
    assert doc["benchmark"]["value"] == "1/2"
    assert doc["oracle"] == {"denominator": 20, "value": "3/10", "matches": True}
    pd = load_problem(PD)
    sig = Signal.from_json(doc["signal"], pd.states)
    assert len(sig) == 2
    dist = PosteriorDistribution.from_json(doc["distribution"])
    assert sorted(w for _, w in dist) == [F(1, 4), F(3, 4)]


def test_solve_without_benchmark_to_file(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, doc, _ = run(capsys, "solve", PD, "--output", str(out))
    assert code == 0 and doc is None
    assert "benchmark" not in json.loads(out.read_text())


def test_alp_region(capsys):
    code, doc, _ = run(capsys, "alp", PD, "--region")
    assert code == 0
    assert doc["region"]["text"] == "{0} ∪ [4/5, 1]"
    assert doc["axis"] == "Pr(good)"


def test_alp_belief(capsys):
    code, doc, _ = run(capsys, "alp", PD, "--belief", "2/5")
    assert code == 0
    assert doc == {"belief": ["3/5", "2/5"], "alp": False, "value": 1, "threshold": "6/5", "violating_subset": ["good"]}
    code, doc, _ = run(capsys, "alp", PD, "--belief", "1/5,4/5", "--enumerate")
    assert doc["alp"] is True


def test_verify(capsys):
    code, doc, _ = run(capsys, "verify", PD, str(FIXTURES / "lambda1.json"))
    assert code == 1
    assert doc["clauses"] == {"P1": True, "P2": True, "P3": False}
    (w,) = doc["witnesses"]
    assert (w["cell"], w["posterior"], w["on_path_value"]) == ("g1", ["3/5", "2/5"], 1)
    assert w["punishment"]["value"] == "6/5"
    code, doc, _ = run(capsys, "verify", PD, str(FIXTURES / "lambda1prime.json"))
    assert code == 0 and doc["passed"] and doc["payoff"] == "3/10"


def test_verify_with_evidence(capsys, tmp_path):
    pd = load_problem(PD)
    sig = Signal.from_json(json.loads((FIXTURES / "lambda1prime.json").read_text())["signal"], pd.states)
    ev = EvidenceStructure(sig, {r.label: (r.region,) for r in sig})
    path = tmp_path / "ev.json"
    path.write_text(json.dumps(ev.to_json()))
    code, doc, _ = run(capsys, "verify", PD, str(FIXTURES / "lambda1prime.json"), "--evidence", str(path))
    assert code == 0


def test_simulate(capsys):
    code, doc, _ = run(capsys, "simulate", PD, str(FIXTURES / "plan.json"))
    assert code == 0
    assert doc["bijection"]["sizes"] == [2, 3, 3]
    assert doc["matches_tree_posteriors"] is True
    dist = PosteriorDistribution.from_json(doc["distribution"])
    assert {tuple(b.probs): w for b, w in dist} == {(1, 0): F(4, 5), (0, 1): F(1, 5)}


def test_figure(capsys, tmp_path):
    out = tmp_path / "fig.svg"
    code, doc, _ = run(capsys, "figure", PD, "--output", str(out))
    assert code == 0
    assert out.exists() and (tmp_path / "fig.json").exists()
    assert doc["envelope"] == [[0, 0], ["4/5", "6/5"], [1, "6/5"]]
    assert doc["steps"]["breakpoints"] == [0, "2/5", "4/5", 1]


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["figure", str(FIXTURES / "single_action.json")], "two-state"),
        (["alp", PD, "--belief", "3/2"], "--belief"),
        (["alp", PD, "--belief", "1/2,1/4"], "--belief"),
        (["alp", str(FIXTURES / "single_action.json"), "--belief", "1/2"], "--belief"),
        (["solve", PD, "--oracle", "0"], "--oracle"),
        (["solve", "/nonexistent/problem.json"], "input error"),
    ],
)
def test_input_errors(capsys, argv, needle):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert needle in err


def test_schema_error_names_key(capsys, tmp_path):
    data = json.loads(open(PD).read())
    data["prior"] = ["1/2", 0.5]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, _, err = run(capsys, "solve", str(bad))
    assert code == 2 and "prior" in err
    bad.write_text("{not json")
    code, _, err = run(capsys, "solve", str(bad))
    assert code == 2 and "invalid JSON" in err


def test_invariant_failure_exit(capsys, monkeypatch):
    def broken(problem):
        raise cli.SolverInvariantError("dual certificate violated")

    monkeypatch.setattr(cli, "solve", broken)
    code, _, err = run(capsys, "solve", PD)
    assert code == 3 and "dual certificate" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "alpgame", "alp", PD, "--region"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["region"]["text"] == "{0} ∪ [4/5, 1]"
