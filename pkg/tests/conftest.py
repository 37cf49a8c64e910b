import os
import random
from fractions import Fraction
from pathlib import Path

import pytest

from alpgame.model import PersuasionProblem, load_problem, make_problem

FIXTURES = Path(os.environ.get("ALPGAME_FIXTURES", Path(__file__).resolve().parent.parent / "fixtures"))

CASES = 200


def fixture_path(name: str) -> Path:
    return FIXTURES / name


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def pd() -> PersuasionProblem:
    return load_problem(FIXTURES / "pd.json")


def dyadic(rng: random.Random, lo: int, hi: int, den: int = 4) -> Fraction:
    return Fraction(rng.randint(lo, hi), den)


def random_prior(rng: random.Random, n: int, den: int = 16) -> list[Fraction]:
    cuts = sorted(rng.sample(range(1, den), n - 1))
    return [Fraction(b - a, den) for a, b in zip([0] + cuts, cuts + [den])]


def random_problem(rng: random.Random, n_states: int | None = None, n_actions: int | None = None) -> PersuasionProblem:
    """Dyadic utilities and prior; at most 3 states and 5 actions."""
    n = n_states or rng.randint(1, 3)
    m = n_actions or rng.randint(1, 5)
    u = [[dyadic(rng, -8, 8) for _ in range(n)] for _ in range(m)]
    v = [dyadic(rng, -4, 8) for _ in range(m)]
    return make_problem([f"w{i}" for i in range(n)], [f"a{j}" for j in range(m)], random_prior(rng, n), u, v)


def problem_pool(seed: int, count: int = CASES, **kw) -> list[PersuasionProblem]:
    rng = random.Random(seed)
    return [random_problem(rng, **kw) for _ in range(count)]


# acceptance bookkeeping: each acceptance test carries @pytest.mark.acceptance(number, title)

_acceptance: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion checked by the test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = getattr(report, "acceptance", None)
    if marker is None:
        return
    number, title = marker
    _acceptance[number] = ("PASS" if report.passed else "FAIL", title)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is not None:
        report.acceptance = tuple(mark.args)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        status, title = _acceptance[number]
        terminalreporter.write_line(f"criterion {number}: {status} - {title}")
