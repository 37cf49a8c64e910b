"""Sender-optimal equilibrium value by concavification over ALP beliefs.

The indirect utility is constant on each action's optimality cell, so the
best Bayes-plausible spread only needs the vertices of those cells, face by
face.  A vertex on the face of support ``S`` is kept when its action's
value clears the ALP threshold of ``S``; the optimal spread is then a
small exact linear program over the kept vertices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import gcd
from typing import Any, Sequence

from alpgame.equilibrium import _classes_on, is_alp
from alpgame.lp import LPResult, SolverInvariantError, simplex, solve_linear
from alpgame.model import Belief, PersuasionProblem, indirect_utility
from alpgame.rational import format_rational
from alpgame.signals import PosteriorDistribution, Signal, signal_from_distribution


@dataclass(frozen=True)
class CandidatePoint:
    belief: Belief
    value: Fraction
    action: str
    support: tuple[str, ...]
    vertex: tuple[str, ...]
    alp_eligible: bool

    def to_json(self) -> dict[str, Any]:
        return {
            "belief": [format_rational(p) for p in self.belief],
            "value": format_rational(self.value),
            "action": self.action,
            "support": list(self.support),
            "vertex": list(self.vertex),
            "alp_eligible": self.alp_eligible,
        }


def _faces(n: int) -> list[tuple[int, ...]]:
    return [c for r in range(1, n + 1) for c in combinations(range(n), r)]


def _face_threshold(problem: PersuasionProblem, face: tuple[int, ...]) -> Fraction | None:
    if len(face) < 2:
        return None
    return max(indirect_utility(problem, Belief.degenerate(problem.n_states, w)) for w in face)


@lru_cache(maxsize=1024)
def _integer_utilities(problem: PersuasionProblem) -> list[list[int]]:
    """Receiver utilities times the common denominator; best responses are unchanged."""
    scale = 1
    for row in problem.receiver_utility:
        for u in row:
            scale = scale * u.denominator // gcd(scale, u.denominator)
    return [[int(u * scale) for u in row] for row in problem.receiver_utility]


def _small_kernel(rows: list[list[int]]) -> list[int] | None:
    """Direction solving ``rows x = 0`` on a face of at most three states, signed to sum positive.

    It is the generalized cross product of the rows; the full system with
    the sum-to-one row is singular exactly when its entries sum to zero.
    """
    if not rows:
        return [1]
    if len(rows) == 1:
        (c0, c1), = rows
        d = [c1, -c0]
    else:
        (a0, a1, a2), (b0, b1, b2) = rows
        d = [a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0]
    total = sum(d)
    if total == 0:
        return None
    return d if total > 0 else [-x for x in d]


def _cell_vertices(
    face: tuple[int, ...],
    own: Sequence[int],
    rivals: list[Sequence[int]],
    rival_names: list[str],
    state_names: Sequence[str],
) -> list[tuple[tuple[Fraction, ...], tuple[str, ...]]]:
    """Vertices of ``{mu on the face : own beats every rival weakly}``.

    Each vertex comes from ``|face| - 1`` tight inequalities plus the
    normalization, solved exactly; duplicates are dropped.  Utilities are
    integers, so small faces stay in integer arithmetic until the end.
    """
    k = len(face)
    cons: list[tuple[list[int], str]] = []
    for r, name in zip(rivals, rival_names):
        cons.append(([own[i] - r[i] for i in range(k)], f"indifferent:{name}"))
    for i in range(k):
        row = [0] * k
        row[i] = 1
        cons.append((row, f"zero:{state_names[face[i]]}"))
    out: dict[tuple[Fraction, ...], tuple[str, ...]] = {}
    for tight in combinations(range(len(cons)), k - 1):
        if k <= 3:
            d = _small_kernel([cons[j][0] for j in tight])
            if d is None or any(sum(c * x for c, x in zip(row, d)) < 0 for row, _ in cons):
                continue
            total = sum(d)
            sol = [Fraction(x, total) for x in d]
        else:
            A = [cons[j][0] for j in tight] + [[1] * k]
            b = [0] * (k - 1) + [1]
            sol = solve_linear(A, b)
            if sol is None or any(sum(c * x for c, x in zip(row, sol)) < 0 for row, _ in cons):
                continue
        key = tuple(sol)
        if key not in out:
            out[key] = tuple(cons[j][1] for j in tight)
    return list(out.items())


@lru_cache(maxsize=1024)
def _face_cells(problem: PersuasionProblem, face: tuple[int, ...]):
    """Per action group on the face: representative and cell vertices.

    A group is kept when its cell meets the relative interior of the face.
    The cell is the convex hull of its vertices, so that happens exactly
    when the vertices jointly put mass on every state of the face.
    """
    U = _integer_utilities(problem)
    classes = [(rep, [U[rep][w] for w in face]) for rep, _ in _classes_on(problem, face)]
    out = []
    for rep, vec in classes:
        others = [(r, v) for r, v in classes if r != rep]
        names = [problem.actions[r] for r, _ in others]
        verts = _cell_vertices(face, vec, [v for _, v in others], names, problem.states)
        covered = {i for sol, _ in verts for i, x in enumerate(sol) if x > 0}
        if len(covered) == len(face):
            out.append((rep, tuple(verts)))
    return tuple(out)


def enumerate_candidates(problem: PersuasionProblem, alp_only: bool = True) -> list[CandidatePoint]:
    """Cell vertices, face by face, that can support an optimal spread.

    On the face of support ``S`` every action group that is weakly optimal
    somewhere in the relative interior contributes the vertices of its cell
    with its own value.  With ``alp_only`` a face with two or more states
    only keeps groups whose value reaches the largest degenerate-belief
    value on that face.  Candidates sharing a belief keep the best value.
    """
    n = problem.n_states
    best: dict[Belief, CandidatePoint] = {}
    for face in _faces(n):
        threshold = _face_threshold(problem, face)
        for rep, verts in _face_cells(problem, face):
            value = problem.sender_utility[rep]
            eligible = threshold is None or value >= threshold
            if alp_only and not eligible:
                continue
            for sol, tight in verts:
                probs = [Fraction(0)] * n
                for i, w in enumerate(face):
                    probs[w] = sol[i]
                belief = Belief(tuple(probs))
                cand = CandidatePoint(
                    belief, value, problem.actions[rep], tuple(problem.states[w] for w in face), tight, eligible
                )
                prev = best.get(belief)
                if prev is None or value > prev.value:
                    best[belief] = cand
    return list(best.values())


@dataclass
class Spread:
    value: Fraction
    distribution: PosteriorDistribution
    dual: tuple[Fraction, ...]
    lp: LPResult = field(repr=False)


def _best_spread(points: Sequence[tuple[Belief, Fraction]], prior: Sequence[Fraction]) -> Spread:
    """Maximize expected value over distributions on ``points`` averaging to ``prior``."""
    n = len(prior)
    c = [v for _, v in points]
    A = [[b[w] for b, _ in points] for w in range(n)]
    res = simplex(c, A, list(prior))
    if not res.optimal:
        raise SolverInvariantError(f"spread LP is {res.status}; full revelation should always be feasible")
    # dual certificate: a supporting hyperplane above every point, touching at the prior
    y = res.dual
    for b, v in points:
        if sum(yi * bi for yi, bi in zip(y, b)) < v:
            raise SolverInvariantError("dual certificate violated: reduced cost of wrong sign")
    if sum(yi * pi for yi, pi in zip(y, prior)) != res.value:
        raise SolverInvariantError("dual certificate does not match the optimal value")
    atoms = [(points[j][0], res.x[j], points[j][1]) for j in range(len(points)) if res.x[j] > 0]
    atoms.sort(key=lambda a: (-a[2], tuple(-p for p in a[0].probs)))
    dist = PosteriorDistribution(tuple((b, w) for b, w, _ in atoms)).merged()
    return Spread(res.value, dist, tuple(y), res)


@dataclass
class SolveResult:
    value: Fraction
    distribution: PosteriorDistribution
    signal: Signal
    benchmark_value: Fraction
    benchmark_distribution: PosteriorDistribution
    full_revelation_value: Fraction
    certificate: tuple[Fraction, ...]
    attained: bool
    candidates: list[CandidatePoint] = field(default_factory=list, repr=False)

    def to_json(self, states: Sequence[str], benchmark: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {
            "states": list(states),
            "value": format_rational(self.value),
            "distribution": self.distribution.to_json(),
            "signal": self.signal.to_json(),
            "full_revelation_value": format_rational(self.full_revelation_value),
            "attained": self.attained,
            "status": "attained" if self.attained else "supremum, approached",
            "certificate": [format_rational(y) for y in self.certificate],
        }
        if benchmark:
            out["benchmark"] = {
                "value": format_rational(self.benchmark_value),
                "distribution": self.benchmark_distribution.to_json(),
            }
        return out


def full_revelation_value(problem: PersuasionProblem, prior: Sequence[Fraction] | None = None) -> Fraction:
    prior = problem.prior.probs if prior is None else prior
    n = problem.n_states
    return sum((p * indirect_utility(problem, Belief.degenerate(n, w)) for w, p in enumerate(prior)), Fraction(0))


def solve(problem: PersuasionProblem) -> SolveResult:
    """Maximal equilibrium value, an optimal posterior spread and a signal inducing it."""
    prior = problem.prior.probs
    cands = enumerate_candidates(problem)
    constrained = _best_spread([(c.belief, c.value) for c in cands], prior)
    bench_cands = enumerate_candidates(problem, alp_only=False)
    bench = _best_spread([(c.belief, c.value) for c in bench_cands], prior)
    full = full_revelation_value(problem)
    if not full <= constrained.value <= bench.value:
        raise SolverInvariantError("full revelation <= optimum <= benchmark does not hold")
    # a boundary atom may carry the value of the cell it bounds without being an equilibrium belief itself
    cand_value = {c.belief: c.value for c in cands}
    attained = all(
        indirect_utility(problem, b) == cand_value[b] and is_alp(problem, b) for b, _ in constrained.distribution
    )
    signal = signal_from_distribution(problem, constrained.distribution)
    return SolveResult(
        constrained.value,
        constrained.distribution,
        signal,
        bench.value,
        bench.distribution,
        full,
        constrained.dual,
        attained,
        cands,
    )


def envelope_value(problem: PersuasionProblem, prior: Sequence[Fraction], alp_only: bool = True) -> Fraction:
    """Concavified value at an arbitrary belief, which may lie on a face of the simplex."""
    cands = enumerate_candidates(problem, alp_only=alp_only)
    return _best_spread([(c.belief, c.value) for c in cands], [Fraction(p) for p in prior]).value


def _grid(n: int, d: int):
    if n == 1:
        yield (d,)
        return
    for k in range(d + 1):
        for rest in _grid(n - 1, d - k):
            yield (k,) + rest


def grid_beliefs(n: int, denominator: int) -> list[Belief]:
    return [Belief(tuple(Fraction(k, denominator) for k in ks)) for ks in _grid(n, denominator)]


def _hull_2d(pts: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Extreme points of a planar point set (monotone chain, collinear points dropped)."""
    pts = sorted(set(pts))
    if len(pts) <= 2:
        return pts

    def half(seq):
        h: list[tuple[int, int]] = []
        for p in seq:
            while len(h) >= 2 and (h[-1][0] - h[-2][0]) * (p[1] - h[-2][1]) - (h[-1][1] - h[-2][1]) * (p[0] - h[-2][0]) <= 0:
                h.pop()
            h.append(p)
        return h

    lower, upper = half(pts), half(reversed(pts))
    return lower[:-1] + upper[:-1]


def _extreme_only(levels: dict[int, list[tuple[int, ...]]], n: int) -> dict[int, list[tuple[int, ...]]]:
    """Drop grid points that are averages of same-valued points.

    Replacing such a point by a spread averaging to it keeps both the mean
    and the value, so the spread LP loses nothing.  Exact up to three
    states, where beliefs live in the plane; larger problems are unpruned.
    """
    if n > 3:
        return levels
    out = {}
    for v, ks in levels.items():
        if n == 1:
            out[v] = ks[:1]
        else:
            by_xy = {(k[0], k[1] if n == 3 else 0): k for k in ks}
            out[v] = [by_xy[c] for c in _hull_2d(list(by_xy))]
    return out


def grid_oracle(problem: PersuasionProblem, denominator: int) -> Fraction:
    """Brute-force lower bound: the best spread over ALP beliefs on a rational grid.

    Each belief ``k / denominator`` is tested directly: best response by
    integer expected utilities, then the ALP condition against the
    degenerate beliefs of its support.  Only extreme points of each value
    level enter the final LP.
    """
    if denominator < 1:
        raise ValueError("denominator must be a positive integer")
    n = problem.n_states
    U = _integer_utilities(problem)
    v = problem.sender_utility
    # sender values replaced by their ranks so the inner loop compares integers
    values = sorted(set(v))
    rank = [values.index(x) for x in v]
    order = sorted(range(problem.n_actions), key=lambda a: (-v[a], a))
    corner = [values.index(indirect_utility(problem, Belief.degenerate(n, w))) for w in range(n)]
    levels: dict[int, list[tuple[int, ...]]] = {}
    for k in _grid(n, denominator):
        eu = [sum(ki * ua for ki, ua in zip(k, U[a]) if ki) for a in order]
        best = rank[order[eu.index(max(eu))]]
        supp = [w for w in range(n) if k[w]]
        if len(supp) > 1 and best < max(corner[w] for w in supp):
            continue
        levels.setdefault(best, []).append(k)
    points = [
        (Belief(tuple(Fraction(ki, denominator) for ki in k)), values[r])
        for r, ks in _extreme_only(levels, n).items()
        for k in ks
    ]
    return _best_spread(points, problem.prior.probs).value


def value_curve(problem: PersuasionProblem, denominator: int) -> list[tuple[Fraction, Fraction]]:
    """Constrained envelope at priors ``k / denominator`` on the second state."""
    if problem.n_states != 2:
        raise ValueError("value curves are defined for two-state problems")
    cands = enumerate_candidates(problem)
    points = [(c.belief, c.value) for c in cands]
    out = []
    for k in range(denominator + 1):
        x = Fraction(k, denominator)
        out.append((x, _best_spread(points, [1 - x, x]).value))
    return out
