"""Punishment values, additional-learning-proof beliefs and equilibrium checks.

Equilibria are taken fully revealing on path, with the harshest belief
consistent with the evidence after any off-path message.  Such a
punishment only depends on the set of states the message certifies, so it
is computed once per state subset.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Any, Iterable

from alpgame.evidence import EvidenceStructure, SignalSequence, evidence_from_sequence
from alpgame.lp import SolverInvariantError, maximize
from alpgame.model import Belief, PersuasionProblem, indirect_utility
from alpgame.rational import format_rational
from alpgame.signals import (
    PosteriorDistribution,
    Realization,
    Region,
    Signal,
    induced_distribution,
    is_bayes_plausible,
    region_posterior,
    region_probability,
    signal_from_distribution,
)

WITNESS_SELECTION = "max-min-slack"


@dataclass(frozen=True)
class PunishmentResult:
    """Worst sender value over beliefs supported inside ``subset``."""

    subset: frozenset[str]
    value: Fraction
    witness_belief: Belief
    witness_action: str

    def to_json(self) -> dict[str, Any]:
        return {
            "subset": sorted(self.subset),
            "value": format_rational(self.value),
            "witness_belief": [format_rational(p) for p in self.witness_belief],
            "witness_action": self.witness_action,
        }


def _classes_on(problem: PersuasionProblem, face: tuple[int, ...]) -> list[tuple[int, tuple[Fraction, ...]]]:
    """Actions grouped by their utilities restricted to ``face``.

    Each group is represented by its tie-break winner, which is what the
    receiver picks anywhere the group is optimal.
    """
    groups: dict[tuple[Fraction, ...], list[int]] = {}
    for a, row in enumerate(problem.receiver_utility):
        groups.setdefault(tuple(row[w] for w in face), []).append(a)
    reps = []
    for vec, members in groups.items():
        reps.append((min(members, key=lambda a: (-problem.sender_utility[a], a)), vec))
    return sorted(reps)


def _max_min_slack(
    problem: PersuasionProblem,
    face: tuple[int, ...],
    own: tuple[Fraction, ...],
    rivals: list[tuple[Fraction, ...]],
) -> tuple[Fraction, Belief]:
    """Belief on ``face`` maximizing the least advantage of ``own`` over every rival."""
    k = len(face)
    if not rivals:
        return Fraction(1), Belief.uniform(problem.n_states, face)
    if k == 1:
        return min(own[0] - r[0] for r in rivals), Belief.degenerate(problem.n_states, face[0])
    if k == 2:
        return _edge_slack(problem, face, own, rivals)
    # variables: mu over the face, then the common slack
    A_ub = [[-(own[i] - r[i]) for i in range(k)] + [Fraction(1)] for r in rivals]
    b_ub = [Fraction(0)] * len(rivals)
    res = maximize([Fraction(0)] * k + [Fraction(1)], A_ub, b_ub, [[Fraction(1)] * k + [Fraction(0)]], [Fraction(1)])
    if not res.optimal:
        return Fraction(-1), Belief.uniform(problem.n_states, face)
    probs = [Fraction(0)] * problem.n_states
    for i, w in enumerate(face):
        probs[w] = res.x[i]
    return res.x[k], Belief(tuple(probs))


def _edge_slack(problem, face, own, rivals) -> tuple[Fraction, Belief]:
    # on an edge the least slack is concave piecewise linear in t = mu(face[1]),
    # so its maximum sits at an endpoint or where two slack lines cross
    lines = [(own[0] - r[0], (own[1] - r[1]) - (own[0] - r[0])) for r in rivals]
    ts = {Fraction(0), Fraction(1)}
    for (a1, b1), (a2, b2) in combinations(lines, 2):
        if b1 != b2:
            t = (a2 - a1) / (b1 - b2)
            if 0 < t < 1:
                ts.add(t)
    best_t, best = None, None
    for t in sorted(ts):
        m = min(a + b * t for a, b in lines)
        if best is None or m > best:
            best_t, best = t, m
    probs = [Fraction(0)] * problem.n_states
    probs[face[0]], probs[face[1]] = 1 - best_t, best_t
    return best, Belief(tuple(probs))


@lru_cache(maxsize=4096)
def _worst(problem: PersuasionProblem, face: tuple[int, ...]) -> PunishmentResult:
    classes = _classes_on(problem, face)
    # cheapest group first; the first one strictly optimal somewhere wins
    for rep, vec in sorted(classes, key=lambda c: (problem.sender_utility[c[0]], c[0])):
        rivals = [other for r, other in classes if r != rep]
        slack, belief = _max_min_slack(problem, face, vec, rivals)
        if slack > 0:
            value = problem.sender_utility[rep]
            return PunishmentResult(frozenset(problem.states[w] for w in face), value, belief, problem.actions[rep])
    raise SolverInvariantError(f"no action is strictly optimal anywhere on face {face}")


def worst_punishment(problem: PersuasionProblem, subset: Iterable[str | int]) -> PunishmentResult:
    """Minimum of the indirect utility over beliefs supported inside ``subset``.

    The minimum runs over action groups that are strictly optimal somewhere
    on the face; points where the receiver is indifferent are skipped
    because the favourable tie-break lifts the value there.  The witness is
    the belief at which the minimizing group wins by the widest margin.
    """
    face = tuple(sorted(problem.state_indices(subset)))
    if not face:
        raise ValueError("worst punishment needs a nonempty state subset")
    return _worst(problem, face)


@dataclass(frozen=True)
class ALPResult:
    alp: bool
    value: Fraction
    threshold: Fraction | None = None
    violating: frozenset[str] | None = None

    def __bool__(self) -> bool:
        return self.alp

    def to_json(self) -> dict[str, Any]:
        return {
            "alp": self.alp,
            "value": format_rational(self.value),
            "threshold": None if self.threshold is None else format_rational(self.threshold),
            "violating_subset": None if self.violating is None else sorted(self.violating),
        }


def _subset_key(problem: PersuasionProblem, subset: frozenset[str]):
    return (len(subset), sorted(problem.state_index(s) for s in subset))


def is_alp(problem: PersuasionProblem, belief: Belief, enumerate_subsets: bool = False) -> ALPResult:
    """Whether no secret further experiment followed by selective disclosure pays.

    The belief passes when its indirect utility weakly exceeds the
    punishment value of every nonempty strict subset of its support.  By
    monotonicity of punishments that maximum is reached on a singleton, so
    by default only the degenerate beliefs are consulted;
    ``enumerate_subsets=True`` checks every subset instead.
    """
    value = indirect_utility(problem, belief)
    support = sorted(belief.support)
    if len(support) <= 1:
        return ALPResult(True, value)
    if enumerate_subsets:
        subsets = [frozenset(c) for r in range(1, len(support)) for c in combinations(support, r)]
    else:
        subsets = [frozenset([w]) for w in support]
    results = [worst_punishment(problem, T) for T in subsets]
    threshold = max(r.value for r in results)
    worst = min((r.subset for r in results if r.value == threshold), key=lambda T: _subset_key(problem, T))
    ok = value >= threshold
    return ALPResult(ok, value, threshold, None if ok else worst)


@dataclass(frozen=True)
class Piece:
    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = True

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, x: Fraction) -> bool:
        above = x > self.lo or (self.lo_closed and x == self.lo)
        below = x < self.hi or (self.hi_closed and x == self.hi)
        return above and below

    def __str__(self) -> str:
        if self.is_point:
            return "{" + str(self.lo) + "}"
        return f"{'[' if self.lo_closed else '('}{self.lo}, {self.hi}{']' if self.hi_closed else ')'}"

    def to_json(self) -> dict[str, Any]:
        return {
            "lo": format_rational(self.lo),
            "hi": format_rational(self.hi),
            "lo_closed": self.lo_closed,
            "hi_closed": self.hi_closed,
        }


@dataclass(frozen=True)
class StepFunction:
    """The indirect utility of a two-state problem as a function of ``Pr(second state)``.

    ``segments[i]`` is the constant value on the open interval
    ``(breakpoints[i], breakpoints[i + 1])``; ``points[i]`` is the value at
    ``breakpoints[i]``.
    """

    breakpoints: tuple[Fraction, ...]
    segments: tuple[Fraction, ...]
    points: tuple[Fraction, ...]


def _require_binary(problem: PersuasionProblem) -> None:
    if problem.n_states != 2:
        raise ValueError(f"binary-state operation on a problem with {problem.n_states} states")


def step_function(problem: PersuasionProblem) -> StepFunction:
    _require_binary(problem)
    cuts = {Fraction(0), Fraction(1)}
    rows = problem.receiver_utility
    for a, b in combinations(range(problem.n_actions), 2):
        d0 = rows[a][0] - rows[b][0]
        d1 = rows[a][1] - rows[b][1]
        if d0 != d1:
            x = d0 / (d0 - d1)
            if 0 < x < 1:
                cuts.add(x)
    xs = sorted(cuts)
    points = [indirect_utility(problem, Belief.binary(x)) for x in xs]
    segments = [indirect_utility(problem, Belief.binary((l + r) / 2)) for l, r in zip(xs, xs[1:])]
    # drop cuts where nothing changes
    keep = [0]
    for i in range(1, len(xs) - 1):
        if not (segments[i - 1] == points[i] == segments[i]):
            keep.append(i)
    keep.append(len(xs) - 1)
    seg_out = [segments[keep[j]] for j in range(len(keep) - 1)]
    return StepFunction(tuple(xs[i] for i in keep), tuple(seg_out), tuple(points[i] for i in keep))


@dataclass(frozen=True)
class BinaryRegion:
    pieces: tuple[Piece, ...]
    threshold: Fraction

    def __contains__(self, x: Fraction) -> bool:
        return any(x in p for p in self.pieces)

    def __str__(self) -> str:
        return " ∪ ".join(str(p) for p in self.pieces)

    def to_json(self) -> dict[str, Any]:
        return {
            "pieces": [p.to_json() for p in self.pieces],
            "threshold": format_rational(self.threshold),
            "text": str(self),
        }


def alp_region_binary(problem: PersuasionProblem) -> BinaryRegion:
    """Exact set of ALP beliefs for two states, as ``Pr(second state)``.

    Both degenerate beliefs belong to it; an interior belief belongs to it
    when its indirect utility reaches the larger of the two endpoint values.
    """
    sf = step_function(problem)
    xs, pts, segs = sf.breakpoints, sf.points, sf.segments
    threshold = max(pts[0], pts[-1])
    # elementary pieces in order: point, open segment, point, ...
    elems: list[tuple[Fraction, Fraction, bool]] = []
    for i, x in enumerate(xs):
        inside = i in (0, len(xs) - 1) or pts[i] >= threshold
        elems.append((x, x, inside))
        if i < len(segs):
            elems.append((x, xs[i + 1], segs[i] >= threshold))
    pieces: list[Piece] = []
    run: list[tuple[Fraction, Fraction]] = []

    def flush():
        if not run:
            return
        lo, hi = run[0][0], run[-1][1]
        lo_closed = run[0][0] == run[0][1]
        hi_closed = run[-1][0] == run[-1][1]
        pieces.append(Piece(lo, hi, lo_closed, hi_closed))
        run.clear()

    for lo, hi, inside in elems:
        if inside:
            run.append((lo, hi))
        else:
            flush()
    flush()
    return BinaryRegion(tuple(pieces), threshold)


@dataclass(frozen=True)
class DeviationWitness:
    """A cell whose sender gains by secretly learning more and disclosing selectively."""

    cell_label: str
    posterior: Belief
    on_path_value: Fraction
    subset: frozenset[str]
    sub_cell: Realization
    punishment: PunishmentResult

    def to_json(self, states) -> dict[str, Any]:
        return {
            "cell": self.cell_label,
            "posterior": [format_rational(p) for p in self.posterior],
            "on_path_value": format_rational(self.on_path_value),
            "subset": sorted(self.subset),
            "sub_cell": self.sub_cell.region.to_json(states),
            "punishment": self.punishment.to_json(),
        }


def signal_deviation_check(problem: PersuasionProblem, signal: Signal) -> list[DeviationWitness]:
    out = []
    for r in signal:
        if region_probability(problem, r.region) == 0:
            continue
        mu = region_posterior(problem, r.region)
        res = is_alp(problem, mu)
        if res:
            continue
        sub = Realization(f"{r.label}|{'+'.join(problem.state_names(problem.state_indices(res.violating)))}",
                          r.region.restrict(res.violating))
        out.append(DeviationWitness(r.label, mu, res.value, res.violating, sub, worst_punishment(problem, res.violating)))
    return out


@dataclass
class EquilibriumReport:
    clauses: dict[str, bool]
    witnesses: list[DeviationWitness] = field(default_factory=list)
    posteriors: dict[str, Belief] = field(default_factory=dict)
    values: dict[str, Fraction] = field(default_factory=dict)
    punishments: list[PunishmentResult] = field(default_factory=list)
    payoff: Fraction = Fraction(0)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.clauses.values())

    def to_json(self, states) -> dict[str, Any]:
        return {
            "clauses": dict(self.clauses),
            "passed": self.passed,
            "witnesses": [w.to_json(states) for w in self.witnesses],
            "posteriors": {k: [format_rational(p) for p in b] for k, b in self.posteriors.items()},
            "values": {k: format_rational(v) for k, v in self.values.items()},
            "payoff": format_rational(self.payoff),
            "punishments": [p.to_json() for p in self.punishments],
            "witness_selection": WITNESS_SELECTION,
            "notes": list(self.notes),
        }


def _all_subsets(problem: PersuasionProblem) -> list[frozenset[str]]:
    n = problem.n_states
    return [frozenset(problem.states[i] for i in c) for r in range(1, n + 1) for c in combinations(range(n), r)]


def message_value(problem: PersuasionProblem, signal: Signal, message: Region) -> Fraction:
    """Sender value of a message when ``signal`` is the equilibrium signal."""
    for r in signal:
        if r.region == message:
            return indirect_utility(problem, region_posterior(problem, r.region))
    return worst_punishment(problem, message.projection).value


def verify_equilibrium(
    problem: PersuasionProblem,
    signal: Signal,
    evidence: EvidenceStructure | None = None,
) -> EquilibriumReport:
    """Check the fully revealing equilibrium built on ``signal``.

    P1: on-path beliefs are exact Bayes posteriors and off-path beliefs are
    worst punishments.  P2: reporting the true cell is optimal among the
    feasible messages (by default those of the two-stage sequence
    ``(trivial, signal)``).  P3: no cell admits a profitable secret
    refinement.
    """
    notes = []
    posteriors: dict[str, Belief] = {}
    values: dict[str, Fraction] = {}
    p1 = True
    mean = [Fraction(0)] * problem.n_states
    payoff = Fraction(0)
    for r in signal:
        pr = region_probability(problem, r.region)
        if pr == 0:
            p1 = False
            notes.append(f"P1: realization {r.label} has zero probability")
            continue
        mu = region_posterior(problem, r.region)
        posteriors[r.label] = mu
        values[r.label] = indirect_utility(problem, mu)
        payoff += pr * values[r.label]
        for i in range(problem.n_states):
            mean[i] += pr * mu[i]
    if tuple(mean) != problem.prior.probs:
        p1 = False
        notes.append("P1: posteriors do not average to the prior")
    punishments = [worst_punishment(problem, T) for T in _all_subsets(problem)]
    for pun in punishments:
        supp = {problem.states[i] for i in pun.witness_belief.support}
        if not supp <= pun.subset or indirect_utility(problem, pun.witness_belief) != pun.value:
            p1 = False
            notes.append(f"P1: punishment witness for {sorted(pun.subset)} is inconsistent")

    if evidence is None:
        evidence = evidence_from_sequence(SignalSequence((Signal.trivial(signal.states), signal)))
    elif not evidence.signal.equivalent(signal):
        raise ValueError("evidence structure is built on a different signal")
    p2 = True
    for r in signal:
        if r.label not in values:
            continue
        own = next(c for c in evidence.signal if c.region == r.region)
        for m in evidence.messages(own.label):
            if not r.region.issubset(m):
                p2 = False
                notes.append(f"P2: message {m} at {r.label} does not contain the cell")
                continue
            if message_value(problem, signal, m) > values[r.label]:
                p2 = False
                notes.append(f"P2: {r.label} prefers sending {m} to the truth")

    witnesses = signal_deviation_check(problem, signal)
    return EquilibriumReport(
        {"P1": p1, "P2": p2, "P3": not witnesses},
        witnesses,
        posteriors,
        values,
        punishments,
        payoff,
        notes,
    )


class DistributionRejected(ValueError):
    """A posterior distribution that no equilibrium can induce."""

    def __init__(self, message: str, atom: Belief | None = None):
        super().__init__(message)
        self.atom = atom


def equilibrium_from_distribution(
    problem: PersuasionProblem, dist: PosteriorDistribution
) -> tuple[Signal, EquilibriumReport]:
    """Build and verify an equilibrium inducing a Bayes-plausible ALP-supported distribution.

    The report's ``payoff`` is the sender's expected value
    ``sum(weight * indirect_utility(belief))``.
    """
    if not is_bayes_plausible(problem, dist):
        raise DistributionRejected("distribution does not average to the prior")
    for b, _ in dist:
        if not is_alp(problem, b):
            raise DistributionRejected(f"atom {b} is not additional-learning-proof", b)
    signal = signal_from_distribution(problem, dist)
    report = verify_equilibrium(problem, signal)
    expected = sum((w * indirect_utility(problem, b) for b, w in dist), Fraction(0))
    if report.payoff != expected:  # pragma: no cover - guarded by the round-trip property
        report.clauses["P1"] = False
        report.notes.append("payoff differs from the distribution's expected value")
    return signal, report


@lru_cache(maxsize=256)
def _on_path_values(problem: PersuasionProblem, candidate: Signal) -> dict[Region, Fraction]:
    return {
        r.region: indirect_utility(problem, region_posterior(problem, r.region))
        for r in candidate
        if region_probability(problem, r.region) > 0
    }


def _best_report(problem: PersuasionProblem, on_path: dict[Region, Fraction], cell: Region) -> Fraction:
    if cell in on_path:
        best = on_path[cell]
    else:
        best = worst_punishment(problem, cell.projection).value
    for region, value in on_path.items():
        if value > best and cell.issubset(region):
            best = value
    return best


def realization_value(problem: PersuasionProblem, candidate: Signal, cell: Region) -> Fraction:
    """Best ex post payoff of a realization of some deviation signal.

    The sender either reports the realization truthfully (punished unless it
    coincides with an on-path cell) or passes it off as an on-path cell
    that contains it.
    """
    return _best_report(problem, _on_path_values(problem, candidate), cell)


def deviation_payoff(problem: PersuasionProblem, candidate: Signal, deviation: Signal) -> Fraction:
    on_path = _on_path_values(problem, candidate)
    total = Fraction(0)
    for r in deviation:
        pr = region_probability(problem, r.region)
        if pr:
            total += pr * _best_report(problem, on_path, r.region)
    return total


def signal_payoff(problem: PersuasionProblem, signal: Signal) -> Fraction:
    return sum((w * indirect_utility(problem, b) for b, w in induced_distribution(problem, signal)), Fraction(0))


def is_profitable_deviation(problem: PersuasionProblem, candidate: Signal, deviation: Signal) -> bool:
    return deviation_payoff(problem, candidate, deviation) > signal_payoff(problem, candidate)

