"""Signals as partitions of the expanded state space ``states x [0, 1)``.

A cell of a signal (a realization) is stored state by state as a finite
union of half-open rational intervals.  Half-open intervals make every
partition endpoint-exact, so refinement and equality checks are plain set
algebra with no measure-zero bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Any, Iterable, Iterator, Mapping, Sequence

from alpgame.model import Belief, PersuasionProblem
from alpgame.rational import SchemaError, format_rational, parse_rational

ZERO = Fraction(0)
ONE = Fraction(1)


class SignalError(ValueError):
    """Malformed signal, realization or posterior distribution."""


def _q(x) -> Fraction:
    return x if type(x) is Fraction else Fraction(x)


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of disjoint half-open intervals ``[l, r)`` inside ``[0, 1)``.

    Stored canonically: sorted, no empty pieces, touching pieces merged.
    """

    intervals: tuple[tuple[Fraction, Fraction], ...] = ()

    def __post_init__(self):
        pieces = sorted((_q(l), _q(r)) for l, r in self.intervals)
        out: list[tuple[Fraction, Fraction]] = []
        for l, r in pieces:
            if not (ZERO <= l <= r <= ONE):
                raise SignalError(f"interval [{l}, {r}) is not inside [0, 1]")
            if l == r:
                continue
            if out and l < out[-1][1]:
                raise SignalError(f"overlapping intervals at {l}")
            if out and l == out[-1][1]:
                out[-1] = (out[-1][0], r)
            else:
                out.append((l, r))
        object.__setattr__(self, "intervals", tuple(out))

    @classmethod
    def full(cls) -> IntervalSet:
        return cls(((ZERO, ONE),))

    @classmethod
    def _trusted(cls, pieces: list[tuple[Fraction, Fraction]]) -> IntervalSet:
        # set operations on canonical inputs already yield canonical output
        obj = object.__new__(cls)
        object.__setattr__(obj, "intervals", tuple(pieces))
        return obj

    @classmethod
    def _union_of(cls, pieces: Iterable[tuple[Fraction, Fraction]]) -> IntervalSet:
        merged: list[tuple[Fraction, Fraction]] = []
        for l, r in sorted(p for p in pieces if p[0] < p[1]):
            if merged and l <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(r, merged[-1][1]))
            else:
                merged.append((l, r))
        return cls._trusted(merged)

    @cached_property
    def _hash(self) -> int:
        return hash(self.intervals)

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def measure(self) -> Fraction:
        return sum((r - l for l, r in self.intervals), ZERO)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __iter__(self) -> Iterator[tuple[Fraction, Fraction]]:
        return iter(self.intervals)

    def __or__(self, other: IntervalSet) -> IntervalSet:
        return IntervalSet._union_of(self.intervals + other.intervals)

    def __and__(self, other: IntervalSet) -> IntervalSet:
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            l = max(a[i][0], b[j][0])
            r = min(a[i][1], b[j][1])
            if l < r:
                out.append((l, r))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet._trusted(out)

    def __sub__(self, other: IntervalSet) -> IntervalSet:
        out = []
        for l, r in self.intervals:
            cur = l
            for ol, orr in other.intervals:
                if orr <= cur or ol >= r:
                    continue
                if ol > cur:
                    out.append((cur, ol))
                cur = max(cur, orr)
            if cur < r:
                out.append((cur, r))
        return IntervalSet._trusted(out)

    def issubset(self, other: IntervalSet) -> bool:
        # other is canonical, so each of our pieces must sit inside one of its pieces
        b = other.intervals
        j = 0
        for l, r in self.intervals:
            while j < len(b) and b[j][1] <= l:
                j += 1
            if j == len(b) or b[j][0] > l or b[j][1] < r:
                return False
        return True

    def carve(self, lengths: Sequence[Fraction]) -> list[IntervalSet]:
        """Split into consecutive pieces of the given measures, left to right."""
        if sum(lengths) != self.measure:
            raise SignalError("carved lengths must add up to the measure of the set")
        pieces: list[IntervalSet] = []
        queue = list(self.intervals)
        for length in lengths:
            need = Fraction(length)
            taken = []
            while need > 0:
                l, r = queue[0]
                step = min(need, r - l)
                taken.append((l, l + step))
                need -= step
                if l + step == r:
                    queue.pop(0)
                else:
                    queue[0] = (l + step, r)
            pieces.append(IntervalSet(tuple(taken)))
        return pieces

    def to_json(self) -> list[list[int | str]]:
        return [[format_rational(l), format_rational(r)] for l, r in self.intervals]

    @classmethod
    def from_json(cls, data: Any, key: str = "sections") -> IntervalSet:
        if not isinstance(data, list):
            raise SchemaError(key, "expected an array of [l, r] pairs")
        pairs = []
        for i, pair in enumerate(data):
            if not isinstance(pair, list) or len(pair) != 2:
                raise SchemaError(f"{key}[{i}]", "expected a pair [l, r]")
            pairs.append((parse_rational(pair[0], f"{key}[{i}][0]"), parse_rational(pair[1], f"{key}[{i}][1]")))
        try:
            return cls(tuple(pairs))
        except SignalError as exc:
            raise SchemaError(key, str(exc)) from None

    def __str__(self) -> str:
        if not self.intervals:
            return "{}"
        return " u ".join(f"[{l},{r})" for l, r in self.intervals)


EMPTY = IntervalSet()


@dataclass(frozen=True)
class Region:
    """A subset of ``states x [0, 1)`` given by one interval set per state.

    Empty sections are dropped, so two regions are equal exactly when they
    are equal as sets.
    """

    sections: tuple[tuple[str, IntervalSet], ...] = ()

    def __post_init__(self):
        items = dict(self.sections)
        if len(items) != len(self.sections):
            raise SignalError("duplicate state in region sections")
        canon = tuple(sorted((s, iv) for s, iv in items.items() if iv))
        object.__setattr__(self, "sections", canon)

    @cached_property
    def _hash(self) -> int:
        return hash(self.sections)

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, IntervalSet]) -> Region:
        return cls(tuple(mapping.items()))

    @classmethod
    def whole(cls, states: Iterable[str]) -> Region:
        return cls(tuple((s, IntervalSet.full()) for s in states))

    def section(self, state: str) -> IntervalSet:
        for s, iv in self.sections:
            if s == state:
                return iv
        return EMPTY

    def measure(self, state: str) -> Fraction:
        return self.section(state).measure

    @property
    def projection(self) -> frozenset[str]:
        """States with a positive-measure section."""
        return frozenset(s for s, _ in self.sections)

    def __bool__(self) -> bool:
        return bool(self.sections)

    def _combine(self, other: Region, op) -> Region:
        states = self.projection | other.projection
        return Region(tuple((s, op(self.section(s), other.section(s))) for s in states))

    def __or__(self, other: Region) -> Region:
        return self._combine(other, lambda a, b: a | b)

    def __and__(self, other: Region) -> Region:
        return self._combine(other, lambda a, b: a & b)

    def __sub__(self, other: Region) -> Region:
        return self._combine(other, lambda a, b: a - b)

    def issubset(self, other: Region) -> bool:
        return all(iv.issubset(other.section(s)) for s, iv in self.sections)

    def __le__(self, other: Region) -> bool:
        return self.issubset(other)

    def __lt__(self, other: Region) -> bool:
        return self.issubset(other) and self != other

    def restrict(self, states: Iterable[str]) -> Region:
        keep = set(states)
        return Region(tuple((s, iv) for s, iv in self.sections if s in keep))

    def to_json(self, states: Sequence[str]) -> dict[str, list]:
        return {s: self.section(s).to_json() for s in states}

    @classmethod
    def from_json(cls, data: Any, states: Sequence[str] | None = None, key: str = "sections") -> Region:
        if not isinstance(data, dict):
            raise SchemaError(key, "expected an object mapping states to interval lists")
        if states is not None:
            unknown = [s for s in data if s not in states]
            if unknown:
                raise SchemaError(f"{key}.{unknown[0]}", "unknown state")
        return cls(tuple((s, IntervalSet.from_json(v, f"{key}.{s}")) for s, v in data.items()))

    def __str__(self) -> str:
        return " + ".join(f"{s}x{iv}" for s, iv in self.sections) or "{}"


@dataclass(frozen=True)
class Realization:
    label: str
    region: Region

    def __post_init__(self):
        if not self.region:
            raise SignalError(f"realization {self.label!r} has zero measure in every state")

    @property
    def sections(self) -> dict[str, IntervalSet]:
        return dict(self.region.sections)


@dataclass(frozen=True)
class Signal:
    """A labelled partition of ``states x [0, 1)``."""

    states: tuple[str, ...]
    realizations: tuple[Realization, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "realizations", tuple(self.realizations))
        labels = [r.label for r in self.realizations]
        if len(set(labels)) != len(labels):
            raise SignalError("realization labels are not unique")
        if not self.realizations:
            raise SignalError("a signal needs at least one realization")
        for r in self.realizations:
            extra = r.region.projection - set(self.states)
            if extra:
                raise SignalError(f"realization {r.label!r} uses unknown states {sorted(extra)}")
        for s in self.states:
            # sorted pieces must tile [0, 1) end to end: no gap, no overlap
            pieces = sorted(p for r in self.realizations for p in r.region.section(s).intervals)
            pos = ZERO
            for l, r in pieces:
                if l != pos:
                    raise SignalError(f"sections at state {s!r} do not partition [0, 1)")
                pos = r
            if pos != ONE:
                raise SignalError(f"sections at state {s!r} do not partition [0, 1)")

    def __len__(self) -> int:
        return len(self.realizations)

    def __iter__(self) -> Iterator[Realization]:
        return iter(self.realizations)

    @property
    def labels(self) -> list[str]:
        return [r.label for r in self.realizations]

    def get(self, label: str) -> Realization:
        for r in self.realizations:
            if r.label == label:
                return r
        raise KeyError(f"unknown realization label {label!r}")

    def cells(self) -> frozenset[Region]:
        return frozenset(r.region for r in self.realizations)

    def equivalent(self, other: Signal) -> bool:
        """Equality up to relabelling."""
        return set(self.states) == set(other.states) and self.cells() == other.cells()

    def cell_containing(self, region: Region) -> Realization:
        for r in self.realizations:
            if region.issubset(r.region):
                return r
        raise KeyError("region is not contained in a single cell")

    @classmethod
    def trivial(cls, states: Sequence[str], label: str = "root") -> Signal:
        return cls(tuple(states), (Realization(label, Region.whole(states)),))

    @classmethod
    def fully_revealing(cls, states: Sequence[str]) -> Signal:
        return cls(tuple(states), tuple(Realization(s, Region.whole([s])) for s in states))

    def to_json(self) -> list[dict[str, Any]]:
        return [{"label": r.label, "sections": r.region.to_json(self.states)} for r in self.realizations]

    @classmethod
    def from_json(cls, data: Any, states: Sequence[str], key: str = "signal") -> Signal:
        if not isinstance(data, list):
            raise SchemaError(key, "expected an array of realizations")
        reals = []
        for i, item in enumerate(data):
            k = f"{key}[{i}]"
            if not isinstance(item, dict) or "label" not in item or "sections" not in item:
                raise SchemaError(k, "realization needs 'label' and 'sections'")
            if not isinstance(item["label"], str):
                raise SchemaError(f"{k}.label", "must be a string")
            try:
                reals.append(Realization(item["label"], Region.from_json(item["sections"], states, f"{k}.sections")))
            except SignalError as exc:
                raise SchemaError(k, str(exc)) from None
        try:
            return cls(tuple(states), tuple(reals))
        except SignalError as exc:
            raise SchemaError(key, str(exc)) from None


@dataclass(frozen=True)
class PosteriorDistribution:
    """Finitely supported distribution over beliefs, positive weights summing to 1.

    Bayes plausibility is deliberately not enforced here; see
    :func:`is_bayes_plausible`.
    """

    atoms: tuple[tuple[Belief, Fraction], ...]

    def __post_init__(self):
        atoms = tuple((b, Fraction(w)) for b, w in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise SignalError("empty posterior distribution")
        if any(w <= 0 for _, w in atoms):
            raise SignalError("atom weights must be positive")
        if sum(w for _, w in atoms) != 1:
            raise SignalError("atom weights must sum to 1")
        if len({len(b) for b, _ in atoms}) != 1:
            raise SignalError("atoms have different dimensions")

    def __iter__(self):
        return iter(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def merged(self) -> PosteriorDistribution:
        acc: dict[Belief, Fraction] = {}
        for b, w in self.atoms:
            acc[b] = acc.get(b, ZERO) + w
        return PosteriorDistribution(tuple(acc.items()))

    def as_mapping(self) -> dict[Belief, Fraction]:
        return dict(self.merged().atoms)

    def mean(self) -> tuple[Fraction, ...]:
        n = len(self.atoms[0][0])
        return tuple(sum((w * b[i] for b, w in self.atoms), ZERO) for i in range(n))

    def to_json(self) -> list[dict[str, Any]]:
        return [{"belief": [format_rational(p) for p in b], "weight": format_rational(w)} for b, w in self.atoms]

    @classmethod
    def from_json(cls, data: Any, key: str = "distribution") -> PosteriorDistribution:
        if not isinstance(data, list):
            raise SchemaError(key, "expected an array of atoms")
        atoms = []
        for i, item in enumerate(data):
            k = f"{key}[{i}]"
            if not isinstance(item, dict) or "belief" not in item or "weight" not in item:
                raise SchemaError(k, "atom needs 'belief' and 'weight'")
            if not isinstance(item["belief"], list):
                raise SchemaError(f"{k}.belief", "expected an array")
            probs = tuple(parse_rational(p, f"{k}.belief") for p in item["belief"])
            try:
                atoms.append((Belief(probs), parse_rational(item["weight"], f"{k}.weight")))
            except ValueError as exc:
                raise SchemaError(k, str(exc)) from None
        try:
            return cls(tuple(atoms))
        except SignalError as exc:
            raise SchemaError(key, str(exc)) from None


def _check_states(problem: PersuasionProblem, signal: Signal) -> None:
    if set(signal.states) != set(problem.states):
        raise SignalError("signal and problem have different state sets")


def likelihood(signal: Signal, label: str, state: str) -> Fraction:
    """Probability of the realization given the state."""
    if state not in signal.states:
        raise KeyError(f"unknown state {state!r}")
    return signal.get(label).region.measure(state)


def region_probability(problem: PersuasionProblem, region: Region) -> Fraction:
    return sum((region.measure(s) * p for s, p in zip(problem.states, problem.prior)), ZERO)


def region_posterior(problem: PersuasionProblem, region: Region) -> Belief:
    total = region_probability(problem, region)
    if total == 0:
        raise SignalError("region has zero probability under the prior")
    return Belief(tuple(region.measure(s) * p / total for s, p in zip(problem.states, problem.prior)))


def probability(problem: PersuasionProblem, signal: Signal, label: str) -> Fraction:
    _check_states(problem, signal)
    return region_probability(problem, signal.get(label).region)


def posterior(problem: PersuasionProblem, signal: Signal, label: str) -> Belief:
    """Bayes posterior after observing the realization."""
    _check_states(problem, signal)
    region = signal.get(label).region
    if region_probability(problem, region) == 0:
        raise SignalError(f"realization {label!r} has zero probability")
    return region_posterior(problem, region)


def induced_distribution(problem: PersuasionProblem, signal: Signal) -> PosteriorDistribution:
    _check_states(problem, signal)
    atoms = []
    for r in signal:
        pr = region_probability(problem, r.region)
        if pr > 0:
            atoms.append((region_posterior(problem, r.region), pr))
    return PosteriorDistribution(tuple(atoms)).merged()


def is_bayes_plausible(problem: PersuasionProblem, dist: PosteriorDistribution) -> bool:
    if len(dist.atoms[0][0]) != problem.n_states:
        return False
    return dist.mean() == problem.prior.probs


def refines(fine: Signal, coarse: Signal) -> bool:
    """Whether every cell of ``coarse`` is a union of cells of ``fine``.

    For two partitions of the same space this holds exactly when each fine
    cell sits inside some coarse cell.
    """
    if set(fine.states) != set(coarse.states):
        return False
    coarse_cells = [r.region for r in coarse]
    return all(any(f.region.issubset(c) for c in coarse_cells) for f in fine)


def join(a: Signal, b: Signal, sep: str = "&") -> Signal:
    """Coarsest common refinement; labels are ``"<a-label><sep><b-label>"``."""
    if set(a.states) != set(b.states):
        raise SignalError("cannot join signals over different state sets")
    cells = []
    for ra in a:
        for rb in b:
            inter = ra.region & rb.region
            if inter:
                cells.append(Realization(f"{ra.label}{sep}{rb.label}", inter))
    return Signal(a.states, tuple(cells))


def signal_from_distribution(
    problem: PersuasionProblem,
    dist: PosteriorDistribution,
    labels: Sequence[str] | None = None,
) -> Signal:
    """Build a signal inducing a Bayes-plausible distribution of posteriors.

    For each state the unit interval is cut into consecutive pieces, one per
    atom in atom order, of length ``weight * belief[state] / prior[state]``.
    """
    if not is_bayes_plausible(problem, dist):
        raise SignalError("posterior distribution is not Bayes plausible")
    n = len(dist)
    labels = list(labels) if labels is not None else [f"s{i + 1}" for i in range(n)]
    if len(labels) != n:
        raise SignalError("need one label per atom")
    per_atom: list[dict[str, IntervalSet]] = [{} for _ in range(n)]
    for w_idx, state in enumerate(problem.states):
        prior = problem.prior[w_idx]
        lengths = [w * b[w_idx] / prior for b, w in dist]
        for i, piece in enumerate(IntervalSet.full().carve(lengths)):
            per_atom[i][state] = piece
    reals = tuple(Realization(lab, Region.from_mapping(secs)) for lab, secs in zip(labels, per_atom))
    return Signal(problem.states, reals)
