"""Evidence structures: which verifiable messages each realization may send.

Messages are finite-interval-union subsets of ``states x [0, 1)``, i.e.
:class:`~alpgame.signals.Region` values with positive measure somewhere.
Conditions checked here:

* C1  every feasible message contains the sender's own cell;
* C2  the cell itself is always feasible;
* C3  a cell's messages stay feasible for its lower elements in any
      refining signal (checked against a finite list of witnesses);
* C4  messages are unions of cells;
* C5  the messages of one cell are nested;
* C6  a message feasible at one cell is feasible at every cell it contains.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from alpgame.rational import SchemaError
from alpgame.signals import Region, Signal, SignalError, refines

Message = Region


def projection(message: Region) -> frozenset[str]:
    """States that the message certifies as possible."""
    return message.projection


@dataclass(frozen=True)
class Violation:
    condition: str
    label: str
    detail: str

    def __str__(self) -> str:
        return f"{self.condition} at {self.label}: {self.detail}"


@dataclass(frozen=True)
class EvidenceStructure:
    signal: Signal
    feasible: Mapping[str, tuple[Region, ...]] = field(default_factory=dict)

    def __post_init__(self):
        feas = {}
        for label, msgs in self.feasible.items():
            self.signal.get(label)
            msgs = tuple(msgs)
            if any(not m for m in msgs):
                raise SignalError(f"empty message feasible at {label!r}")
            feas[label] = msgs
        object.__setattr__(self, "feasible", feas)

    def messages(self, label: str) -> tuple[Region, ...]:
        return self.feasible.get(label, ())

    @classmethod
    def truthful(cls, signal: Signal) -> EvidenceStructure:
        """Only the exact cell is available to each realization."""
        return cls(signal, {r.label: (r.region,) for r in signal})

    def to_json(self) -> dict[str, Any]:
        states = self.signal.states
        return {
            "signal": self.signal.to_json(),
            "feasible": {r.label: [m.to_json(states) for m in self.messages(r.label)] for r in self.signal},
        }

    @classmethod
    def from_json(cls, data: Any, states: Sequence[str]) -> EvidenceStructure:
        if not isinstance(data, dict) or "signal" not in data or "feasible" not in data:
            raise SchemaError("evidence", "expected an object with 'signal' and 'feasible'")
        signal = Signal.from_json(data["signal"], states, "signal")
        feas_data = data["feasible"]
        if not isinstance(feas_data, dict):
            raise SchemaError("feasible", "expected an object keyed by realization label")
        feasible = {}
        for label, msgs in feas_data.items():
            if label not in signal.labels:
                raise SchemaError(f"feasible.{label}", "unknown realization label")
            if not isinstance(msgs, list):
                raise SchemaError(f"feasible.{label}", "expected an array of messages")
            feasible[label] = tuple(
                Region.from_json(m, states, f"feasible.{label}[{i}]") for i, m in enumerate(msgs)
            )
        try:
            return cls(signal, feasible)
        except SignalError as exc:
            raise SchemaError("feasible", str(exc)) from None


@dataclass(frozen=True)
class SignalSequence:
    """Signals ordered by refinement, coarsest first."""

    stages: tuple[Signal, ...]

    def __post_init__(self):
        stages = tuple(self.stages)
        object.__setattr__(self, "stages", stages)
        for i in range(1, len(stages)):
            if not refines(stages[i], stages[i - 1]):
                raise SignalError(f"stage {i} does not refine stage {i - 1}")

    def __len__(self) -> int:
        return len(self.stages)

    def to_json(self) -> dict[str, Any]:
        return {"stages": [s.to_json() for s in self.stages]}

    @classmethod
    def from_json(cls, data: Any, states: Sequence[str]) -> SignalSequence:
        if not isinstance(data, dict) or not isinstance(data.get("stages"), list):
            raise SchemaError("stages", "expected an object with a 'stages' array")
        stages = tuple(Signal.from_json(s, states, f"stages[{i}]") for i, s in enumerate(data["stages"]))
        try:
            return cls(stages)
        except SignalError as exc:
            raise SchemaError("stages", str(exc)) from None


def _intrinsic(structure: EvidenceStructure) -> list[Violation]:
    out = []
    for r in structure.signal:
        msgs = structure.messages(r.label)
        for m in msgs:
            if not r.region.issubset(m):
                out.append(Violation("C1", r.label, f"message {m} does not contain the cell"))
        if r.region not in msgs:
            out.append(Violation("C2", r.label, "the cell itself is not a feasible message"))
    return out


def validate_c1_c3(
    structure: EvidenceStructure,
    refining_witnesses: Sequence[Signal | EvidenceStructure] = (),
) -> list[Violation]:
    """Check C1 and C2 intrinsically and C3 against refining witnesses.

    A witness given as a bare :class:`Signal` gets the feasibility obtained
    by appending it as a further stage: each lower element may send its own
    cell plus every message of the cell it came from.  A witness given as an
    :class:`EvidenceStructure` is checked with its own feasibility map.
    """
    out = _intrinsic(structure)
    base = structure.signal
    for k, witness in enumerate(refining_witnesses):
        w_signal = witness if isinstance(witness, Signal) else witness.signal
        if not refines(w_signal, base):
            raise SignalError(f"witness {k} does not refine the base signal")
        if isinstance(witness, Signal):
            derived = {}
            for r in w_signal:
                extra = structure.messages(base.cell_containing(r.region).label)
                derived[r.label] = (r.region, *(m for m in extra if m != r.region))
            w_struct = EvidenceStructure(w_signal, derived)
        else:
            w_struct = witness
        for s in base:
            for lower in w_signal:
                if not lower.region.issubset(s.region):
                    continue
                available = w_struct.messages(lower.label)
                for m in structure.messages(s.label):
                    if m not in available:
                        out.append(
                            Violation("C3", s.label, f"message {m} not feasible at lower element {lower.label} of witness {k}")
                        )
    return out


def validate_hierarchical(structure: EvidenceStructure) -> list[Violation]:
    """Check C4-C6."""
    out = []
    signal = structure.signal
    for r in signal:
        msgs = structure.messages(r.label)
        for m in msgs:
            inside = [c.region for c in signal if c.region.issubset(m)]
            union = Region()
            for c in inside:
                union = union | c
            if union != m:
                out.append(Violation("C4", r.label, f"message {m} is not a union of cells"))
        for i, m in enumerate(msgs):
            for m2 in msgs[i + 1:]:
                if not (m.issubset(m2) or m2.issubset(m)):
                    out.append(Violation("C5", r.label, f"messages {m} and {m2} are not nested"))
        for m in msgs:
            for other in signal:
                if other.label != r.label and other.region.issubset(m) and m not in structure.messages(other.label):
                    out.append(Violation("C6", r.label, f"message {m} contains {other.label} but is not feasible there"))
    return out


def evidence_from_sequence(seq: SignalSequence) -> EvidenceStructure:
    """Hierarchical structure induced by a refinement-ordered sequence.

    The base signal is the last stage; a final cell may send any stage cell
    that contains it, listed from the finest stage back to the coarsest.
    """
    if not seq.stages:
        raise SignalError("empty signal sequence")
    final = seq.stages[-1]
    feasible = {}
    for r in final:
        msgs: list[Region] = []
        for stage in reversed(seq.stages):
            cell = stage.cell_containing(r.region).region
            if cell not in msgs:
                msgs.append(cell)
        feasible[r.label] = tuple(msgs)
    return EvidenceStructure(final, feasible)
