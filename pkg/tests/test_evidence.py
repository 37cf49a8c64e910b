import json
import random

import pytest

from properties import random_signal
from alpgame.evidence import (
    EvidenceStructure,
    SignalSequence,
    evidence_from_sequence,
    projection,
    validate_c1_c3,
    validate_hierarchical,
)
from alpgame.signals import Region, Signal, SignalError, join, refines
from alpgame.seqgame import plan_from_json, plan_to_sequence
from conftest import FIXTURES


@pytest.fixture(scope="module")
def seq(pd):
    plan = plan_from_json(json.loads((FIXTURES / "plan.json").read_text())["plan"], pd.states)
    return plan_to_sequence(pd, plan)


@pytest.fixture(scope="module")
def cells(seq):
    final = seq.stages[-1]
    return {"s1": final.get("b1").region, "s2": final.get("g1/b2").region, "s3": final.get("g1/g2").region}


def conditions(violations):
    return {v.condition for v in violations}


def test_staged_messages(seq, cells, pd):
    s1, s2, s3 = cells["s1"], cells["s2"], cells["s3"]
    whole = Region.whole(pd.states)
    ev = evidence_from_sequence(seq)
    assert set(ev.messages("b1")) == {s1, whole}
    assert set(ev.messages("g1/b2")) == {s2, s2 | s3, whole}
    assert set(ev.messages("g1/g2")) == {s3, s2 | s3, whole}
    assert validate_c1_c3(ev) == []
    assert validate_hierarchical(ev) == []


def test_stages_as_drawn(seq, cells):
    ev = evidence_from_sequence(SignalSequence(seq.stages[1:]))
    s1, s2, s3 = cells["s1"], cells["s2"], cells["s3"]
    assert set(ev.messages("b1")) == {s1}
    assert set(ev.messages("g1/b2")) == {s2, s2 | s3}
    assert set(ev.messages("g1/g2")) == {s3, s2 | s3}


def test_single_and_repeated_stage(seq):
    final = seq.stages[-1]
    for stages in ((final,), (final, final)):
        ev = evidence_from_sequence(SignalSequence(stages))
        assert all(ev.messages(r.label) == (r.region,) for r in final)
    with pytest.raises(SignalError):
        evidence_from_sequence(SignalSequence(()))


def test_sequence_must_refine(seq):
    with pytest.raises(SignalError):
        SignalSequence((seq.stages[-1], seq.stages[1]))


def test_projection(cells, pd):
    assert projection(cells["s1"]) == {"bad"}
    assert projection(Region.whole(pd.states)) == {"bad", "good"}
    assert projection(cells["s2"] | cells["s3"]) == {"bad", "good"}


def test_c1_c2_violations(seq, cells):
    final = seq.stages[-1]
    s1, s2, s3 = cells["s1"], cells["s2"], cells["s3"]
    missing = EvidenceStructure(final, {"b1": (s1,), "g1/b2": (s2 | s3,), "g1/g2": (s3,)})
    assert conditions(validate_c1_c3(missing)) == {"C2"}
    forged = EvidenceStructure(final, {"b1": (s1,), "g1/b2": (s2, s3), "g1/g2": (s3,)})
    assert conditions(validate_c1_c3(forged)) == {"C1"}


def test_c5_c6_violations(seq, cells, pd):
    final = seq.stages[-1]
    s1, s2, s3 = cells["s1"], cells["s2"], cells["s3"]
    whole = Region.whole(pd.states)
    crossing = EvidenceStructure(final, {"b1": (s1, s1 | s2), "g1/b2": (s2, s1 | s2, s2 | s3), "g1/g2": (s3, s2 | s3)})
    assert "C5" in conditions(validate_hierarchical(crossing))
    uneven = EvidenceStructure(final, {"b1": (s1, whole), "g1/b2": (s2, whole), "g1/g2": (s3,)})
    assert conditions(validate_hierarchical(uneven)) == {"C6"}


def test_c4_violation(seq, cells):
    final = seq.stages[-1]
    s1, s2, s3 = cells["s1"], cells["s2"], cells["s3"]
    # s1 plus half of s2 is not a union of cells
    half_s2 = Region.from_mapping({"bad": s2.section("bad").carve([s2.measure("bad") / 2] * 2)[0]})
    ev = EvidenceStructure(final, {"b1": (s1, s1 | half_s2), "g1/b2": (s2,), "g1/g2": (s3,)})
    assert conditions(validate_hierarchical(ev)) == {"C4"}


def test_c3_witnesses(seq, pd):
    ev = evidence_from_sequence(seq)
    finer = join(seq.stages[-1], Signal.fully_revealing(pd.states))
    rng = random.Random(3)
    witness = join(seq.stages[-1], random_signal(rng, pd.states, cells=3))
    assert validate_c1_c3(ev, [finer, witness]) == []
    # a witness structure that drops a message at a lower element
    labels = {r.label: (r.region,) for r in witness}
    assert "C3" in conditions(validate_c1_c3(ev, [EvidenceStructure(witness, labels)]))
    with pytest.raises(SignalError):
        validate_c1_c3(ev, [Signal.trivial(pd.states)])


def test_json_roundtrip(seq, pd):
    ev = evidence_from_sequence(seq)
    again = EvidenceStructure.from_json(json.loads(json.dumps(ev.to_json())), pd.states)
    assert again.signal == ev.signal
    assert all(set(again.messages(r.label)) == set(ev.messages(r.label)) for r in ev.signal)
    assert SignalSequence.from_json(json.loads(json.dumps(seq.to_json())), pd.states) == seq


def random_sequence(rng, states):
    stages = [Signal.trivial(states)]
    for _ in range(rng.randint(1, 3)):
        stages.append(join(stages[-1], random_signal(rng, states, cells=rng.randint(1, 3))))
    return SignalSequence(tuple(stages))


def test_induced_structures_are_hierarchical():
    rng = random.Random(5)
    for _ in range(200):
        states = tuple(f"w{i}" for i in range(rng.randint(1, 3)))
        seq = random_sequence(rng, states)
        for a, b in zip(seq.stages, seq.stages[1:]):
            assert refines(b, a)
        ev = evidence_from_sequence(seq)
        assert validate_c1_c3(ev) == []
        assert validate_hierarchical(ev) == []
        final = seq.stages[-1]
        for r in final:
            for m in ev.messages(r.label):
                assert projection(r.region) <= projection(m)
        # two final cells under one stage cell can both send it
        for stage in seq.stages:
            for coarse in stage:
                under = [r for r in final if r.region.issubset(coarse.region)]
                assert all(coarse.region in ev.messages(r.label) for r in under)
