import json
import random

import pytest

from coolba import codec
from coolba.engine import run_ba
from coolba.errors import ConfigurationError, InvariantViolation
from coolba.params import derive
from coolba.scenarios import consistency_example, random_inputs, validity_example
from coolba.simnet.attacks import (STRATEGIES, ConsistencyAttack, RandomAdversary, Strategy,
                                   ValidityAttack, craft_colliding_messages, make_strategy)
from coolba.simnet.network import Inbox, Kind, ProtocolMessage, Slot, _SharedRound, run_rounds


class Echo:
    """Broadcasts its round number for a few rounds and keeps what it saw."""

    def __init__(self, pid, rounds=3, direct_to=None):
        self.id = pid
        self.rounds = rounds
        self.direct_to = direct_to
        self.seen = []
        self.done = False

    def step(self, rnd, inbox):
        self.seen.append(dict(inbox.items()))
        if rnd > self.rounds:
            self.done = True
            return []
        return [ProtocolMessage(Kind.SUCCESS_BIT, self.id, self.direct_to, (self.id, rnd), 1)]


def _schedule(ids, fixed=False):
    return lambda rnd: Slot("s", Kind.SUCCESS_BIT, 1, "B2", tuple(ids), fixed=fixed, senders=tuple(ids) if fixed else ())


class Scripted:
    def __init__(self, fn):
        self.fn = fn

    def act(self, ctx):
        return self.fn(ctx)


def test_delivery_next_round_and_unaltered():
    nodes = {i: Echo(i) for i in (1, 2, 3)}
    tr = run_rounds(nodes, None, _schedule([1, 2, 3]))
    assert tr.terminated and tr.rounds == 4
    assert nodes[1].seen[0] == {}
    assert nodes[1].seen[1] == {2: (2, 1), 3: (3, 1)}
    assert nodes[3].seen[3] == {1: (1, 3), 2: (2, 3)}


def test_adversary_cannot_speak_for_honest_or_duplicate():
    def fn(ctx):
        return [ctx.message(1, 2, "forged"),          # honest sender
                ctx.message(4, 2, "a"), ctx.message(4, 2, "b"),  # duplicate
                ProtocolMessage(Kind.CODED_PAIR, 4, 3, "x", 1),  # wrong kind
                ctx.message(4, 9, "nobody"),          # not a recipient
                ctx.message(4, 4, "self"),
                ctx.message(4, 3, ["unhashable"])]
    nodes = {i: Echo(i, rounds=1) for i in (1, 2, 3)}
    tr = run_rounds(nodes, Scripted(fn), _schedule([1, 2, 3, 4]), faulty={4})
    assert nodes[2].seen[1] == {1: (1, 1), 3: (3, 1), 4: "a"}
    assert 4 not in nodes[3].seen[1]
    assert tr.dropped == 2 * 6  # the slot is scheduled in both rounds


def test_rushing_adversary_sees_pending_messages():
    seen = []

    def fn(ctx):
        seen.append(sorted(m.sender for m in ctx.pending))
        return []
    run_rounds({i: Echo(i, rounds=1) for i in (1, 2)}, Scripted(fn), _schedule([1, 2, 3]), faulty={3})
    assert seen[0] == [1, 2]


def test_inbox_lookup_rules():
    shared = _SharedRound()
    shared.broadcasts.update({1: 0, 2: 1, 3: 1})
    box = Inbox(2, shared, {3: 0, 4: 1})
    assert box.get(2) is None and box.get(3) == 0 and box.get(1) == 0
    assert box.senders() == {1, 3, 4}
    assert dict(box.tally()) == {0: 2, 1: 1}
    assert len(box) == 3


def test_fixed_slots_charge_silent_senders():
    nodes = {i: Echo(i, rounds=1) for i in (1, 2, 3)}
    tr = run_rounds(nodes, None, _schedule([1, 2, 3, 4], fixed=True), faulty={4})
    # two scheduled rounds, 4 senders x 3 recipients x 1 bit each
    assert tr.bits["B2"] == 2 * 12
    assert tr.honest_bits["B2"] == 9


def test_optional_slots_charge_per_frame():
    def fn(ctx):
        return [ctx.message(4, 1, 1)]
    nodes = {i: Echo(i, rounds=1) for i in (1, 2, 3)}
    tr = run_rounds(nodes, Scripted(fn), _schedule([1, 2, 3, 4]), faulty={4})
    assert tr.bits["B2"] == 9 + 2  # one adversary frame in each of two rounds


def test_faulty_recipients_get_nothing_from_the_adversary_but_honest_frames_count():
    nodes = {1: Echo(1, rounds=1, direct_to=4), 2: Echo(2, rounds=1)}
    tr = run_rounds(nodes, None, _schedule([1, 2, 4]), faulty={4})
    assert tr.honest_bits["B2"] == 1 + 2


def test_round_limit_reports_liveness_failure():
    tr = run_rounds({1: Echo(1, rounds=50)}, None, _schedule([1]), round_limit=5)
    assert not tr.terminated and tr.rounds == 5


def test_honest_message_outside_schedule_is_an_invariant_violation():
    with pytest.raises(InvariantViolation):
        run_rounds({1: Echo(1)}, None, lambda rnd: None)
    with pytest.raises(InvariantViolation):
        run_rounds({1: Echo(1)}, None, lambda rnd: Slot("p", Kind.CODED_PAIR, 2, "B1", (1,)))


def test_transcript_is_deterministic_and_exportable(tmp_path):
    p = derive(7, 2, 64)
    inputs = random_inputs(range(1, 6), 64, random.Random(1))
    a = run_ba(inputs, RandomAdversary(), p, faulty={6, 7}, seed=5, record=True)
    b = run_ba(inputs, RandomAdversary(), p, faulty={6, 7}, seed=5, record=True)
    c = run_ba(inputs, RandomAdversary(), p, faulty={6, 7}, seed=6, record=True)
    assert a.transcript.digest() == b.transcript.digest() != c.transcript.digest()
    assert a.to_json() == b.to_json()
    path = tmp_path / "t.jsonl"
    a.transcript.write(path)
    rows = [json.loads(line) for line in path.read_text().splitlines()]
    assert set(rows[0]) == {"round", "from", "to", "kind", "slot", "bit_size", "payload"}
    # honest-to-honest frames in the audit carry the honest sender's payload size
    pairs = [r for r in rows if r["kind"] == "CodedPair" and r["from"] <= 5]
    assert len(pairs) == 5 * 6 and all(r["bit_size"] == 2 * p.c for r in pairs)


def test_collisions_for_the_worked_example():
    p = derive(31, 10, 240)
    m1 = codec.message_from_int(random.Random(0).getrandbits(240), 240)
    base, m2 = craft_colliding_messages(p, {1, 12}, m1)
    assert base == m1 and m2 != m1
    s1 = codec.encode_all(codec.stripe(m1, p), 31)
    s2 = codec.encode_all(codec.stripe(m2, p), 31)
    same = {i + 1 for i in range(31) if s1[i] == s2[i]}
    assert same == {1, 12}


def test_collision_edge_cases():
    p = derive(31, 10, 240)
    m1 = bytes(30)
    _, m2 = craft_colliding_messages(p, set(), m1)
    assert m2 != m1
    with pytest.raises(ConfigurationError):
        craft_colliding_messages(p, {1, 2, 3}, m1)
    short = derive(31, 10, 100)  # c = 48: only the first two columns hold message bits
    with pytest.raises(ConfigurationError):
        craft_colliding_messages(short, {1, 2}, bytes(13))
    _, m3 = craft_colliding_messages(short, {5}, bytes(13))
    assert codec.encode(codec.stripe(m3, short), 5) == codec.encode(codec.stripe(bytes(13), short), 5)


def test_worked_attacks_fail_against_the_protocol():
    for setup in (consistency_example(), validity_example()):
        rec = run_ba(setup.inputs, setup.adversary, setup.params, faulty=setup.faulty)
        assert set(rec.outputs.values()) == {setup.expected}
        assert rec.passed


def test_silent_adversary_mixed_inputs_unanimous():
    p = derive(7, 2, 16)
    for seed in range(100):
        rng = random.Random(seed)
        inputs = {i: rng.choice([b"\x00\x01", b"\x00\x02"]) for i in range(1, 6)}
        rec = run_ba(inputs, Strategy(), p, faulty={6, 7}, seed=seed)
        assert rec.flags["consistent"] and rec.flags["terminated"]


def test_strategy_registry():
    assert set(STRATEGIES) == {"silent", "random", "validity", "consistency", "equivocate"}
    assert isinstance(make_strategy("validity"), ValidityAttack)
    assert make_strategy("consistency").name == "consistency"
    with pytest.raises(ConfigurationError):
        make_strategy("nope")


def test_false_zero_announcement_is_harmless():
    class Denier(ConsistencyAttack):
        def indicators(self, ctx):
            return [ctx.message(f, None, 0) for f in self.senders(ctx)]
    p = derive(10, 3, 64)
    m = b"\x11" * 8
    rec = run_ba({i: m for i in range(1, 8)}, Denier(), p, faulty={8, 9, 10})
    assert set(rec.outputs.values()) == {m}
