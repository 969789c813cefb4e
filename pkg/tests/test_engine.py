import random

import pytest

from coolba import codec
from coolba.engine import Processor, Scenario, majority, run_ba, run_ba_committee, run_bb
from coolba.errors import ConfigurationError
from coolba.metrics import expected_cool_rounds
from coolba.params import derive
from coolba.scenarios import consistency_example, random_message
from coolba.simnet.attacks import (STRATEGIES, ConsistencyAttack, RandomAdversary, SplitLeader,
                                   Strategy, make_strategy)
from coolba.simnet.network import Inbox, Kind
from coolba.values import PHI


def _sc(n, t, ell, faulty=()):
    p = derive(n, t, ell)
    return Scenario("ba", p, n, tuple(range(1, n + 1)), frozenset(faulty))


def _inbox(owner, frames):
    return Inbox(owner, direct=dict(frames))


def test_phase1_send_layout():
    sc = _sc(4, 1, 8)
    msg = b"\x5a"
    proc = Processor(2, sc, msg)
    out = proc.phase1_send()
    assert [m.to for m in out] == [1, 3, 4]
    assert all(m.kind is Kind.CODED_PAIR and m.bit_size == 2 * sc.params.c for m in out)
    block = codec.stripe(msg, sc.params)
    for m in out:
        assert m.payload == (codec.encode(block, m.to), codec.encode(block, 2))
    # k = 1: both coordinates are the whole padded block
    assert out[0].payload[0] == out[0].payload[1] == block[0]


def _pairs_for(sc, me, holders):
    """Pairs received by ``me`` when processor j holds ``holders[j]``."""
    out = {}
    for j, m in holders.items():
        sym = sc.symbols(m)
        out[j] = (sym[me - 1], sym[j - 1])
    return out


def test_phase1_receive_threshold():
    sc = _sc(4, 1, 8)
    proc = Processor(1, sc, b"\x01")
    proc.phase1_send()
    sent = proc.phase1_receive(_inbox(1, _pairs_for(sc, 1, {2: b"\x01", 3: b"\x02", 4: b"\x03"})))
    assert proc.s == 0 and proc.w is PHI and proc.u[1] == 1
    assert sent[0].payload == 0 and sent[0].to is None


def test_phase1_receive_success_with_silent_faulty():
    sc = _sc(4, 1, 8, faulty={4})
    proc = Processor(1, sc, b"\x01")
    proc.phase1_send()
    proc.phase1_receive(_inbox(1, _pairs_for(sc, 1, {2: b"\x01", 3: b"\x01"})))
    assert proc.s == 1 and proc.w == b"\x01" and proc.u[4] == 0


def test_malformed_pairs_are_mismatches():
    sc = _sc(4, 1, 8)
    proc = Processor(1, sc, b"\x01")
    proc.phase1_send()
    frames = _pairs_for(sc, 1, {2: b"\x01", 3: b"\x01"})
    frames[4] = "garbage"
    proc.phase1_receive(_inbox(1, frames))
    assert proc.u[4] == 0 and proc.s == 1


def test_empty_mask_changes_nothing():
    sc = _sc(4, 1, 8)
    proc = Processor(1, sc, b"\x01")
    proc.phase1_send()
    proc.phase1_receive(_inbox(1, _pairs_for(sc, 1, {2: b"\x01", 3: b"\x01", 4: b"\x01"})))
    assert proc.phase2_step(_inbox(1, {2: 1, 3: 1, 4: 1})) == []
    assert proc.S0 == set() and proc.s == 1


def test_absent_phase1_indicator_means_zero():
    sc = _sc(4, 1, 8)
    proc = Processor(1, sc, b"\x01")
    proc.phase1_send()
    proc.phase1_receive(_inbox(1, _pairs_for(sc, 1, {2: b"\x01", 3: b"\x01", 4: b"\x01"})))
    proc.phase2_step(_inbox(1, {2: 1, 3: 1}))
    assert 4 in proc.S0
    assert proc.S0 | proc.S1 == {1, 2, 3, 4} and not proc.S0 & proc.S1


def test_majority_tie_break():
    a, b = (1, 2), (0, 9)
    assert majority([a, b, a, b]) == b
    assert majority([a, a, (5, 5)]) == a


class Snapshot(ConsistencyAttack):
    """The consistency attack, recording honest state after rounds 2 and 3."""

    def __init__(self):
        self.after = {}

    def act(self, ctx):
        if ctx.round in (2, 3, 4):
            self.after[ctx.round] = {i: (p.s, p.w, sum(p.u.values())) for i, p in ctx.honest.items()}
        return super().act(ctx)


def test_worked_consistency_trace():
    setup = consistency_example()
    adv = Snapshot()
    rec = run_ba(setup.inputs, adv, setup.params, faulty=setup.faulty)
    p1, p2 = adv.after[2], adv.after[3]
    assert {i for i, (s, _, _) in p1.items() if s == 0} == set(range(13, 22))
    assert p1[12][0] == 1
    # after masking S0, processor 12 sees at least 19 mismatches
    assert p2[12][0] == 0 and 31 - p2[12][2] >= 19
    assert all(p2[i][1] == setup.expected for i in range(1, 12))
    assert set(rec.outputs.values()) == {setup.expected}
    assert rec.rounds_total == expected_cool_rounds(10)
    assert rec.flags["lemma3_ok"] and rec.flags["phase4_entry_ok"]


def test_equal_inputs_every_strategy():
    p = derive(13, 4, 100)
    m = random_message(random.Random(0), 100)
    for name in STRATEGIES:
        rec = run_ba({i: m for i in range(1, 10)}, make_strategy(name), p, faulty={10, 11, 12, 13})
        assert set(rec.outputs.values()) == {m}, name
        assert rec.rounds_total == expected_cool_rounds(4)
        assert rec.bits["B1"] == 2 * p.c * 13 * 12


def test_distinct_inputs_agree_on_phi():
    p = derive(10, 3, 256)
    rng = random.Random(3)
    inputs = {i: random_message(rng, 256) for i in range(1, 11)}
    rec = run_ba(inputs, None, p)
    assert set(rec.outputs.values()) == {PHI}
    assert rec.rounds_total == expected_cool_rounds(3) - 1
    assert not rec.flags["valid_applicable"] and rec.passed


def test_single_processor():
    p = derive(1, 0, 8)
    rec = run_ba({1: b"\x07"}, None, p)
    assert rec.outputs == {1: b"\x07"}
    assert rec.total_bits == 0


def test_phase4_entry_requires_honest_group():
    # a 5/4 split among 9 honest (t = 4): the bigger group reaches t + 1
    p = derive(13, 4, 64)
    m1, m2 = b"\x01" * 8, b"\x02" * 8
    inputs = {i: (m1 if i <= 5 else m2) for i in range(1, 10)}
    rec = run_ba(inputs, ConsistencyAttack(), p, faulty={10, 11, 12, 13})
    assert rec.flags["consistent"] and rec.flags["phase4_entry_ok"]
    assert set(rec.outputs.values()) <= {m1, PHI}


def test_configuration_errors():
    p = derive(4, 1, 8)
    with pytest.raises(ConfigurationError):
        run_ba({1: b"\x00"}, None, p)
    with pytest.raises(ConfigurationError):
        run_ba({1: b"\x00", 2: b"\x00"}, None, p, faulty={3, 4})
    with pytest.raises(ConfigurationError):
        run_bb(5, b"\x00", None, p)
    with pytest.raises(ConfigurationError):
        run_ba({i: b"\x00\x00" for i in range(1, 5)}, None, p)


def test_bb_honest_leader():
    p = derive(10, 3, 64)
    m = b"\xab" * 8
    for name in STRATEGIES:
        rec = run_bb(1, m, make_strategy(name), p, faulty={8, 9, 10})
        assert set(rec.outputs.values()) == {m}
        assert rec.bits["leader_bits"] == 9 * 64
        assert rec.rounds_total == expected_cool_rounds(3, broadcast=True)


def test_bb_split_leader_consistent():
    p = derive(10, 3, 64)
    for seed in range(10):
        rec = run_bb(10, None, SplitLeader(RandomAdversary()), p, faulty={8, 9, 10}, seed=seed)
        assert rec.flags["consistent"] and not rec.flags["valid_applicable"]
        assert rec.bits["leader_bits"] == 9 * 64


def test_bb_silent_leader_defaults_to_zero_message():
    p = derive(4, 1, 16)
    rec = run_bb(4, None, Strategy(), p, faulty={4})
    assert set(rec.outputs.values()) == {b"\x00\x00"}


def test_committee_all_honest_equal():
    p = derive(100, 2, 64)
    m = b"\x42" * 8
    rec = run_ba_committee({i: m for i in range(1, 101)}, None, p)
    assert len(rec.outputs) == 100 and set(rec.outputs.values()) == {m}
    assert rec.bits["dissemination_bits"] == 7 * 93 * 64
    assert rec.committee == tuple(range(1, 8))
    assert rec.rounds_total == expected_cool_rounds(2, committee=True)


def test_committee_tolerates_corrupt_members():
    p = derive(40, 2, 64)
    m = b"\x42" * 8
    for name in STRATEGIES:
        honest = [i for i in range(1, 41) if i not in (2, 5)]
        rec = run_ba_committee({i: m for i in honest}, make_strategy(name), p, faulty={2, 5}, seed=3)
        assert set(rec.outputs.values()) == {m}, name


def test_committee_seeded_and_degenerate():
    p = derive(30, 2, 64)
    m = b"\x01" * 8
    rec = run_ba_committee({i: m for i in range(1, 31)}, None, p, committee_seed=4)
    assert len(rec.committee) == 7 and set(rec.outputs.values()) == {m}
    p0 = derive(5, 0, 8)
    rec0 = run_ba_committee({i: b"\x09" for i in range(1, 6)}, None, p0)
    assert rec0.committee == (1,) and set(rec0.outputs.values()) == {b"\x09"}
    assert rec0.bits["dissemination_bits"] == 4 * p0.c


def test_committee_outsider_sees_phi():
    p = derive(30, 2, 64)
    rng = random.Random(1)
    inputs = {i: random_message(rng, 64) for i in range(1, 31)}
    rec = run_ba_committee(inputs, None, p)
    assert set(rec.outputs.values()) == {PHI} and rec.passed


def test_runs_are_reproducible():
    p = derive(13, 4, 64)
    rng = random.Random(2)
    inputs = {i: random_message(rng, 64) for i in range(1, 10)}
    a = run_ba(inputs, RandomAdversary(), p, faulty={10, 11, 12, 13}, seed=9)
    b = run_ba(inputs, RandomAdversary(), p, faulty={10, 11, 12, 13}, seed=9)
    assert a.to_json() == b.to_json()
