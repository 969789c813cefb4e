"""COOL: per-processor state machine and execution drivers.

Round layout of one COOL execution (BB runs shift everything by one round,
committee runs append one dissemination round):

====  ==========================================================
1     send coded pairs ``(y_j, y_i)``
2     link indicators, success indicator, broadcast ``s_i``
3     build S1/S0, mask, broadcast 1->0 transitions
4     update sets, mask again, broadcast 1->0 transitions
5     update sets, vote, start one-bit consensus on the votes
...   3(t+1) consensus rounds
+1    consensus result; 0 -> output PHI; 1 -> S0 members send
      majority-corrected own symbols to S0
+2    S0 members decode, everybody outputs
====  ==========================================================
"""

import random
from collections import Counter
from dataclasses import dataclass, field

from . import codec
from .errors import ConfigurationError, DecodeFailure, InvariantViolation
from .metrics import RunRecord, bits_from_meters
from .onebit import PhaseKing, obc_rounds, obc_slot
from .params import committee_params
from .simnet.network import Kind, ProtocolMessage, Slot, run_rounds
from .values import PHI


@dataclass
class Scenario:
    """Static description of one execution, readable by the adversary."""

    mode: str
    params: object  # CodeParams over the COOL participants
    n: int  # whole network
    members: tuple  # COOL participants in label order
    faulty: frozenset
    leader: int | None = None
    offset: int = 0  # rounds before the coded-pair exchange
    obc_factory: object = PhaseKing
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        self.labels = {pid: pos + 1 for pos, pid in enumerate(self.members)}

    @property
    def t(self):
        return self.params.t

    @property
    def honest(self):
        return [i for i in range(1, self.n + 1) if i not in self.faulty]

    def label(self, pid):
        return self.labels[pid]

    def block(self, message):
        return codec.stripe(message, self.params)

    def symbols(self, message):
        """Codeword of ``message``; entry ``label - 1`` is that label's symbol."""
        return codec.encode_all(self.block(message), len(self.members), self.params.w)

    def symbol(self, message, pid):
        return self.symbols(message)[self.labels[pid] - 1]

    # round bookkeeping
    @property
    def obc_start(self):
        return self.offset + 5

    @property
    def p4_round(self):
        return self.obc_start + obc_rounds(self.t)

    @property
    def dissemination_round(self):
        return self.p4_round + 1

    def schedule(self, rnd):
        p, m = self.params, self.members
        r = rnd - self.offset
        if self.mode == "bb" and rnd == 1:
            recips = tuple(i for i in range(1, self.n + 1))
            return Slot("leader", Kind.LEADER_INIT, p.ell, "leader", recips,
                        fixed=True, senders=(self.leader,))
        if r == 1:
            return Slot("pairs", Kind.CODED_PAIR, 2 * p.c, "B1", m, fixed=True, senders=m)
        if r == 2:
            return Slot("s1", Kind.SUCCESS_BIT, 1, "B2", m, fixed=True, senders=m)
        if r == 3:
            return Slot("s2", Kind.SUCCESS_BIT, 1, "B3", m)
        if r == 4:
            return Slot("s3", Kind.SUCCESS_BIT, 1, "B4", m)
        if self.obc_start <= rnd < self.p4_round:
            return obc_slot(m, p.t, rnd - self.obc_start)
        if rnd == self.p4_round:
            return Slot("p4", Kind.PHASE4_SYMBOL, p.c, "B6", m)
        if self.mode == "ba-committee" and rnd == self.dissemination_round:
            outsiders = tuple(i for i in range(1, self.n + 1) if i not in self.labels)
            return Slot("dissem", Kind.DISSEMINATION, p.c, "dissemination", outsiders,
                        fixed=True, senders=m)
        return None


def _valid_symbol(x, m, size):
    return (type(x) is tuple and len(x) == m
            and all(type(v) is int and 0 <= v < size for v in x))


def majority(values):
    """Most frequent value; ties go to the smallest."""
    counts = Counter(values)
    top = max(counts.values())
    return min(v for v, c in counts.items() if c == top)


class Processor:
    """One honest COOL participant.

    Phases: ``INIT`` (broadcast only), ``P1a``, ``P1b``, ``P2``, ``P3``,
    ``VOTE``, ``OBC``, ``P4b``, ``DISSEM`` (committee only), ``DONE``.
    """

    def __init__(self, pid, scenario, initial=None):
        self.id = pid
        self.sc = scenario
        self.params = p = scenario.params
        self.n = len(scenario.members)
        self.t = p.t
        self.fsize = 1 << p.w
        self.initial = initial
        self.w = initial
        self.own_symbols = None
        self.received_pairs = {}
        self.u = {}
        self.s = None
        self.S1 = set()
        self.S0 = set()
        self.vote = None
        self.obc = None
        self.obc_result = None
        self.y_self = None
        self.output = None
        self.phase = "INIT" if scenario.mode == "bb" else "P1a"

    @property
    def done(self):
        return self.phase == "DONE"

    def _msg(self, kind, to, payload, bits):
        return ProtocolMessage(kind, self.id, to, payload, bits)

    # Phase 1
    def phase1_send(self):
        if self.initial is None:
            raise ConfigurationError(f"processor {self.id} has no initial message")
        sc = self.sc
        self.own_symbols = sc.symbols(self.initial)
        mine = self.own_symbols[sc.label(self.id) - 1]
        out = [self._msg(Kind.CODED_PAIR, j, (self.own_symbols[sc.label(j) - 1], mine), 2 * self.params.c)
               for j in sc.members if j != self.id]
        self.phase = "P1b"
        return out

    def phase1_receive(self, pairs):
        """Link indicators, success indicator; returns the s_i broadcast."""
        sc = self.sc
        mine = self.own_symbols[sc.label(self.id) - 1]
        for j in sc.members:
            if j == self.id:
                self.u[j] = 1
                continue
            pair = pairs.get(j)
            self.received_pairs[j] = pair
            self.u[j] = int(pair == (mine, self.own_symbols[sc.label(j) - 1]))
        self.s = int(sum(self.u.values()) >= self.n - self.t)
        if not self.s:
            self.w = PHI
        self.phase = "P2"
        return [self._msg(Kind.SUCCESS_BIT, None, self.s, 1)]

    def _build_sets(self, indicators):
        self.S1 = {self.id} if self.s else set()
        for j in self.sc.members:
            if j != self.id and indicators.get(j) == 1:
                self.S1.add(j)
        self.S0 = set(self.sc.members) - self.S1

    def _apply_zeros(self, indicators):
        for j in list(self.S1):
            if j != self.id and indicators.get(j) == 0:
                self.S1.discard(j)
                self.S0.add(j)

    def _mask_and_update(self):
        if not self.s:
            return []
        for j in self.S0:
            self.u[j] = 0
        if sum(self.u.values()) >= self.n - self.t:
            return []
        self.s = 0
        self.w = PHI
        self.S1.discard(self.id)
        self.S0.add(self.id)
        return [self._msg(Kind.SUCCESS_BIT, None, 0, 1)]

    # Phases 2 and 3
    def phase2_step(self, indicators):
        """Build S1/S0 from the Phase-1 indicators, then mask and recheck."""
        self._build_sets(indicators)
        self.phase = "P3"
        return self._mask_and_update()

    def phase3_step(self, zero_announcements):
        self._apply_zeros(zero_announcements)
        self.phase = "VOTE"
        return self._mask_and_update()

    def cast_vote(self, zero_announcements):
        self._apply_zeros(zero_announcements)
        self.vote = int(len(self.S1) >= 2 * self.t + 1)
        self.obc = self.sc.obc_factory(self.id, self.sc.members, self.t)
        self.phase = "OBC"
        return self.obc.init(self.vote)

    def phase3_decide(self, obc_result):
        self.obc_result = obc_result
        if not obc_result:
            self.w = PHI
            self._finish()
            return []
        return self.phase4_update()

    # Phase 4
    def phase4_update(self):
        self.phase = "P4b"
        if self.s:
            return []
        m = self.params.m
        candidates = []
        for j in self.S1:
            pair = self.received_pairs.get(j)
            if type(pair) is tuple and len(pair) == 2 and _valid_symbol(pair[0], m, self.fsize):
                candidates.append(pair[0])
        if candidates:
            self.y_self = majority(candidates)
        else:
            self.y_self = self.own_symbols[self.sc.label(self.id) - 1]
        return [self._msg(Kind.PHASE4_SYMBOL, j, self.y_self, self.params.c)
                for j in sorted(self.S0) if j != self.id]

    def phase4_decode(self, s0_symbols):
        if not self.s:
            p, sc = self.params, self.sc
            zero = codec.zero_symbol(p.m)
            obs = []
            for j in sc.members:
                if j == self.id:
                    y = self.y_self
                elif j in self.S1:
                    pair = self.received_pairs.get(j)
                    y = pair[1] if type(pair) is tuple and len(pair) == 2 else None
                else:
                    y = s0_symbols.get(j)
                if not _valid_symbol(y, p.m, self.fsize):
                    y = zero
                obs.append((sc.label(j), y))
            try:
                block = codec.decode(obs, p.k, self.t, p.w)
            except DecodeFailure as exc:
                raise InvariantViolation(f"processor {self.id}: Phase-4 decoding failed ({exc})") from exc
            self.w = codec.unstripe(block, p)
        self._finish()
        if self.phase == "DISSEM":
            # dissemination shares the decoding round
            return self.dissemination()
        return []

    def _finish(self):
        self.output = self.w
        self.phase = "DISSEM" if self.sc.mode == "ba-committee" else "DONE"

    def dissemination(self):
        if self.w is PHI:
            payload = PHI
        else:
            payload = self.sc.symbol(self.w, self.id)
        self.phase = "DONE"
        return [self._msg(Kind.DISSEMINATION, None, payload, self.params.c)]

    def step(self, rnd, inbox):
        ph = self.phase
        if ph == "INIT":
            # Byzantine broadcast: the leader's frame becomes the initial message
            if self.id == self.sc.leader:
                self.phase = "P1a"
                return [self._msg(Kind.LEADER_INIT, None, self.initial, self.params.ell)]
            self.phase = "P1a"
            return []
        if ph == "P1a":
            if self.sc.mode == "bb" and self.id != self.sc.leader:
                self.initial = self.w = _leader_value(inbox.get(self.sc.leader), self.params.ell)
            return self.phase1_send()
        if ph == "P1b":
            return self.phase1_receive(inbox)
        if ph == "P2":
            return self.phase2_step(inbox)
        if ph == "P3":
            return self.phase3_step(inbox)
        if ph == "VOTE":
            return self.cast_vote(inbox)
        if ph == "OBC":
            out = self.obc.step(inbox)
            if self.obc.done:
                return self.phase3_decide(self.obc.output())
            return out
        if ph == "P4b":
            return self.phase4_decode(inbox)
        if ph == "DISSEM":
            if rnd == self.sc.dissemination_round:
                return self.dissemination()
            return []
        raise InvariantViolation(f"processor {self.id} stepped in phase {ph}")


def _leader_value(frame, ell):
    try:
        codec.message_to_int(frame, ell)
    except (TypeError, ValueError):
        return bytes(codec.message_bytes(ell))
    return frame


class Outsider:
    """Non-committee processor: waits, then decodes the committee's symbols."""

    def __init__(self, pid, scenario):
        self.id = pid
        self.sc = scenario
        self.output = None
        self.phase = "WAIT"
        self.initial = None

    @property
    def done(self):
        return self.phase == "DONE"

    def step(self, rnd, inbox):
        if rnd <= self.sc.dissemination_round:
            return []
        p, sc = self.params, self.sc
        frames = {j: inbox.get(j) for j in sc.members}
        if sum(1 for f in frames.values() if f is PHI) > p.t:
            self.output = PHI
        else:
            zero = codec.zero_symbol(p.m)
            size = 1 << p.w
            obs = [(sc.label(j), f if _valid_symbol(f, p.m, size) else zero) for j, f in frames.items()]
            try:
                block = codec.decode(obs, p.k, p.t, p.w)
            except DecodeFailure as exc:
                raise InvariantViolation(f"outsider {self.id}: dissemination decoding failed ({exc})") from exc
            self.output = codec.unstripe(block, p)
        self.phase = "DONE"
        return []

    @property
    def params(self):
        return self.sc.params


class _Checks:
    """Runtime invariants asserted during a run."""

    def __init__(self, scenario, nodes):
        self.sc = scenario
        self.members = [nodes[i] for i in scenario.members if i in nodes]
        self.lemma3_ok = True
        self.phase4_entry_ok = True
        self.entered_phase4 = False

    def __call__(self, rnd):
        sc = self.sc
        if rnd == sc.offset + 4:
            values = {p.w for p in self.members if p.w is not PHI}
            self.lemma3_ok = len(values) <= 1
            for p in self.members:
                if (p.s == 0) != (p.w is PHI):
                    raise InvariantViolation(f"processor {p.id}: s={p.s} but w={p.w!r}")
        if rnd == sc.p4_round and any(p.phase == "P4b" for p in self.members):
            self.entered_phase4 = True
            counts = Counter(p.w for p in self.members if p.w is not PHI)
            self.phase4_entry_ok = bool(counts) and max(counts.values()) >= sc.t + 1


def _strategy_name(adversary):
    return getattr(adversary, "name", type(adversary).__name__ if adversary else "none")


def _execute(sc, nodes, adversary, seed, record, round_limit, strategy):
    checks = _Checks(sc, nodes)
    limit = round_limit or 20 * (sc.t + 2)
    tr = run_rounds(nodes, adversary, sc.schedule, faulty=sc.faulty, round_limit=limit,
                    rng=random.Random(seed), scenario=sc, record=record, on_round=checks)
    outputs = {i: nodes[i].output for i in sorted(nodes) if nodes[i].done}
    distinct = set(outputs.values())
    flags = {
        "terminated": tr.terminated and len(outputs) == len(nodes),
        "consistent": len(distinct) <= 1 and len(outputs) == len(nodes),
        "lemma3_ok": checks.lemma3_ok,
        "phase4_entry_ok": checks.phase4_entry_ok,
    }
    return tr, outputs, flags


def _record(sc, tr, outputs, flags, adversary, seed):
    return RunRecord(
        mode=sc.mode, n=sc.n, t=sc.t, ell=sc.params.ell, rounds_total=tr.rounds,
        bits=bits_from_meters(tr.bits), honest_bits=bits_from_meters(tr.honest_bits),
        outputs=outputs, flags=flags, strategy=_strategy_name(adversary), seed=seed,
        faulty=tuple(sorted(sc.faulty)),
        committee=sc.members if sc.mode == "ba-committee" else None,
        transcript=tr)


def _check_faulty(faulty, n, t):
    faulty = frozenset(faulty)
    if len(faulty) > t:
        raise ConfigurationError(f"{len(faulty)} faulty ids exceed t={t}")
    if not faulty <= set(range(1, n + 1)):
        raise ConfigurationError("faulty ids must lie in [1:n]")
    return faulty


def run_ba(inputs, adversary, params, *, faulty=(), seed=0, record=False,
           round_limit=None, obc_factory=PhaseKing):
    """Byzantine agreement among ``params.n`` processors.

    ``inputs`` maps (at least) every honest id to its initial message.
    """
    n = params.n
    faulty = _check_faulty(faulty, n, params.t)
    members = tuple(range(1, n + 1))
    sc = Scenario("ba", params, n, members, faulty, obc_factory=obc_factory)
    honest = sc.honest
    missing = [i for i in honest if i not in inputs]
    if missing:
        raise ConfigurationError(f"no initial message for honest ids {missing}")
    nodes = {i: Processor(i, sc, inputs[i]) for i in honest}
    tr, outputs, flags = _execute(sc, nodes, adversary, seed, record, round_limit, None)
    honest_inputs = {inputs[i] for i in honest}
    flags["valid_applicable"] = len(honest_inputs) == 1
    flags["valid_holds"] = (not flags["valid_applicable"]) or (
        flags["consistent"] and set(outputs.values()) <= honest_inputs)
    return _record(sc, tr, outputs, flags, adversary, seed)


def run_bb(leader, leader_value, adversary, params, *, faulty=(), seed=0, record=False,
           round_limit=None, obc_factory=PhaseKing):
    """Byzantine broadcast from ``leader``; one extra round for the leader's send.

    ``leader_value`` is ignored when the leader is faulty (the adversary then
    decides what each processor receives).
    """
    n = params.n
    faulty = _check_faulty(faulty, n, params.t)
    if not 1 <= leader <= n:
        raise ConfigurationError(f"leader {leader} outside [1:{n}]")
    sc = Scenario("bb", params, n, tuple(range(1, n + 1)), faulty, leader=leader, offset=1,
                  obc_factory=obc_factory)
    honest_leader = leader not in faulty
    if honest_leader:
        codec.message_to_int(leader_value, params.ell)
    nodes = {i: Processor(i, sc, leader_value if i == leader else None) for i in sc.honest}
    tr, outputs, flags = _execute(sc, nodes, adversary, seed, record,
                                  (round_limit or 20 * (params.t + 2)) + 1, None)
    flags["valid_applicable"] = honest_leader
    flags["valid_holds"] = (not honest_leader) or (
        flags["consistent"] and set(outputs.values()) <= {leader_value})
    return _record(sc, tr, outputs, flags, adversary, seed)


def run_ba_committee(inputs, adversary, params, *, faulty=(), seed=0, committee_seed=None,
                     record=False, round_limit=None, obc_factory=PhaseKing):
    """Small-t variant: COOL inside a 3t+1 committee, then coded dissemination.

    ``params`` describes the whole network (``params.n > 3t + 1``); the
    committee runs with parameters re-derived for ``n' = 3t + 1``.
    """
    n, t = params.n, params.t
    faulty = _check_faulty(faulty, n, t)
    committee, cparams = committee_params(n, t, params.ell, params.w, committee_seed)
    sc = Scenario("ba-committee", cparams, n, committee, faulty, obc_factory=obc_factory)
    honest = sc.honest
    missing = [i for i in honest if i in sc.labels and i not in inputs]
    if missing:
        raise ConfigurationError(f"no initial message for honest committee ids {missing}")
    nodes = {i: Processor(i, sc, inputs[i]) if i in sc.labels else Outsider(i, sc) for i in honest}
    tr, outputs, flags = _execute(sc, nodes, adversary, seed, record,
                                  (round_limit or 20 * (t + 2)) + 1, None)
    honest_inputs = {inputs[i] for i in honest if i in inputs}
    flags["valid_applicable"] = len(honest_inputs) == 1 and all(i in inputs for i in honest)
    flags["valid_holds"] = (not flags["valid_applicable"]) or (
        flags["consistent"] and set(outputs.values()) <= honest_inputs)
    return _record(sc, tr, outputs, flags, adversary, seed)
