"""Phase-king binary consensus for n >= 3t + 1.

Each of the ``t + 1`` phases takes three rounds: everyone broadcasts its
value; everyone broadcasts a proposal (a bit seen at least ``n - t`` times,
or no-bit); the phase king broadcasts its value and every processor that did
not see ``n - t`` matching proposals adopts it. Some phase has an honest king,
after which all honest values agree and stay agreed. If all honest processors
start with the same bit, every proposal tally is strong from the first phase
and the bit never changes.

Any object with the same ``init`` / ``step`` / ``output`` surface can replace
:class:`PhaseKing` inside the engine.
"""

import random
from dataclasses import dataclass, field

from .simnet.network import Kind, ProtocolMessage, Slot, run_rounds

NO_BIT = 2
SUBROUND_BITS = {1: 1, 2: 2, 3: 1}  # proposals are ternary on the wire
ROUNDS_PER_PHASE = 3


def obc_rounds(t):
    return ROUNDS_PER_PHASE * (t + 1)


def obc_slot(members, t, index):
    """Slot for the ``index``-th (0-based) one-bit consensus round."""
    phase, sub = divmod(index, ROUNDS_PER_PHASE)
    sub += 1
    king = members[phase % len(members)]
    senders = (king,) if sub == 3 else tuple(members)
    return Slot(f"obc{phase + 1}.{sub}", Kind.OBC_PAYLOAD, SUBROUND_BITS[sub], "obc",
                tuple(members), fixed=True, senders=senders, phase=phase + 1,
                subround=sub, king=king)


def _bit(x):
    return x if x in (0, 1) and type(x) in (int, bool) else None


class PhaseKing:
    """One processor's phase-king state machine."""

    def __init__(self, me, members, t):
        self.me = me
        self.members = tuple(members)
        self.n = len(self.members)
        self.t = t
        self.value = None
        self.proposal = None
        self.strong = False
        self.sent = 0  # rounds sent so far
        self.done = False

    def _out(self, payload):
        sub = self.sent % ROUNDS_PER_PHASE + 1
        self.sent += 1
        return [ProtocolMessage(Kind.OBC_PAYLOAD, self.me, None, payload, SUBROUND_BITS[sub])]

    def king(self, phase):
        return self.members[(phase - 1) % self.n]

    def init(self, bit):
        self.value = 1 if bit else 0
        return self._out(self.value)

    def step(self, inbox):
        """Consume the previous round's frames; return this round's messages."""
        phase, sub = divmod(self.sent - 1, ROUNDS_PER_PHASE)
        phase += 1
        sub += 1
        if sub == 1:
            counts = {0: 0, 1: 0, self.value: 1}
            for payload, c in inbox.tally().items():
                b = _bit(payload)
                if b is not None:
                    counts[b] += c
            quorum = self.n - self.t
            self.proposal = next((b for b in (0, 1) if counts[b] >= quorum), NO_BIT)
            return self._out(self.proposal)
        if sub == 2:
            counts = {0: 0, 1: 0}
            if self.proposal != NO_BIT:
                counts[self.proposal] += 1
            for payload, c in inbox.tally().items():
                b = _bit(payload)
                if b is not None:
                    counts[b] += c
            best = 1 if counts[1] > counts[0] else 0
            if counts[best] > self.t:
                self.value = best
            self.strong = counts[best] >= self.n - self.t
            if self.me == self.king(phase):
                return self._out(self.value)
            self.sent += 1
            return []
        king = self.king(phase)
        king_bit = self.value if king == self.me else _bit(inbox.get(king))
        if not self.strong:
            self.value = king_bit if king_bit is not None else 0
        if phase == self.t + 1:
            self.done = True
            return []
        return self._out(self.value)

    def output(self):
        if not self.done:
            raise RuntimeError("one-bit consensus has not finished")
        return self.value


class _ObcNode:
    def __init__(self, machine, initial):
        self.machine = machine
        self.initial = initial

    @property
    def done(self):
        return self.machine.done

    def step(self, rnd, inbox):
        if rnd == 1:
            return self.machine.init(self.initial)
        return self.machine.step(inbox)


@dataclass
class ObcOutcome:
    outputs: dict
    rounds: int
    bits: int
    terminated: bool
    faulty: frozenset = field(default_factory=frozenset)


def obc_run(initials, t, adversary=None, faulty=(), seed=0, factory=PhaseKing):
    """Run stand-alone one-bit consensus.

    ``initials`` maps every honest id to its bit; ``faulty`` lists the ids the
    adversary controls. Members are the union, in id order, so kings rotate
    through ``sorted(members)[:t+1]``.
    """
    faulty = frozenset(faulty)
    members = tuple(sorted(set(initials) | faulty))
    if len(members) < 3 * t + 1:
        raise ValueError(f"one-bit consensus needs n >= 3t+1 (n={len(members)}, t={t})")
    nodes = {i: _ObcNode(factory(i, members, t), b) for i, b in initials.items()}
    total = obc_rounds(t)

    def schedule(rnd):
        return obc_slot(members, t, rnd - 1) if rnd <= total else None

    tr = run_rounds(nodes, adversary, schedule, faulty=faulty, round_limit=total + 2,
                    rng=random.Random(seed))
    outputs = {i: node.machine.output() for i, node in nodes.items() if node.done}
    # the final round only reads the last king frame; nothing is sent in it
    return ObcOutcome(outputs, tr.rounds - 1, tr.bits["obc"], tr.terminated, faulty)
