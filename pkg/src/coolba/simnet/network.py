"""Synchronous round engine with private channels and a rushing adversary.

Messages sent in round ``r`` are delivered at the start of round ``r + 1``.
Each round carries one :class:`Slot` of the protocol schedule, which fixes
the message kind on the wire and its frame size. Faulty processors are not
simulated; the adversary emits raw messages on their behalf after reading
every honest message of the round.

Bit accounting works on frames. In a *fixed* slot every listed sender owes
one frame to every recipient (the coded-pair exchange, the first indicator
broadcast, the one-bit consensus rounds, the leader's send), so the slot is
charged in full whether a faulty sender fills its frames or stays silent; a
receiver reads silence as a garbled frame. Optional slots are charged per
frame actually delivered.
"""

import enum
import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field

from ..errors import InvariantViolation


class Kind(enum.Enum):
    CODED_PAIR = "CodedPair"
    SUCCESS_BIT = "SuccessBit"
    OBC_PAYLOAD = "ObcPayload"
    PHASE4_SYMBOL = "Phase4Symbol"
    LEADER_INIT = "LeaderInit"
    DISSEMINATION = "Dissemination"


@dataclass(frozen=True, slots=True)
class ProtocolMessage:
    kind: Kind
    sender: int
    to: int | None  # None: every other recipient of the slot
    payload: object
    bit_size: int


@dataclass(frozen=True)
class Slot:
    """What the wire carries in one round."""

    label: str
    kind: Kind
    frame_bits: int
    meter: str
    recipients: tuple
    fixed: bool = False
    senders: tuple = ()
    phase: int | None = None  # one-bit consensus phase, 1-based
    subround: int | None = None  # 1 value, 2 proposal, 3 king
    king: int | None = None

    def fixed_charge(self):
        rs = set(self.recipients)
        return sum(len(rs - {s}) for s in self.senders) * self.frame_bits


class _SharedRound:
    __slots__ = ("broadcasts", "_counts")

    def __init__(self):
        self.broadcasts = {}
        self._counts = None

    def counts(self):
        if self._counts is None:
            self._counts = Counter(self.broadcasts.values())
        return self._counts


class Inbox:
    """Frames delivered to one processor at the start of a round.

    Lookup is by sender id; a private frame from a sender overrides its
    broadcast. A processor never sees its own frames.
    """

    __slots__ = ("owner", "_shared", "_direct")

    def __init__(self, owner, shared=None, direct=None):
        self.owner = owner
        self._shared = shared if shared is not None else _SharedRound()
        self._direct = direct if direct is not None else {}

    def get(self, sender, default=None):
        if sender == self.owner:
            return default
        if sender in self._direct:
            return self._direct[sender]
        return self._shared.broadcasts.get(sender, default)

    def senders(self):
        out = set(self._shared.broadcasts) | set(self._direct)
        out.discard(self.owner)
        return out

    def items(self):
        for s in sorted(self.senders()):
            yield s, self.get(s)

    def tally(self):
        """Counter of payload values over all senders but the owner."""
        counts = self._shared.counts().copy()
        b = self._shared.broadcasts
        if self.owner in b:
            counts[b[self.owner]] -= 1
        for s, p in self._direct.items():
            if s == self.owner:
                continue
            if s in b:
                counts[b[s]] -= 1
            counts[p] += 1
        return +counts

    def __len__(self):
        return len(self.senders())


@dataclass
class AdversaryContext:
    """Everything the full-information adversary may read in one round."""

    round: int
    slot: Slot
    faulty: frozenset
    honest: dict  # id -> processor state machine (read-only by convention)
    pending: tuple  # honest messages of this round
    rng: object
    scenario: object = None

    def message(self, sender, to, payload):
        """A frame of the current slot from faulty ``sender``."""
        return ProtocolMessage(self.slot.kind, sender, to, payload, self.slot.frame_bits)

    def honest_recipients(self, sender=None):
        return [r for r in self.slot.recipients if r not in self.faulty and r != sender]


def _payload_digest(payload):
    return hashlib.sha256(repr(payload).encode()).hexdigest()[:16]


@dataclass
class Transcript:
    rounds: int = 0
    terminated: bool = False
    bits: Counter = field(default_factory=Counter)
    honest_bits: Counter = field(default_factory=Counter)
    dropped: int = 0
    records: list | None = None

    def lines(self):
        """Line-delimited JSON audit records (needs ``record=True``)."""
        for rec in self.records or ():
            yield json.dumps(rec, sort_keys=True)

    def write(self, path):
        with open(path, "w") as fh:
            for line in self.lines():
                fh.write(line + "\n")

    def digest(self):
        h = hashlib.sha256()
        for line in self.lines():
            h.update(line.encode())
        return h.hexdigest()


def _hashable(payload):
    try:
        hash(payload)
    except TypeError:
        return False
    return True


def run_rounds(nodes, adversary, schedule, *, faulty=frozenset(), round_limit=100,
               rng=None, scenario=None, record=False, on_round=None):
    """Drive honest state machines round by round until all are done.

    ``nodes`` maps honest ids to objects with ``step(round, inbox)`` returning
    a list of :class:`ProtocolMessage` and a boolean ``done`` attribute.
    ``schedule(round)`` returns the round's :class:`Slot` or None when nothing
    is sent. Exceeding ``round_limit`` marks the transcript not terminated.
    """
    faulty = frozenset(faulty)
    tr = Transcript(records=[] if record else None)
    inboxes = {i: Inbox(i) for i in nodes}
    order = sorted(nodes)

    for rnd in range(1, round_limit + 1):
        slot = schedule(rnd)
        honest_out = []
        for i in order:
            node = nodes[i]
            if not node.done:
                honest_out.extend(node.step(rnd, inboxes[i]))
        if honest_out and slot is None:
            raise InvariantViolation(f"round {rnd}: honest messages outside the schedule")

        shared = _SharedRound()
        direct = {i: {} for i in nodes}
        if slot is not None:
            recips = set(slot.recipients)
            for msg in honest_out:
                if msg.kind is not slot.kind or msg.sender in faulty:
                    raise InvariantViolation(f"round {rnd}: honest message {msg.kind} in slot {slot.label}")
                if msg.to is None:
                    targets = recips - {msg.sender}
                    shared.broadcasts[msg.sender] = msg.payload
                else:
                    targets = (msg.to,)
                    if msg.to in direct:
                        direct[msg.to][msg.sender] = msg.payload
                tr.honest_bits[slot.meter] += msg.bit_size * len(targets)
                if not slot.fixed:
                    tr.bits[slot.meter] += msg.bit_size * len(targets)
                if record:
                    for r in sorted(targets):
                        tr.records.append(_record(rnd, msg.sender, r, slot, msg.bit_size, msg.payload))

            adv = []
            if faulty and adversary is not None:
                ctx = AdversaryContext(rnd, slot, faulty, nodes, tuple(honest_out), rng, scenario)
                adv = adversary.act(ctx) or ()
            seen = set()
            for msg in adv:
                if (msg.kind is not slot.kind or msg.sender not in faulty
                        or (slot.senders and msg.sender not in slot.senders)
                        or not _hashable(msg.payload)):
                    tr.dropped += 1
                    continue
                targets = sorted(recips - {msg.sender}) if msg.to is None else (msg.to,)
                for r in targets:
                    if r not in recips or r == msg.sender or (msg.sender, r) in seen:
                        tr.dropped += 1
                        continue
                    seen.add((msg.sender, r))
                    if r in faulty:
                        continue
                    direct[r][msg.sender] = msg.payload
                    if not slot.fixed:
                        tr.bits[slot.meter] += slot.frame_bits
                    if record:
                        tr.records.append(_record(rnd, msg.sender, r, slot, slot.frame_bits, msg.payload))
            if slot.fixed:
                tr.bits[slot.meter] += slot.fixed_charge()

        inboxes = {i: Inbox(i, shared, direct[i]) for i in nodes}
        if on_round is not None:
            on_round(rnd)
        if all(nodes[i].done for i in order):
            tr.rounds = rnd
            tr.terminated = True
            break
    else:
        tr.rounds = round_limit
    return tr


def _record(rnd, sender, to, slot, bits, payload):
    return {
        "round": rnd,
        "from": sender,
        "to": to,
        "kind": slot.kind.value,
        "slot": slot.label,
        "bit_size": bits,
        "payload": _payload_digest(payload),
    }
