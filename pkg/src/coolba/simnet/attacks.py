"""Byzantine strategies and the colliding-message construction.

A strategy is any object with ``act(ctx) -> iterable of ProtocolMessage``;
it is called once per scheduled round after every honest message of that
round is known. :class:`Strategy` dispatches on the slot kind so subclasses
only override the rounds they care about.
"""

import itertools

from .. import codec
from ..errors import ConfigurationError
from ..field import get_field
from ..onebit import NO_BIT
from ..values import PHI
from .network import Kind


def _null_vector(gf, rows, width):
    """A nonzero ``x`` with ``row . x = 0`` for every row, or None."""
    a = [list(r) for r in rows]
    pivots = []
    r = 0
    for col in range(width):
        piv = next((i for i in range(r, len(a)) if a[i][col]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = gf.inv(a[r][col])
        a[r] = [gf.mul(inv, v) for v in a[r]]
        for i in range(len(a)):
            if i != r and a[i][col]:
                f = a[i][col]
                a[i] = [v ^ gf.mul(f, pv) for v, pv in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
    free = [c for c in range(width) if c not in pivots]
    if not free:
        return None
    x = [0] * width
    x[free[0]] = 1
    for i, col in enumerate(pivots):
        x[col] = a[i][free[0]]  # char 2: -v == v
    return x


def craft_colliding_messages(params, collision_ids, base):
    """Return ``(base, M2)`` with ``M2 != base`` encoding identically at every id.

    The difference lives in stripe 0 of the columns lying wholly inside the
    message bits, so ``M2`` is still a valid ``ell``-bit message.
    """
    ids = sorted(set(collision_ids))
    k, w, c = params.k, params.w, params.c
    if len(ids) >= k:
        raise ConfigurationError(f"{len(ids)} collision ids leave no null space for k={k}")
    if any(not 1 <= i <= params.n for i in ids):
        raise ConfigurationError("collision ids must be labels in [1:n]")
    value = codec.message_to_int(base, params.ell)
    if not ids:
        return base, codec.message_from_int(value ^ (1 << (params.ell - 1)), params.ell)
    eligible = [j for j in range(k) if j * c + w <= params.ell]
    if len(eligible) <= len(ids):
        raise ConfigurationError(
            f"only {len(eligible)} code columns lie inside the {params.ell}-bit message")
    gf = get_field(w)
    rows = [[codec.lagrange_vector(i, k, w)[j] for j in eligible] for i in ids]
    x = _null_vector(gf, rows, len(eligible))
    block = [list(col) for col in codec.stripe(base, params)]
    for j, d in zip(eligible, x):
        block[j][0] ^= d
    m2 = codec.unstripe(tuple(tuple(col) for col in block), params)
    return base, m2


def _symbol(rng, p):
    return tuple(rng.randrange(1 << p.w) for _ in range(p.m))


def _message(rng, ell):
    return codec.message_from_int(rng.getrandbits(ell), ell)


class Strategy:
    """Silent by default; subclasses override per-slot hooks."""

    name = "silent"

    def act(self, ctx):
        slot = ctx.slot
        hook = {
            Kind.CODED_PAIR: self.pairs,
            Kind.SUCCESS_BIT: self.indicators,
            Kind.OBC_PAYLOAD: self.obc,
            Kind.PHASE4_SYMBOL: self.phase4,
            Kind.LEADER_INIT: self.leader,
            Kind.DISSEMINATION: self.dissemination,
        }[slot.kind]
        return hook(ctx) or []

    def senders(self, ctx):
        allowed = ctx.slot.senders or ctx.slot.recipients
        return [f for f in sorted(ctx.faulty) if f in allowed]

    def pairs(self, ctx):
        return []

    def indicators(self, ctx):
        return []

    def obc(self, ctx):
        return []

    def phase4(self, ctx):
        return []

    def leader(self, ctx):
        return []

    def dissemination(self, ctx):
        return []

    # helpers shared by the concrete strategies
    @staticmethod
    def mirrored_pair(ctx, sender, recipient, message):
        """The pair an honest holder of ``message`` would send."""
        sc = ctx.scenario
        sym = sc.symbols(message)
        return (sym[sc.label(recipient) - 1], sym[sc.label(sender) - 1])

    @staticmethod
    def held(ctx, pid):
        node = ctx.honest[pid]
        return node.initial


SilentAdversary = Strategy


class RandomAdversary(Strategy):
    """Uniformly random well-formed frames to every honest recipient."""

    name = "random"

    def _each(self, ctx, make):
        return [ctx.message(f, r, make(f, r)) for f in self.senders(ctx)
                for r in ctx.honest_recipients(f)]

    def pairs(self, ctx):
        p = ctx.scenario.params
        return self._each(ctx, lambda f, r: (_symbol(ctx.rng, p), _symbol(ctx.rng, p)))

    def indicators(self, ctx):
        return self._each(ctx, lambda f, r: ctx.rng.randrange(2))

    def obc(self, ctx):
        choices = (0, 1, NO_BIT) if ctx.slot.subround == 2 else (0, 1)
        return self._each(ctx, lambda f, r: ctx.rng.choice(choices))

    def phase4(self, ctx):
        p = ctx.scenario.params
        return self._each(ctx, lambda f, r: _symbol(ctx.rng, p))

    def leader(self, ctx):
        ell = ctx.scenario.params.ell
        return self._each(ctx, lambda f, r: _message(ctx.rng, ell))

    def dissemination(self, ctx):
        p = ctx.scenario.params
        return self._each(ctx, lambda f, r: PHI if ctx.rng.random() < 0.3 else _symbol(ctx.rng, p))


class ValidityAttack(Strategy):
    """Coherent forged pairs, contradictory indicators, zero votes.

    Every faulty processor pretends to hold the same forged message, so its
    pairs are consistent among themselves and wrong at every honest checker.
    """

    name = "validity"

    def __init__(self):
        self._forged = None

    def forged(self, ctx):
        if self._forged is None:
            self._forged = _message(ctx.rng, ctx.scenario.params.ell)
        return self._forged

    def pairs(self, ctx):
        m = self.forged(ctx)
        return [ctx.message(f, r, self.mirrored_pair(ctx, f, r, m))
                for f in self.senders(ctx) for r in ctx.honest_recipients(f)]

    def indicators(self, ctx):
        out = []
        for f in self.senders(ctx):
            for r in ctx.honest_recipients(f):
                bit = ctx.rng.randrange(2)
                if ctx.slot.label == "s1" or bit == 0:
                    out.append(ctx.message(f, r, bit))
        return out

    def obc(self, ctx):
        payload = 0
        return [ctx.message(f, None, payload) for f in self.senders(ctx)]

    def phase4(self, ctx):
        p = ctx.scenario.params
        return [ctx.message(f, r, _symbol(ctx.rng, p))
                for f in self.senders(ctx) for r in ctx.honest_recipients(f)]

    def dissemination(self, ctx):
        sc = ctx.scenario
        sym = sc.symbols(self.forged(ctx))
        return [ctx.message(f, None, sym[sc.label(f) - 1]) for f in self.senders(ctx)]


class ConsistencyAttack(Strategy):
    """Tell every honest processor that the faulty ones share its message.

    Each honest ``j`` receives ``(h_j^T w_j, h_f^T w_j)`` from every faulty
    ``f``, so every honest group sees t extra matching links. Faulty
    processors then claim success to everyone and vote 1.
    """

    name = "consistency"

    def pairs(self, ctx):
        return [ctx.message(f, r, self.mirrored_pair(ctx, f, r, self.held(ctx, r)))
                for f in self.senders(ctx) for r in ctx.honest_recipients(f)]

    def indicators(self, ctx):
        if ctx.slot.label == "s1":
            return [ctx.message(f, None, 1) for f in self.senders(ctx)]
        return []

    def obc(self, ctx):
        return [ctx.message(f, None, 1) for f in self.senders(ctx)]

    def phase4(self, ctx):
        # S0 members hear the faulty processors' version of the minority message
        out = []
        sc = ctx.scenario
        for f in self.senders(ctx):
            for r in ctx.honest_recipients(f):
                m = self.held(ctx, r)
                out.append(ctx.message(f, r, sc.symbol(m, f)))
        return out

    def dissemination(self, ctx):
        sc = ctx.scenario
        members = [i for i in sc.members if i in ctx.honest]
        if not members:
            return []
        # the message held by the fewest honest committee members
        counts = {}
        for i in members:
            counts[self.held(ctx, i)] = counts.get(self.held(ctx, i), 0) + 1
        minority = min(counts, key=lambda m: (counts[m], m))
        return [ctx.message(f, None, sc.symbol(minority, f)) for f in self.senders(ctx)]


class IndicatorEquivocator(Strategy):
    """Split every faulty announcement between two halves of the honest set.

    Pairs match their recipient (so links look healthy), success bits and
    consensus frames differ per half, and late 1->0 transitions go to one
    half only, aiming at divergent S1/S0 views.
    """

    name = "equivocate"

    def half(self, ctx, r):
        honest = sorted(i for i in ctx.slot.recipients if i not in ctx.faulty)
        return int(honest.index(r) >= len(honest) // 2) if r in honest else 0

    def pairs(self, ctx):
        return ConsistencyAttack.pairs(self, ctx)

    def indicators(self, ctx):
        out = []
        for f in self.senders(ctx):
            for r in ctx.honest_recipients(f):
                h = self.half(ctx, r)
                if ctx.slot.label == "s1":
                    out.append(ctx.message(f, r, h))
                elif ctx.slot.label == "s2" and h == 1:
                    out.append(ctx.message(f, r, 0))
        return out

    def obc(self, ctx):
        sub = ctx.slot.subround
        out = []
        for f in self.senders(ctx):
            for r in ctx.honest_recipients(f):
                h = self.half(ctx, r)
                payload = NO_BIT if sub == 2 and (f + r) % 3 == 0 else h
                out.append(ctx.message(f, r, payload))
        return out

    def phase4(self, ctx):
        p = ctx.scenario.params
        return [ctx.message(f, r, _symbol(ctx.rng, p))
                for f in self.senders(ctx) for r in ctx.honest_recipients(f)
                if self.half(ctx, r)]

    def dissemination(self, ctx):
        out = []
        for f in self.senders(ctx):
            for r in ctx.honest_recipients(f):
                out.append(ctx.message(f, r, PHI if self.half(ctx, r) else _symbol(ctx.rng, ctx.scenario.params)))
        return out


class SplitLeader(Strategy):
    """A faulty leader sends ``m1`` to one half and ``m2`` to the other.

    Every later round is delegated to ``inner``. Missing values are drawn from
    the run's seeded RNG.
    """

    def __init__(self, inner=None, m1=None, m2=None):
        self.inner = inner if inner is not None else Strategy()
        self.m1, self.m2 = m1, m2
        self.name = f"split-leader+{self.inner.name}"

    def act(self, ctx):
        if ctx.slot.kind is Kind.LEADER_INIT:
            return self.leader(ctx)
        return self.inner.act(ctx)

    def leader(self, ctx):
        sc = ctx.scenario
        if sc.leader not in ctx.faulty:
            return []
        ell = sc.params.ell
        if self.m1 is None:
            self.m1 = _message(ctx.rng, ell)
        if self.m2 is None:
            self.m2 = _message(ctx.rng, ell)
        honest = ctx.honest_recipients(sc.leader)
        cut = len(honest) // 2
        return [ctx.message(sc.leader, r, self.m1 if pos < cut else self.m2)
                for pos, r in enumerate(honest)]


# Scripted one-bit consensus behaviors for exhaustive small cases. Each
# behavior maps (recipient, its current value, sender) to a payload, or
# None for silence.
OBC_BEHAVIORS = {
    "silent": lambda r, v, f: None,
    "zero": lambda r, v, f: 0,
    "one": lambda r, v, f: 1,
    "nobit": lambda r, v, f: NO_BIT,
    "mirror": lambda r, v, f: v,
    "flip": lambda r, v, f: 1 - v,
    "split": lambda r, v, f: int(r > f),
}


class ScriptedObc(Strategy):
    """One behavior per sub-round: (value, proposal, king)."""

    def __init__(self, value="silent", proposal="silent", king="silent"):
        self.script = (value, proposal, king)
        self.name = "obc:" + "/".join(self.script)

    def obc(self, ctx):
        sub = ctx.slot.subround
        behave = OBC_BEHAVIORS[self.script[sub - 1]]
        out = []
        for f in self.senders(ctx):
            for r in ctx.honest_recipients(f):
                machine = getattr(ctx.honest[r], "machine", None) or ctx.honest[r].obc
                v = machine.value if machine is not None and machine.value is not None else 0
                payload = behave(r, v, f)
                if payload is not None:
                    out.append(ctx.message(f, r, payload))
        return out


STRATEGIES = {
    "silent": SilentAdversary,
    "random": RandomAdversary,
    "validity": ValidityAttack,
    "consistency": ConsistencyAttack,
    "equivocate": IndicatorEquivocator,
}


def make_strategy(name):
    """Fresh strategy instance by registry name."""
    try:
        return STRATEGIES[name]()
    except KeyError:
        raise ConfigurationError(f"unknown adversary {name!r}; choose from {sorted(STRATEGIES)}") from None


def scripted_obc_family():
    """Every (value, proposal, king) combination of the scripted behaviors."""
    names = sorted(OBC_BEHAVIORS)
    for combo in itertools.product(names, repeat=3):
        yield ScriptedObc(*combo)
