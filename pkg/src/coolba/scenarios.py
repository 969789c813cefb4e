"""Ready-made input patterns and the two worked (t=10, n=31) examples."""

import random
from dataclasses import dataclass

from . import codec
from .errors import ConfigurationError
from .params import derive
from .simnet.attacks import ConsistencyAttack, ValidityAttack, craft_colliding_messages


@dataclass
class Setup:
    params: object
    inputs: dict
    faulty: frozenset
    adversary: object
    expected: bytes | None = None  # the value every honest processor must output
    groups: dict | None = None


def random_message(rng, ell):
    return codec.message_from_int(rng.getrandbits(ell), ell)


def all_equal(honest, message):
    return {i: message for i in honest}


def split(params, honest, m1, collision_ids=()):
    """First ``t + 1`` honest ids hold ``m1``, the rest a colliding ``m2``.

    With no collision ids ``m2`` is ``m1`` with its top bit flipped.
    """
    _, m2 = craft_colliding_messages(params, collision_ids, m1)
    cut = params.t + 1
    honest = sorted(honest)
    return {i: (m1 if pos < cut else m2) for pos, i in enumerate(honest)}


def random_inputs(honest, ell, rng):
    return {i: random_message(rng, ell) for i in sorted(honest)}


def parse_input_spec(spec, params, honest, rng):
    """``all-equal[:HEX]``, ``split[:HEX[:ID,ID...]]`` or ``random``.

    Missing messages are drawn from ``rng``. A bare ``split`` collides M2 with
    M1 at the first id of each honest group, as far as the code allows.
    """
    kind, _, rest = spec.partition(":")
    ell = params.ell
    if kind == "all-equal":
        return all_equal(honest, parse_hex(rest, ell) if rest else random_message(rng, ell))
    if kind == "split":
        hex_part, _, ids_part = rest.partition(":")
        m1 = parse_hex(hex_part, ell) if hex_part else random_message(rng, ell)
        if ids_part:
            return split(params, honest, m1, [int(x) for x in ids_part.split(",") if x])
        return split(params, honest, m1, default_collision_ids(params, honest, m1))
    if kind == "random":
        if rest:
            raise ConfigurationError("random takes no argument")
        return random_inputs(honest, ell, rng)
    raise ConfigurationError(f"unknown input spec {spec!r}")


def default_collision_ids(params, honest, m1):
    honest = sorted(honest)
    cut = params.t + 1
    ids = [honest[0]] + honest[cut:cut + 1]
    for size in range(min(len(ids), params.k - 1), -1, -1):
        try:
            craft_colliding_messages(params, ids[:size], m1)
        except ConfigurationError:
            continue
        return ids[:size]
    return []


def parse_hex(text, ell):
    """Hex string to an ``ell``-bit message; short strings are left-padded."""
    try:
        value = int(text, 16)
    except ValueError:
        raise ConfigurationError(f"not a hex message: {text!r}") from None
    return codec.message_from_int(value, ell)


def grid_case(params, seed):
    """Inputs and faulty set for one seeded safety run.

    Seeds cycle through all-equal, split and random inputs; the faulty set is
    a seeded sample of ``t`` ids.
    """
    rng = random.Random(seed)
    n, t, ell = params.n, params.t, params.ell
    faulty = frozenset(rng.sample(range(1, n + 1), t))
    honest = [i for i in range(1, n + 1) if i not in faulty]
    pattern = seed % 3
    m1 = random_message(rng, ell)
    if pattern == 0:
        inputs = all_equal(honest, m1)
    elif pattern == 1:
        ids = []
        if params.k > 1:
            ids = sorted(rng.sample(honest, params.k - 1))
        try:
            inputs = split(params, honest, m1, ids)
        except ConfigurationError:
            inputs = split(params, honest, m1)
    else:
        inputs = random_inputs(honest, ell, rng)
    return inputs, faulty


EX_N, EX_T, EX_L = 31, 10, 240


def _example_message(seed):
    return random_message(random.Random(seed), EX_L)


def consistency_example(seed=0):
    """Honest group A1 = [1:11] holds M1, A2 = [12:21] holds M2, F = [22:31].

    M2 collides with M1 at labels 1 and 12, so processor 12 is fooled in the
    first phase and only corrected in the second.
    """
    params = derive(EX_N, EX_T, EX_L)
    m1 = _example_message(seed)
    _, m2 = craft_colliding_messages(params, {1, 12}, m1)
    a1, a2 = range(1, 12), range(12, 22)
    inputs = {i: m1 for i in a1}
    inputs.update({i: m2 for i in a2})
    return Setup(params, inputs, frozenset(range(22, 32)), ConsistencyAttack(), m1,
                 {"A1": tuple(a1), "A2": tuple(a2), "M2": m2})


def validity_example(seed=0):
    """All 21 honest processors hold M1 while F = [22:31] forges."""
    params = derive(EX_N, EX_T, EX_L)
    m1 = _example_message(seed)
    return Setup(params, {i: m1 for i in range(1, 22)}, frozenset(range(22, 32)),
                 ValidityAttack(), m1)
