"""Field arithmetic, the striped code, and decoding through errors."""

import random

from coolba import codec
from coolba.field import get_field
from coolba.params import derive

spacer = "-" * 60

gf = get_field(16)
print("GF(2^16) with modulus", hex(gf.poly), "and generator", gf.generator)
a, b = 0x1234, 0xBEEF
print(f"{a:#x} * {b:#x} = {gf.mul(a, b):#x}")
print(f"inverse of {a:#x} is {gf.inv(a):#x}; check: {gf.mul(a, gf.inv(a))}")

print(spacer)

params = derive(31, 10, 240)
print(f"n=31, t=10, l=240 gives k={params.k} data symbols of {params.c} bits "
      f"({params.m} stripes of {params.w} bits); the code corrects {params.capacity} errors")

rng = random.Random(1)
message = codec.message_from_int(rng.getrandbits(240), 240)
block = codec.stripe(message, params)
symbols = codec.encode_all(block, params.n, params.w)
print("message   ", message.hex())
print("symbol 1  ", symbols[0], "(equals data column 1)")
print("symbol 17 ", symbols[16])

print(spacer)

received = list(enumerate(symbols, start=1))
for pos in rng.sample(range(31), 10):
    received[pos] = (pos + 1, tuple(rng.randrange(1 << 16) for _ in range(params.m)))
print("corrupted 10 of 31 symbols")
decoded = codec.unstripe(codec.decode(received, params.k, 10), params)
print("decoded   ", decoded.hex(), "matches" if decoded == message else "DIFFERS")
