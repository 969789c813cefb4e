"""Binary extension fields GF(2^w) backed by log/antilog tables.

Elements are plain ints in ``[0, 2**w)``. Addition is XOR; multiplication
goes through the tables of a primitive element found at construction.
"""

from functools import lru_cache

# x^4+x+1, x^8+x^4+x^3+x+1, x^16+x^12+x^3+x+1
POLYNOMIALS = {4: 0x13, 8: 0x11B, 16: 0x1100B}
DEFAULT_WIDTH = 16


def _clmul_mod(a, b, poly, w):
    """Shift-and-add multiplication; used only to bootstrap the tables."""
    r = 0
    top = 1 << w
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return r


def _prime_factors(q):
    out, p = [], 2
    while p * p <= q:
        if q % p == 0:
            out.append(p)
            while q % p == 0:
                q //= p
        p += 1
    if q > 1:
        out.append(q)
    return out


def _power(a, e, poly, w):
    r = 1
    while e:
        if e & 1:
            r = _clmul_mod(r, a, poly, w)
        a = _clmul_mod(a, a, poly, w)
        e >>= 1
    return r


class GF:
    """The field GF(2^w) for one of the supported widths."""

    def __init__(self, w=DEFAULT_WIDTH):
        if w not in POLYNOMIALS:
            raise ValueError(f"unsupported field width {w}; choose one of {sorted(POLYNOMIALS)}")
        self.w = w
        self.poly = POLYNOMIALS[w]
        self.size = 1 << w
        self.order = self.size - 1  # multiplicative group order
        self.generator = self._find_generator()
        exp = [0] * (2 * self.order)
        log = [0] * self.size
        x = 1
        for i in range(self.order):
            exp[i] = x
            log[x] = i
            x = _clmul_mod(x, self.generator, self.poly, w)
        for i in range(self.order, 2 * self.order):
            exp[i] = exp[i - self.order]
        self.exp = exp
        self.log = log

    def _find_generator(self):
        factors = _prime_factors(self.order)
        for g in range(2, self.size):
            if all(_power(g, self.order // p, self.poly, self.w) != 1 for p in factors):
                return g
        raise AssertionError("irreducible polynomial has no primitive element")  # pragma: no cover

    def __repr__(self):
        return f"GF(2^{self.w})"

    zero = 0
    one = 1

    def valid(self, a):
        return type(a) is int and 0 <= a < self.size

    def element(self, label):
        """Map an integer label to a field element (binary representation)."""
        if not 0 <= label < self.size:
            raise ValueError(f"label {label} does not fit in {self.w} bits")
        return label

    @staticmethod
    def add(a, b):
        return a ^ b

    sub = add

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return self.exp[self.order - self.log[a]]

    def div(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero in GF(2^w)")
        if a == 0:
            return 0
        return self.exp[self.log[a] - self.log[b] + self.order]

    def pow(self, a, e):
        if e == 0:
            return 1
        if a == 0:
            return 0
        return self.exp[(self.log[a] * e) % self.order]


def get_field(w=DEFAULT_WIDTH):
    """Shared, lazily built field instance for width ``w``."""
    return _field(w)


@lru_cache(maxsize=None)
def _field(w):
    return GF(w)
