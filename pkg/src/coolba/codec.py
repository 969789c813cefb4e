"""Lagrange-interpolation Reed-Solomon code over GF(2^w), striped.

A message block holds ``k`` columns (the data symbols); each column is a
tuple of ``m`` field elements, one per stripe. Symbol ``i`` of the codeword is
``sum_j h_{i,j} * column_j`` taken stripe by stripe, where ``h_{i,j}`` is the
j-th Lagrange basis polynomial over the nodes ``1..k`` evaluated at label
``i``. Equivalently, symbol ``i`` is ``P(i)`` for the unique polynomial of
degree < k with ``P(j) = column_j``.
"""

from functools import lru_cache

from .errors import ConfigurationError, DecodeFailure
from .field import get_field


def message_bytes(ell):
    """Byte length used to carry an ``ell``-bit message."""
    return (ell + 7) // 8


def message_to_int(message, ell):
    value = int.from_bytes(message, "big")
    if len(message) != message_bytes(ell) or value >> ell:
        raise ConfigurationError(f"message does not fit in {ell} bits")
    return value


def message_from_int(value, ell):
    if value < 0 or value >> ell:
        raise ConfigurationError(f"value does not fit in {ell} bits")
    return value.to_bytes(message_bytes(ell), "big")


def zero_symbol(m):
    return (0,) * m


@lru_cache(maxsize=None)
def lagrange_vector(i, k, w=16):
    """Coefficients ``(h_{i,1}, ..., h_{i,k})`` for label ``i``."""
    gf = get_field(w)
    if k < 1:
        raise ConfigurationError("k must be >= 1")
    if not 1 <= i < gf.size or k >= gf.size:
        raise ConfigurationError(f"label {i} (or k={k}) collides in GF(2^{w})")
    if k == 1:
        return (1,)
    x = gf.element(i)
    coeffs = []
    for j in range(1, k + 1):
        num = den = 1
        for p in range(1, k + 1):
            if p == j:
                continue
            num = gf.mul(num, x ^ p)
            den = gf.mul(den, j ^ p)
        coeffs.append(gf.div(num, den))
    return tuple(coeffs)


def encode(block, i, w=16):
    """Code symbol at label ``i`` for a ``k x m`` block."""
    k = len(block)
    if k == 1:
        return tuple(block[0])
    gf = get_field(w)
    exp, log = gf.exp, gf.log
    h = lagrange_vector(i, k, w)
    m = len(block[0])
    out = [0] * m
    for hj, column in zip(h, block):
        if hj == 0:
            continue
        lh = log[hj]
        for s, x in enumerate(column):
            if x:
                out[s] ^= exp[lh + log[x]]
    return tuple(out)


@lru_cache(maxsize=4096)
def encode_all(block, n, w=16):
    """Symbols at labels ``1..n``; index ``j - 1`` holds label ``j``."""
    return tuple(encode(block, j, w) for j in range(1, n + 1))


def stripe(message, params):
    """Zero-pad an ``ell``-bit message to ``k*c`` bits and split it into a block.

    The message occupies the high-order bits; chunk ``j`` (high to low) is
    column ``j`` and each column splits into ``m`` stripes, high-order first.
    """
    value = message_to_int(message, params.ell)
    total = params.padded_bits
    if params.ell > total:
        raise ConfigurationError(f"l={params.ell} exceeds k*c={total}")
    value <<= total - params.ell
    w, m, c = params.w, params.m, params.c
    mask = (1 << w) - 1
    block = []
    for j in range(params.k):
        chunk = (value >> (total - (j + 1) * c)) & ((1 << c) - 1)
        block.append(tuple((chunk >> (c - (s + 1) * w)) & mask for s in range(m)))
    return tuple(block)


def unstripe(block, params):
    """Inverse of :func:`stripe`; padding bits are dropped unchecked."""
    value = 0
    for column in block:
        for x in column:
            value = (value << params.w) | x
    return message_from_int(value >> (params.padded_bits - params.ell), params.ell)


def _poly_eval(gf, coeffs, x):
    acc = 0
    for a in reversed(coeffs):
        acc = gf.mul(acc, x) ^ a
    return acc


def _solve(gf, rows, rhs, ncols):
    """One solution of ``rows @ x = rhs`` over the field, or None if inconsistent."""
    exp, log, order = gf.exp, gf.log, gf.order
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][col]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        shift = order - log[a[r][col]]
        pr = a[r] = [exp[log[v] + shift] if v else 0 for v in a[r]]
        plogs = [log[v] if v else -1 for v in pr]
        for i in range(len(a)):
            row = a[i]
            if i != r and row[col]:
                lf = log[row[col]]
                a[i] = [v ^ exp[lf + lp] if lp >= 0 else v for v, lp in zip(row, plogs)]
        pivots.append(col)
        r += 1
        if r == len(a):
            break
    if any(row[-1] for row in a[r:]):
        return None
    x = [0] * ncols
    for i, col in enumerate(pivots):
        x[col] = a[i][-1]
    return x


def _poly_divmod(gf, num, den):
    num = list(num)
    dd = len(den) - 1
    lead_inv = gf.inv(den[-1])
    quot = [0] * max(1, len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        coef = gf.mul(num[i], lead_inv)
        if coef:
            quot[i - dd] = coef
            for j, d in enumerate(den):
                num[i - dd + j] ^= gf.mul(coef, d)
    return quot, num[:dd]


def _berlekamp_welch(gf, xs, ys, k, e):
    """Coefficients of P (deg < k) agreeing with all but <= e points, or None."""
    nq = e + k
    exp, log, order = gf.exp, gf.log, gf.order
    rows, rhs = [], []
    for x, y in zip(xs, ys):
        lx = log[x]  # labels are nonzero
        powers = [exp[(lx * d) % order] for d in range(nq + 1)]
        if y:
            ly = log[y]
            ey = [exp[ly + log[p]] for p in powers[:e + 1]]
        else:
            ey = [0] * (e + 1)
        rows.append(powers[:nq] + ey[:e])
        rhs.append(ey[e])
    sol = _solve(gf, rows, rhs, nq + e)
    if sol is None:
        return None
    q, err = sol[:nq], sol[nq:] + [1]
    p, rem = _poly_divmod(gf, q, err)
    if any(rem):
        return None
    return (p + [0] * k)[:k]


def _interpolate_block(gf, points, k, m):
    """Block whose polynomial passes through the ``k`` given observations."""
    xs = [gf.element(lbl) for lbl, _ in points]
    columns = []
    for j in range(1, k + 1):
        col = [0] * m
        for a, (_, sym) in enumerate(points):
            num = den = 1
            for b in range(k):
                if b != a:
                    num = gf.mul(num, j ^ xs[b])
                    den = gf.mul(den, xs[a] ^ xs[b])
            coef = gf.div(num, den)
            if coef:
                for s_, y in enumerate(sym):
                    col[s_] ^= gf.mul(coef, y)
        columns.append(tuple(col))
    return tuple(columns)


def decode(observations, k, max_errors, w=16):
    """Recover the block whose codeword matches all but <= ``max_errors`` observations.

    ``observations`` is a sequence of ``(label, symbol)`` pairs with distinct
    labels. Each stripe is decoded independently and the result is accepted
    only if the re-encoded block disagrees with at most ``max_errors`` whole
    symbols. Raises :class:`DecodeFailure` otherwise.
    """
    gf = get_field(w)
    obs = list(observations)
    labels = [lbl for lbl, _ in obs]
    if len(set(labels)) != len(labels):
        raise ValueError("observation labels must be distinct")
    if len(obs) < k + 2 * max_errors:
        raise ValueError(f"{len(obs)} observations cannot correct {max_errors} errors with k={k}")
    m = len(obs[0][1])
    # fast path: the codeword through the first k observations is the only
    # candidate within distance max_errors whenever it qualifies at all
    block = _interpolate_block(gf, obs[:k], k, m)
    wrong = sum(1 for lbl, sym in obs if encode(block, lbl, w) != tuple(sym))
    if wrong <= max_errors:
        return block
    xs = [gf.element(lbl) for lbl in labels]
    columns = [[0] * m for _ in range(k)]
    for s in range(m):
        ys = [sym[s] for _, sym in obs]
        p = _berlekamp_welch(gf, xs, ys, k, max_errors)
        if p is None:
            raise DecodeFailure(f"stripe {s}: no codeword within distance {max_errors}")
        for j in range(k):
            columns[j][s] = _poly_eval(gf, p, j + 1)
    block = tuple(tuple(col) for col in columns)
    wrong = sum(1 for lbl, sym in obs if encode(block, lbl, w) != tuple(sym))
    if wrong > max_errors:
        raise DecodeFailure(f"{wrong} symbol errors exceed max_errors={max_errors}")
    return block
