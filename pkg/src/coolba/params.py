"""Protocol parameters derived from (n, t, l).

The number of data symbols is ``k = floor(t/5) + 1`` and the per-symbol bit
width is ``ceil(max(l, (t/5 + 1) * log2(n + 1)) / k)``, rounded up to a whole
number of ``w``-bit stripes.
"""

import random
from dataclasses import dataclass

from .errors import ConfigurationError, FieldCapacityError, ResilienceError
from .field import DEFAULT_WIDTH

K_DIVISOR = 5


@dataclass(frozen=True)
class CodeParams:
    n: int
    t: int
    ell: int
    k: int
    c_min: int  # bits per code symbol before stripe rounding
    w: int
    m: int  # stripes per symbol

    @property
    def c(self):
        """Effective bits per code symbol (a multiple of ``w``)."""
        return self.m * self.w

    c_eff = c

    @property
    def capacity(self):
        """Number of symbol errors an (n, k) code corrects."""
        return (self.n - self.k) // 2

    @property
    def padded_bits(self):
        return self.k * self.c


def _ceil_div(a, b):
    return -(-a // b)


def log_term_ceiling(n, t, k):
    """Smallest integer q with q >= (t/5 + 1) * log2(n + 1) / k, computed exactly.

    ``q * k >= (t + 5)/5 * log2(n + 1)`` is equivalent to
    ``2**(5*q*k) >= (n + 1)**(t + 5)``, which stays in integers.
    """
    rhs = (n + 1) ** (t + K_DIVISOR)
    # 2**(b-1) <= rhs < 2**b, so 5qk >= b suffices and 5qk >= b - 1 may.
    b = rhs.bit_length()
    q = max(0, _ceil_div(b - 1, K_DIVISOR * k))
    while (1 << (K_DIVISOR * q * k)) < rhs:
        q += 1
    return q


def derive(n, t, ell, w=DEFAULT_WIDTH):
    """Build the CodeParams for an n-processor network tolerating t faults."""
    if t < 0 or n < 1:
        raise ConfigurationError(f"need n >= 1 and t >= 0, got n={n}, t={t}")
    if n < 3 * t + 1:
        raise ResilienceError(f"n={n} < 3t+1={3 * t + 1}")
    if n > (1 << w) - 1:
        raise FieldCapacityError(f"n={n} exceeds 2^{w}-1 distinct labels")
    if ell < 1:
        raise ConfigurationError(f"message length must be >= 1 bit, got {ell}")
    k = t // K_DIVISOR + 1
    c_min = max(_ceil_div(ell, k), log_term_ceiling(n, t, k))
    m = _ceil_div(c_min, w)
    params = CodeParams(n=n, t=t, ell=ell, k=k, c_min=c_min, w=w, m=m)
    if params.capacity < t:
        raise AssertionError(f"(n={n}, k={k}) code corrects only {params.capacity} < t={t} errors")
    return params


def committee_params(n, t, ell, w=DEFAULT_WIDTH, seed=None):
    """Pick a 3t+1 committee for the small-t regime and derive its parameters.

    Returns ``(committee, params)`` where ``committee`` is a sorted tuple of
    processor ids from ``[1:n]`` and ``params`` is derived with ``n' = 3t+1``.
    Without a seed the committee is ``[1 : 3t+1]``.
    """
    size = 3 * t + 1
    if n <= size:
        raise ConfigurationError(f"committee mode needs n > 3t+1 (n={n}, t={t}); run plain COOL")
    if seed is None:
        committee = tuple(range(1, size + 1))
    else:
        committee = tuple(sorted(random.Random(seed).sample(range(1, n + 1), size)))
    return committee, derive(size, t, ell, w)
