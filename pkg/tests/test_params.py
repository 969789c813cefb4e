import math
from fractions import Fraction

import pytest

from coolba.errors import ConfigurationError, FieldCapacityError, ResilienceError
from coolba.params import K_DIVISOR, committee_params, derive, log_term_ceiling


def _brute_q(n, t, k):
    # smallest q with q*k >= (t/5 + 1) log2(n+1), i.e. 2^(5qk) >= (n+1)^(t+5)
    q = 0
    while 2 ** (5 * q * k) < (n + 1) ** (t + 5):
        q += 1
    return q


def test_worked_example_31_10():
    p = derive(31, 10, 240)
    # k = 10/5 + 1 = 3; log term = 3 * 5 / 3 = 5; l/k = 80
    assert (p.k, p.c_min, p.m, p.c) == (3, 80, 5, 80)
    assert p.capacity == 14 >= 10


def test_small_network():
    p = derive(4, 1, 8)
    assert p.k == 1
    assert p.c_min == max(8, _brute_q(4, 1, 1))
    assert p.c % 16 == 0


@pytest.mark.parametrize("n,t", [(n, t) for n in (1, 4, 7, 16, 31, 100, 121, 400) for t in range(0, (n - 1) // 3 + 1, 3)])
def test_log_term_is_exact(n, t):
    k = t // 5 + 1
    assert log_term_ceiling(n, t, k) == _brute_q(n, t, k)
    approx = Fraction(t + 5, 5) * math.log2(n + 1) / k
    assert log_term_ceiling(n, t, k) >= approx - 1e-9


def test_k_and_capacity_for_every_resilient_pair():
    for n in range(1, 120):
        for t in range(0, (n - 1) // 3 + 1):
            p = derive(n, t, 8)
            assert p.k == t // K_DIVISOR + 1
            assert p.capacity >= t


def test_length_dominates_for_long_messages():
    p = derive(16, 5, 4000)
    assert p.c_min == math.ceil(4000 / p.k)
    assert p.padded_bits >= 4000


def test_sweep_parameters():
    got = {n: (derive(n, (n - 1) // 3, n).k, derive(n, (n - 1) // 3, n).c) for n in (16, 31, 61, 121)}
    assert got == {16: (2, 16), 31: (3, 16), 61: (5, 16), 121: (9, 16)}


def test_rejections():
    with pytest.raises(ResilienceError):
        derive(6, 2, 8)
    with pytest.raises(FieldCapacityError):
        derive(16, 1, 8, w=4)
    with pytest.raises(ConfigurationError):
        derive(4, 1, 0)
    with pytest.raises(ConfigurationError):
        derive(4, -1, 8)
    assert issubclass(ResilienceError, ConfigurationError)


def test_committee_sizes_and_determinism():
    committee, p = committee_params(100, 2, 64)
    assert committee == tuple(range(1, 8)) and p.n == 7
    c1, _ = committee_params(100, 2, 64, seed=9)
    c2, _ = committee_params(100, 2, 64, seed=9)
    assert c1 == c2 and len(c1) == 7 and set(c1) <= set(range(1, 101))
    assert committee_params(100, 2, 64, seed=10)[0] != c1
    boundary, _ = committee_params(11, 3, 8)
    assert len(boundary) == 10
    with pytest.raises(ConfigurationError):
        committee_params(10, 3, 8)


def test_committee_symbol_width():
    _, p = committee_params(1000, 10, 240)
    assert p.c == derive(31, 10, 240).c
