import math
import random

import pytest
from hypothesis import given, strategies as st

from anomalous.arith import (
    Fp2Context,
    FpContext,
    factor,
    first_primes,
    is_prime,
    legendre,
    primes_up_to,
    smallest_nonresidue,
    sqrt_mod,
    squarefree_part,
    v2,
)

nonzero = st.integers(min_value=-(2**62), max_value=2**62).filter(lambda n: n != 0)


def test_v2_examples():
    assert v2(12) == 2
    assert v2(-64) == 6
    assert v2(7) == 0
    with pytest.raises(ValueError):
        v2(0)


@given(nonzero)
def test_v2_strips_to_odd(n):
    assert (n // 2 ** v2(n)) % 2 == 1


def test_squarefree_examples():
    assert squarefree_part(-64) == -1
    assert squarefree_part(48) == 3
    # t^2 - 4p for the curve with 20 points over F_17
    assert squarefree_part((-2) ** 2 - 4 * 17) == -1


@given(nonzero)
def test_squarefree_quotient_is_square(n):
    d = squarefree_part(n)
    q, r = divmod(n, d)
    assert r == 0 and q > 0
    assert math.isqrt(q) ** 2 == q
    assert all(c == 1 for c in _multiplicities(abs(d)))


def _multiplicities(n):
    fs = factor(n)
    return [fs.count(q) for q in set(fs)]


def test_factor_examples():
    assert factor(1) == []
    assert sorted(factor(60)) == [2, 2, 3, 5]
    assert sorted(factor(10403)) == [101, 103]


@given(st.integers(min_value=1, max_value=2**64 - 1))
def test_factor_product_of_primes(n):
    fs = factor(n)
    assert math.prod(fs) == n
    assert all(is_prime(q) for q in fs)


def test_factor_semiprime_beyond_trial_division():
    p, q = 1000003, 1000033
    assert sorted(factor(p * q)) == [p, q]
    assert sorted(factor(p * p * q)) == [p, p, q]


def test_primes_match_trial_division():
    small = primes_up_to(2000)
    assert small == [n for n in range(2, 2001) if all(n % d for d in range(2, math.isqrt(n) + 1))]
    assert first_primes(303) == small
    assert first_primes(10000)[-1] == 104729


def test_legendre_examples():
    assert legendre(2, 5) == -1
    assert legendre(4, 7) == 1
    assert legendre(0, 11) == 0


@given(st.sampled_from(primes_up_to(500)[1:]), st.integers(1, 10**6), st.integers(1, 10**6))
def test_legendre_multiplicative(p, a, b):
    if a % p and b % p:
        assert legendre(a * b, p) == legendre(a, p) * legendre(b, p)


def test_sqrt_mod_examples():
    assert sqrt_mod(2, 7) == 3
    assert sqrt_mod(0, 13) == 0
    assert sqrt_mod(3, 5) is None


def test_sqrt_mod_exhaustive_small_primes():
    for p in primes_up_to(10000)[1:]:
        ns = smallest_nonresidue(p)
        squares = {x * x % p for x in range(p)} if p < 600 else None
        for a in range(p) if p < 600 else random.Random(p).sample(range(p), 200):
            r = sqrt_mod(a, p, ns)
            if legendre(a, p) >= 0:
                assert r is not None and r * r % p == a
            else:
                assert r is None
            if squares is not None:
                assert (r is not None) == (a in squares)


def _fp2_elements(p):
    return st.tuples(st.integers(0, p - 1), st.integers(0, p - 1))


F17 = Fp2Context(17)


@given(_fp2_elements(17), _fp2_elements(17), _fp2_elements(17))
def test_fp2_field_axioms(x, y, z):
    F = F17
    x, y, z = F(*x), F(*y), F(*z)
    assert F.mul(x, y) == F.mul(y, x)
    assert F.mul(F.mul(x, y), z) == F.mul(x, F.mul(y, z))
    assert F.mul(x, F.add(y, z)) == F.add(F.mul(x, y), F.mul(x, z))
    assert F.add(F.sub(x, y), y) == x
    if not F.is_zero(x):
        assert F.mul(x, F.inv(x)) == F.one


def test_fp2_examples():
    F = Fp2Context(17, 3)
    x = F(2, 3)
    assert F.mul(F.one, x) == x
    assert F.mul(x, F.inv(x)) == F.one
    assert F.sqr(F(0, 1)) == F(3, 0)
    assert F.sqrt(F.one) in (F.one, F.neg(F.one))
    r = F.sqrt(F(3, 0))
    assert r is not None and F.sqr(r) == F(3, 0)


def test_fp2_square_iff_norm_square():
    p = 13
    F = Fp2Context(p)
    for a in F.elements():
        if F.is_zero(a):
            continue
        r = F.sqrt(a)
        norm_sq = legendre(F.norm(a), p) == 1
        assert (r is not None) == norm_sq
        if r is not None:
            assert F.sqr(r) == a


@given(st.sampled_from(primes_up_to(3000)[1:]), st.integers(0, 10**9), st.integers(0, 10**9))
def test_fp2_sqrt_of_squares(p, a, b):
    F = Fp2Context(p)
    x = F(a, b)
    r = F.sqrt(F.sqr(x))
    assert r is not None and F.sqr(r) == F.sqr(x)


def test_fp_context_basics():
    F = FpContext(101)
    assert F.mul(F.inv(7), 7) == 1
    assert F.pow(3, 100) == 1
    assert F.sqrt(F(-1)) is not None


def test_factor_rejects_out_of_range():
    from anomalous.arith import FactorizationError

    with pytest.raises(FactorizationError):
        factor(2**64)
    with pytest.raises(ValueError):
        factor(0)
