import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from anomalous.arith import Fp2Context, FpContext, primes_up_to
from anomalous.curve import (
    BadReduction,
    CurveError,
    CurveModel,
    ReducedCurve,
    SylowShape,
    count_points_fp,
    count_points_naive,
    halving_quartic,
    halving_quartic_roots,
    halving_quartic_splits,
    order_ext,
    poly_eval,
    poly_roots,
    poly_splits,
    prime_rng,
    random_point,
    reduce_mod_p,
    sylow_by_enumeration,
    two_sylow,
    two_torsion_roots,
)

EXAMPLE_E = CurveModel.from_ainvs([0, 18, 0, 72, 0], "E")  # y^2 = x(x+6)(x+12)


def short(p, A, B):
    return ReducedCurve(FpContext(p), A % p, B % p, f"{A},{B}")


def nonsingular(p, A, B):
    return (4 * A**3 + 27 * B * B) % p != 0


def random_curves(p, count, rng):
    out = []
    while len(out) < count:
        A, B = rng.randrange(p), rng.randrange(p)
        if nonsingular(p, A, B):
            out.append(short(p, A, B))
    return out


def test_reduction_examples():
    E = reduce_mod_p(CurveModel.from_ainvs([0, 0, 0, 1, 0]), 5)
    assert (E.A, E.B) == (1, 0)
    E17 = reduce_mod_p(EXAMPLE_E, 17, Fraction(0))
    assert E17.known_root is not None and E17.field.is_zero(E17.rhs(E17.known_root))
    with pytest.raises(ValueError):
        reduce_mod_p(EXAMPLE_E, 2)


def test_bad_reduction_detected_from_discriminant():
    model = CurveModel.from_ainvs([0, 0, 0, 0, 5 * 7])
    bad = [p for p in primes_up_to(100)[2:] if model.disc % p == 0]
    assert bad == [5, 7]
    for p in bad:
        with pytest.raises(BadReduction):
            reduce_mod_p(model, p)


def test_group_law_examples():
    E = short(5, 1, 0)
    P = (0, 0)
    assert E.add(P, None) == P
    assert E.add(P, P) is None
    for Q in E.points():
        assert E.mul(4, Q) is None


def test_random_point_deterministic_and_on_curve():
    E = short(5, 1, 0)
    a = [random_point(E, random.Random(7)) for _ in range(3)]
    b = [random_point(E, random.Random(7)) for _ in range(3)]
    assert a == b and all(E.is_on(P) for P in a)
    E2 = reduce_mod_p(EXAMPLE_E, 17).base_extend()
    rng = random.Random(1)
    for _ in range(50):
        assert E2.mul(320, random_point(E2, rng)) is None


def test_counts_examples():
    assert count_points_fp(short(5, 1, 0)) == 4
    assert count_points_fp(short(5, 1, 2)) == 4
    assert count_points_fp(reduce_mod_p(EXAMPLE_E, 17)) == 20
    assert count_points_fp(reduce_mod_p(EXAMPLE_E, 17), method="bsgs") == 20


def test_order_ext_examples():
    assert order_ext(-2, 17, 2) == 320
    assert order_ext(2, 5, 2) == 32
    for t in range(-8, 9):
        assert order_ext(t, 17, 1) == 18 - t


@given(st.sampled_from(primes_up_to(10**5)[2:]), st.integers())
def test_order_ext_square_identity(p, t):
    t = t % (2 * math.isqrt(p) + 1) - math.isqrt(p)
    assert order_ext(t, p, 2) == (p + 1) ** 2 - t * t


def test_sylow_examples():
    E, Ep = short(5, 1, 0), short(5, 1, 2)
    assert two_sylow(E, 4, random.Random(0)) == SylowShape(1, 1)
    assert two_sylow(Ep, 4, random.Random(0)) == SylowShape(0, 2)
    E2 = reduce_mod_p(EXAMPLE_E, 17, Fraction(0)).base_extend()
    assert two_sylow(E2, 320, random.Random(0)) == SylowShape(3, 3)
    assert sylow_by_enumeration(E2) == SylowShape(3, 3)


def test_two_torsion_examples():
    assert two_torsion_roots(short(5, 1, 0)) == [0, 2, 3]
    assert two_torsion_roots(short(5, 1, 2)) == [4]


def test_halving_quartic_example():
    E = short(5, 1, 0)
    assert halving_quartic(1, 0, 0, FpContext(5)) == [1, 0, 3, 0, 1]
    assert halving_quartic_splits(E, 0)
    assert halving_quartic_roots(E, 0) == [1, 4]


def test_halving_quartic_splits_at_doubles():
    p = 1009
    rng = random.Random(3)
    for E in random_curves(p, 10, rng):
        for _ in range(5):
            P = random_point(E, rng)
            D = E.double(P)
            if D is None:
                continue
            # the roots are x(P + T) for T in E[2]
            assert P[0] in halving_quartic_roots(E, D[0], rng)
            if len(two_torsion_roots(E)) == 3:
                assert halving_quartic_splits(E, D[0], rng)


def test_halving_quartic_conjugate_quadratics_do_not_split():
    # exhaustive at p = 13: rootless quartics whose roots all lie in F_169
    p = 13
    F, F2 = FpContext(p), Fp2Context(p)
    found = 0
    for A in range(p):
        for B in range(p):
            if not nonsingular(p, A, B):
                continue
            E = short(p, A, B)
            for xi in range(p):
                coeffs = halving_quartic(A, B, xi, F)
                brute = [x for x in range(p) if sum(c * x**i for i, c in enumerate(coeffs)) % p == 0]
                assert sorted(poly_roots(coeffs, F)) == brute
                if brute:
                    continue
                assert not halving_quartic_splits(E, xi)
                if len(poly_roots([F2(c) for c in coeffs], F2)) == 4:
                    found += 1
    assert found > 0


def _splits_by_brute_force(coeffs, F, elements):
    # divide out every root with multiplicity; a full split leaves a constant
    f = list(coeffs)
    for r in elements:
        while len(f) > 1 and F.is_zero(poly_eval(f, r, F)):
            quot, carry = [], F.zero
            for c in reversed(f[1:]):
                carry = F.add(F.mul(carry, r), c)
                quot.append(carry)
            f = quot[::-1]
    return len(f) == 1


@pytest.mark.parametrize("ext", [False, True])
def test_poly_splits_matches_brute_force_p7(ext):
    # every halving quartic at p = 7, over F_7 and F_49, repeated roots included
    p = 7
    F = Fp2Context(p) if ext else FpContext(p)
    elements = [F(a, b) for a in range(p) for b in range(p)] if ext else list(range(p))
    seen = {True: 0, False: 0}
    for A in range(p):
        for B in range(p):
            if not nonsingular(p, A, B):
                continue
            for xi in range(p):
                coeffs = halving_quartic(F(A), F(B), F(xi), F)
                got = poly_splits(coeffs, F)
                assert got == _splits_by_brute_force(coeffs, F, elements)
                seen[got] += 1
    assert seen[True] and seen[False]


def test_naive_oracle_small_primes():
    """BSGS and naive counts agree; Sylow shapes agree with enumeration.

    Below p = 229 a curve and its twist can both leave two orders in the
    Hasse interval; BSGS must then refuse rather than guess.
    """
    rng = random.Random(2024)
    refused = 0
    for p in primes_up_to(101)[2:]:
        for E in random_curves(p, 50, rng):
            N = count_points_naive(E)
            assert N == len(E.points())
            try:
                assert count_points_fp(E, random.Random(p), method="bsgs") == N
            except CurveError as exc:
                assert str(N) in str(exc)
                refused += 1
            assert two_sylow(E, N, random.Random(p)) == sylow_by_enumeration(E)
    assert refused < 50 * 24 // 10


def test_bsgs_unambiguous_above_229():
    rng = random.Random(9)
    for p in [q for q in primes_up_to(1200) if q > 229]:
        for E in random_curves(p, 4, rng):
            assert count_points_fp(E, random.Random(p), method="bsgs") == count_points_naive(E)


def test_sylow_over_quadratic_extension_matches_enumeration():
    rng = random.Random(5)
    for p in (5, 7, 11, 13, 17):
        for E in random_curves(p, 6, rng):
            N = count_points_naive(E)
            N2 = order_ext(p + 1 - N, p, 2)
            E2 = E.base_extend()
            assert two_sylow(E2, N2, random.Random(p)) == sylow_by_enumeration(E2)


def test_roots_iff_full_two_torsion_exhaustive():
    for p in primes_up_to(31)[2:]:
        for A in range(p):
            for B in range(p):
                if not nonsingular(p, A, B):
                    continue
                E = short(p, A, B)
                N = count_points_naive(E)
                if N % 4:
                    continue
                shape = two_sylow(E, N, random.Random(0))
                assert (len(two_torsion_roots(E)) == 3) == (shape.a >= 1)
                assert (p - 1) % (1 << shape.a) == 0


@given(st.sampled_from(primes_up_to(3 * 10**5)[1000:]), st.integers(0, 2**32), st.integers(0, 2**32))
def test_hasse_and_annihilation(p, A, B):
    if not nonsingular(p, A, B):
        return
    E = short(p, A, B)
    N = count_points_fp(E, prime_rng(0, p, "test"))
    assert (math.sqrt(p) - 1) ** 2 <= N <= (math.sqrt(p) + 1) ** 2
    rng = random.Random(p)
    for _ in range(20):
        assert E.mul(N, random_point(E, rng)) is None


def test_order_annihilates_many_points():
    E = reduce_mod_p(EXAMPLE_E, 100003)
    N = count_points_fp(E)
    assert N == count_points_naive(E)
    rng = random.Random(0)
    assert all(E.mul(N, random_point(E, rng)) is None for _ in range(1000))


def test_bsgs_matches_naive_above_threshold():
    rng = random.Random(11)
    for p in [q for q in primes_up_to(70000) if q > 65536][:15]:
        for E in random_curves(p, 3, rng):
            assert count_points_fp(E, random.Random(p)) == count_points_naive(E)


@given(st.sampled_from(primes_up_to(2000)[2:]), st.integers(0, 2**32), st.integers(0, 2**32))
def test_sylow_a_divides_q_minus_one(p, A, B):
    if not nonsingular(p, A, B):
        return
    E = short(p, A, B)
    N = count_points_naive(E)
    shape = two_sylow(E, N, random.Random(1))
    assert (p - 1) % (1 << shape.a) == 0
    N2 = order_ext(p + 1 - N, p, 2)
    shape2 = two_sylow(E.base_extend(), N2, random.Random(1))
    assert (p * p - 1) % (1 << shape2.a) == 0
    assert shape2.a >= shape.a
