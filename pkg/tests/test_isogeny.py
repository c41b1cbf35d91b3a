import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from anomalous.anomaly import get_builtin
from anomalous.arith import FpContext, primes_up_to
from anomalous.curve import (
    CurveModel,
    ReducedCurve,
    count_points_fp,
    count_points_naive,
    random_point,
    reduce_mod_p,
    two_torsion_roots,
)
from anomalous.isogeny import (
    IsogenyError,
    anomaly_predicate,
    frob_power,
    frobenius_in_order,
    full_torsion_from_frobenius,
    heuberger_iso,
    level_above_floor,
    two_isogeny_neighbors,
    velu2,
    volcano_profile,
)

EXAMPLE_E = CurveModel.from_ainvs([0, 18, 0, 72, 0], "E")


def example_at_17():
    E = reduce_mod_p(EXAMPLE_E, 17, Fraction(0))
    return E, velu2(E, E.known_root)


def test_velu_image_order_and_homomorphism():
    E = ReducedCurve(FpContext(5), 1, 0, "E")
    phi = velu2(E, 0)
    assert count_points_naive(phi.codomain) == 4
    pts = E.points()
    for P in pts:
        assert phi.codomain.is_on(phi(P))
        for Q in pts:
            assert phi(E.add(P, Q)) == phi.codomain.add(phi(P), phi(Q))


def test_velu_matches_rational_partner():
    pair = get_builtin("example1.1")
    for p in (17, 29, 101, 1009):
        phi = velu2(pair.reduce_E(p), pair.reduce_E(p).known_root)
        assert phi.codomain.j_invariant() == pair.reduce_Ep(p).j_invariant()


def test_dual_composition_is_doubling():
    rng = random.Random(0)
    for p in (17, 101, 1009, 65537):
        E, phi = example_at_17() if p == 17 else (None, None)
        if E is None:
            E = reduce_mod_p(EXAMPLE_E, p, Fraction(0))
            phi = velu2(E, E.known_root)
        psi = velu2(phi.codomain, phi.dual_kernel_x)
        F = E.field
        # psi lands on (16A, 64B); rescale (x, y) -> (x/4, y/8)
        assert psi.codomain.A == F.mul_int(E.A, 16) and psi.codomain.B == F.mul_int(E.B, 64)
        i4, i8 = F.inv(4), F.inv(8)
        for _ in range(200):
            P = random_point(E, rng)
            img = psi(phi(P))
            twice = E.double(P)
            if img is None:
                assert twice is None
                continue
            back = (F.mul(img[0], i4), F.mul(img[1], i8))
            assert back == twice


def test_neighbors_count():
    full = ReducedCurve(FpContext(5), 1, 0, "")
    assert len(two_isogeny_neighbors(full)) == 3
    one = ReducedCurve(FpContext(5), 1, 2, "")
    assert len(two_isogeny_neighbors(one)) == 1
    odd = ReducedCurve(FpContext(7), 3, 2, "")
    assert count_points_naive(odd) % 2 == 1
    assert two_isogeny_neighbors(odd) == []


def test_levels_example():
    E, phi = example_at_17()
    assert level_above_floor(E, 3) == 2
    assert level_above_floor(phi.codomain, 3) == 1
    assert level_above_floor(ReducedCurve(FpContext(5), 1, 2, ""), 3) == 0


def test_volcano_profile_examples():
    prof = volcano_profile(-2, 17)
    assert (prof.D, prof.dK, prof.f, prof.h, prof.crater_class) == (-1, -4, 4, 2, 4)
    prof = volcano_profile(2, 5)
    assert (prof.disc, prof.D, prof.dK, prof.f, prof.h) == (-16, -1, -4, 2, 1)
    with pytest.raises(ValueError):
        volcano_profile(0, 17)
    with pytest.raises(ValueError):
        volcano_profile(9, 17)


@given(st.sampled_from(primes_up_to(10**6)[2:]), st.integers())
def test_height_increment_for_trace_2_mod_4(p, t):
    bound = int((4 * p) ** 0.5)
    t = t % (2 * bound + 1) - bound
    if t % 4 != 2 or t * t >= 4 * p:
        return
    assert volcano_profile(t * t - 2 * p, p * p).h == volcano_profile(t, p).h + 1


def test_frobenius_example():
    rep = frobenius_in_order(-2, 17, 1, 2)
    assert (rep.a, rep.b, rep.beta, rep.s2) == (-1, 4, 4, 1)
    assert rep.beta.bit_length() - 1 == 2
    assert frob_power(rep, 2) == (-15, -8)
    assert heuberger_iso(-1, 4, 1)
    assert not heuberger_iso(-15, -8, 1)
    assert anomaly_predicate(-1, 4, 1)
    horizontal = frobenius_in_order(-2, 17, 2, 2)
    assert not horizontal.vertical
    assert heuberger_iso(*frob_power(horizontal, 2), horizontal.s2, horizontal.vertical)


def test_heuberger_horizontal_and_predicate_mod_4():
    assert heuberger_iso(3, 4, 0)
    for a in range(-41, 42, 4):  # a = 1 mod 4
        if a % 4 == 1:
            assert not anomaly_predicate(a, 8, 1)
    with pytest.raises(IsogenyError):
        heuberger_iso(5, 0, 0)


def test_full_torsion_from_frobenius_example():
    # levels 2 and 1 at p = 17: conductors 1 and 2
    assert full_torsion_from_frobenius(-1, 4, 0) == 1
    assert full_torsion_from_frobenius(-1, 4, 1) == 1
    assert full_torsion_from_frobenius(-15, -8, 0) == 3
    assert full_torsion_from_frobenius(-15, -8, 1) == 2


@pytest.mark.parametrize("label", ["69a", "10608y", "1200e", "example1.1"])
def test_volcano_invariants_on_builtin_pairs(label):
    """Levels are adjacent and bounded by h; the crater is reached; the
    criterion at m = 1, 2 agrees with Sylow shapes (checked inside classify)."""
    from anomalous.anomaly import classify_prime

    pair = get_builtin(label)
    reached_crater = 0
    for p in primes_up_to(3000)[2:]:
        rec = classify_prime(pair, p, audit_rate=1.0)
        if rec.profile is None:
            continue
        lo, hi = sorted((rec.level_E, rec.level_Ep))
        assert hi <= rec.profile.h and hi - lo <= 1
        reached_crater += hi == rec.profile.h
        if rec.t % 4 == 2:
            assert volcano_profile(rec.t**2 - 2 * p, p * p).h == rec.profile.h + 1
        if rec.sylow_E_p2 is not None and rec.iso_over_p:
            g_E, g_Ep = rec.profile.f >> rec.level_E, rec.profile.f >> rec.level_Ep
            rep = frobenius_in_order(rec.t, p, g_E, g_Ep)
            iso1 = heuberger_iso(*frob_power(rep, 1), rep.s2, rep.vertical)
            iso2 = heuberger_iso(*frob_power(rep, 2), rep.s2, rep.vertical)
            pred = rep.vertical and anomaly_predicate(rep.a, rep.b, rep.s2)
            assert pred == (iso1 and not iso2)
            assert iso2 == (rec.sylow_E_p2 == rec.sylow_Ep_p2)
    assert reached_crater > 0


def test_velu_order_preserved_random():
    rng = random.Random(4)
    for p in (1009, 70001, 100003):
        F = FpContext(p)
        done = 0
        while done < 5:
            A, B = rng.randrange(p), rng.randrange(p)
            if (4 * A**3 + 27 * B * B) % p == 0:
                continue
            E = ReducedCurve(F, A, B, "")
            roots = two_torsion_roots(E)
            if not roots:
                continue
            N = count_points_fp(E)
            for phi in two_isogeny_neighbors(E, roots):
                assert count_points_fp(phi.codomain) == N
            done += 1
