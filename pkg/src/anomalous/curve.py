"""Elliptic curves over F_p and F_{p^2}.

Rational models are kept in long Weierstrass form (:class:`CurveModel`) and
reduced to short form y^2 = x^3 + Ax + B over a finite field
(:class:`ReducedCurve`).  Points are ``None`` for the identity or an affine
pair ``(x, y)``.  The 2-Sylow subgroup is read off in two ways: the full
torsion exponent by iterated halving (2-descent), the cyclic exponent by
sampling random points.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .arith import Fp2Context, FpContext, factor, is_prime, v2

__all__ = [
    "BadReduction",
    "CurveError",
    "CurveModel",
    "ReducedCurve",
    "SylowShape",
    "reduce_mod_p",
    "count_points_fp",
    "count_points_naive",
    "order_ext",
    "two_sylow",
    "two_torsion_roots",
    "halve",
    "full_torsion_exponent",
    "halving_quartic",
    "halving_quartic_splits",
    "poly_eval",
    "poly_splits",
    "poly_roots",
    "random_point",
    "prime_rng",
    "rational_roots",
    "halving_quartic_roots",
    "sylow_by_enumeration",
    "point_order",
    "trace_ext",
]

NAIVE_COUNT_LIMIT = 1 << 16
SYLOW_SAMPLES = 40


class CurveError(ArithmeticError):
    """An internal consistency check on a curve computation failed."""


class BadReduction(ValueError):
    """The model has singular reduction at the requested prime."""


def prime_rng(seed, p: int, tag: str) -> random.Random:
    """Deterministic per-(seed, prime, purpose) random stream."""
    return random.Random(f"{seed}:{p}:{tag}")


@dataclass(frozen=True)
class CurveModel:
    """Integral long Weierstrass model y^2 + a1xy + a3y = x^3 + a2x^2 + a4x + a6."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    label: str = ""

    def __post_init__(self):
        if self.disc == 0:
            raise ValueError(f"singular model {self.ainvs}")

    @classmethod
    def from_ainvs(cls, ainvs: Sequence, label: str = "") -> "CurveModel":
        if len(ainvs) != 5:
            raise ValueError("expected five a-invariants [a1,a2,a3,a4,a6]")
        return cls(*(int(a) for a in ainvs), label=label)

    @property
    def ainvs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b2(self) -> int:
        return self.a1 * self.a1 + 4 * self.a2

    @property
    def b4(self) -> int:
        return self.a1 * self.a3 + 2 * self.a4

    @property
    def b6(self) -> int:
        return self.a3 * self.a3 + 4 * self.a6

    @property
    def b8(self) -> int:
        a1, a2, a3, a4, a6 = self.ainvs
        return a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4

    @property
    def c4(self) -> int:
        return self.b2 * self.b2 - 24 * self.b4

    @property
    def c6(self) -> int:
        return -self.b2**3 + 36 * self.b2 * self.b4 - 216 * self.b6

    @property
    def disc(self) -> int:
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def j(self) -> Fraction:
        return Fraction(self.c4**3, self.disc)

    def short_x(self, x: Fraction) -> Fraction:
        """Image of an x-coordinate under the map to y^2 = x^3 - 27c4 x - 54c6."""
        return 36 * Fraction(x) + 3 * self.b2

    def two_division_poly(self) -> list[int]:
        """Coefficients (low to high) of 4x^3 + b2x^2 + 2b4x + b6."""
        return [self.b6, 2 * self.b4, self.b2, 4]

    def rational_two_torsion_x(self) -> list[Fraction]:
        """Rational x-coordinates of the points of order 2."""
        return rational_roots(self.two_division_poly())

    def is_two_torsion_x(self, x: Fraction) -> bool:
        c = self.two_division_poly()
        x = Fraction(x)
        return c[0] + c[1] * x + c[2] * x * x + c[3] * x**3 == 0

    def has_good_reduction(self, p: int) -> bool:
        return self.disc % p != 0


def _divisors(n: int) -> list[int]:
    from .arith import factor

    primes = factor(n)
    divs = [1]
    for q in set(primes):
        e = primes.count(q)
        divs = [d * q**i for d in divs for i in range(e + 1)]
    return divs


def rational_roots(coeffs: Sequence[int]) -> list[Fraction]:
    """Rational roots of an integer polynomial (coefficients low to high)."""
    coeffs = list(coeffs)
    roots = []
    while coeffs and coeffs[0] == 0:
        roots.append(Fraction(0))
        coeffs = coeffs[1:]
    if len(coeffs) <= 1:
        return sorted(set(roots))
    lead, const = abs(coeffs[-1]), abs(coeffs[0])
    found = set(roots)
    for num in _divisors(const):
        for den in _divisors(lead):
            for cand in (Fraction(num, den), Fraction(-num, den)):
                if sum(c * cand**i for i, c in enumerate(coeffs)) == 0:
                    found.add(cand)
    return sorted(found)


class SylowShape(NamedTuple):
    """2-Sylow subgroup Z/2^a x Z/2^b with a <= b."""

    a: int
    b: int

    def __str__(self):
        return f"{self.a}:{self.b}"

    @classmethod
    def parse(cls, text: str) -> "SylowShape":
        a, b = text.split(":")
        return cls(int(a), int(b))

    @property
    def order_exponent(self) -> int:
        return self.a + self.b


@dataclass(frozen=True)
class ReducedCurve:
    """Short Weierstrass curve y^2 = x^3 + Ax + B over F_p or F_{p^2}.

    ``known_root`` optionally records one root of x^3 + Ax + B in the field,
    which lets the 2-torsion be found by a single square root.
    """

    field: object
    A: object
    B: object
    label: str = ""
    known_root: object = None
    disc_nonzero: bool = field(default=True, init=False, repr=False)

    def __post_init__(self):
        F = self.field
        disc = F.add(F.mul_int(F.pow(self.A, 3), 4), F.mul_int(F.sqr(self.B), 27))
        if F.is_zero(disc):
            raise BadReduction(f"singular curve over field of size {F.q}")
        if self.known_root is not None and not F.is_zero(self.rhs(self.known_root)):
            raise CurveError("recorded 2-torsion root does not lie on the cubic")

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def p(self) -> int:
        return self.field.p

    def rhs(self, x):
        F = self.field
        return F.add(F.mul(F.add(F.sqr(x), self.A), x), self.B)

    def j_invariant(self):
        F = self.field
        a3 = F.mul_int(F.pow(self.A, 3), 4)
        den = F.add(a3, F.mul_int(F.sqr(self.B), 27))
        return F.mul(F.mul_int(a3, 1728), F.inv(den))

    def is_on(self, P) -> bool:
        if P is None:
            return True
        F = self.field
        return F.sqr(P[1]) == self.rhs(P[0])

    def neg(self, P):
        if P is None:
            return None
        return (P[0], self.field.neg(P[1]))

    def add(self, P, Q):
        if P is None:
            return Q
        if Q is None:
            return P
        F = self.field
        x1, y1 = P
        x2, y2 = Q
        if x1 == x2:
            if F.is_zero(F.add(y1, y2)):
                return None
            num = F.add(F.mul_int(F.sqr(x1), 3), self.A)
            lam = F.mul(num, F.inv(F.mul_int(y1, 2)))
        else:
            lam = F.mul(F.sub(y2, y1), F.inv(F.sub(x2, x1)))
        x3 = F.sub(F.sub(F.sqr(lam), x1), x2)
        y3 = F.sub(F.mul(lam, F.sub(x1, x3)), y1)
        return (x3, y3)

    def double(self, P):
        return self.add(P, P)

    def mul(self, n: int, P):
        if n < 0:
            n, P = -n, self.neg(P)
        result = None
        addend = P
        while n:
            if n & 1:
                result = self.add(result, addend)
            addend = self.add(addend, addend)
            n >>= 1
        return result

    def base_extend(self) -> "ReducedCurve":
        """The same curve over F_{p^2} (from a curve over F_p)."""
        if self.field.degree != 1:
            raise ValueError("curve is already over F_{p^2}")
        F2 = Fp2Context(self.field.p)
        root = None if self.known_root is None else F2(self.known_root)
        return ReducedCurve(F2, F2(self.A), F2(self.B), self.label, root)

    def quadratic_twist(self) -> "ReducedCurve":
        """Twist by the field's fixed non-residue (F_p only)."""
        F = self.field
        d = F.ns
        return ReducedCurve(F, F.mul(self.A, d * d), F.mul(self.B, d * d * d), self.label + "^t")

    def points(self):
        """All points, by brute force (small fields only)."""
        pts = [None]
        F = self.field
        for x in F.elements():
            r = self.rhs(x)
            if F.is_zero(r):
                pts.append((x, r))
            elif F.is_square(r):
                y = F.sqrt(r)
                pts.append((x, y))
                pts.append((x, F.neg(y)))
        return pts


def reduce_mod_p(model: CurveModel, p: int, known_x: Optional[Fraction] = None) -> ReducedCurve:
    """Reduce a rational model to short Weierstrass form over F_p (p >= 5).

    ``known_x`` is a rational x-coordinate of a 2-torsion point on the long
    model; when given, its image is recorded as a known cubic root.
    """
    if p < 5 or not is_prime(p):
        raise ValueError(f"reduction needs a prime p >= 5, got {p}")
    if model.disc % p == 0:
        raise BadReduction(f"{model.label or model.ainvs} has bad reduction at {p}")
    F = FpContext(p)
    A = F(-27 * model.c4)
    B = F(-54 * model.c6)
    root = None
    if known_x is not None:
        xs = model.short_x(known_x)
        if xs.denominator % p == 0:
            raise BadReduction(f"2-torsion point does not reduce at {p}")
        root = F(xs.numerator * pow(xs.denominator, -1, p))
    return ReducedCurve(F, A, B, model.label, root)


def random_point(curve: ReducedCurve, rng: random.Random):
    """Uniform x with a square right-hand side; root sign set by a random bit."""
    F = curve.field
    while True:
        x = F.random(rng)
        r = curve.rhs(x)
        if F.is_zero(r):
            return (x, r)
        y = F.sqrt(r)
        if y is None:
            continue
        if rng.getrandbits(1):
            y = F.neg(y)
        return (x, y)


# ---------------------------------------------------------------------------
# point counting


def count_points_naive(curve: ReducedCurve) -> int:
    """Exact order over F_p by a vectorized Legendre-symbol sum."""
    p = curve.p
    if curve.field.degree != 1:
        raise ValueError("naive counting is for prime fields")
    x = np.arange(p, dtype=np.int64)
    rhs = ((x * x % p + curve.A) % p * x + curve.B) % p
    is_sq = np.zeros(p, dtype=bool)
    is_sq[x * x % p] = True
    zeros = int(np.count_nonzero(rhs == 0))
    squares = int(np.count_nonzero(is_sq[rhs])) - zeros
    return 1 + zeros + 2 * squares


def _bsgs_candidates(curve: ReducedCurve, P, lo: int, hi: int) -> list[int]:
    """All M in [lo, hi] with M*P = identity."""
    if P is None:
        return list(range(lo, hi + 1))
    width = hi - lo
    m = math.isqrt(width // 2) + 1
    baby = {}
    R = None
    for j in range(1, m + 1):
        R = curve.add(R, P)
        if R is None:
            # small order point: every multiple of j in range qualifies
            first = -(-lo // j) * j
            return list(range(first, hi + 1, j))
        baby.setdefault(R[0], (j, R[1]))
    step = curve.mul(2 * m + 1, P)
    G = curve.mul(lo + m, P)
    base = lo + m
    found = set()
    while base - m <= hi:
        if G is None:
            found.add(base)
        else:
            hit = baby.get(G[0])
            if hit is not None:
                j, y = hit
                # G = +jP means (base - j)P = 0, G = -jP means (base + j)P = 0
                found.add(base - j if G[1] == y else base + j)
        G = curve.add(G, step)
        base += 2 * m + 1
    found = [M for M in found if lo <= M <= hi]
    if not found:
        return []
    # one hit fixes the exact order of P; a window can hold several multiples
    n = point_order(curve, P, found[0])
    first = -(-lo // n) * n
    return list(range(first, hi + 1, n))


def point_order(curve: ReducedCurve, P, multiple: int) -> int:
    """Exact order of P given a positive multiple of it."""
    if curve.mul(multiple, P) is not None:
        raise ValueError("not a multiple of the order")
    n = multiple
    for q in set(factor(n)):
        while n % q == 0 and curve.mul(n // q, P) is None:
            n //= q
    return n


def count_points_fp(curve: ReducedCurve, rng: Optional[random.Random] = None, method: str = "auto") -> int:
    """Exact order of E(F_p): naive below 2^16, baby-step giant-step above.

    ``method`` forces "naive" or "bsgs" regardless of p.
    """
    p = curve.p
    if curve.field.degree != 1:
        raise ValueError("count_points_fp works over F_p")
    if method not in ("auto", "naive", "bsgs"):
        raise ValueError(f"unknown counting method {method!r}")
    if method == "naive" or (method == "auto" and p < NAIVE_COUNT_LIMIT):
        return count_points_naive(curve)
    rng = rng or prime_rng(0, p, "count")
    s = math.isqrt(4 * p)
    lo, hi = p + 1 - s, p + 1 + s
    twist = curve.quadratic_twist()
    cands = set(_bsgs_candidates(curve, random_point(curve, rng), lo, hi))
    for _ in range(20):
        if len(cands) == 1:
            return cands.pop()
        P = random_point(curve, rng)
        cands = {M for M in cands if curve.mul(M, P) is None}
        # the twist has order 2p + 2 - M
        T = random_point(twist, rng)
        cands = {M for M in cands if twist.mul(2 * p + 2 - M, T) is None}
        if not cands:
            break
    raise CurveError(f"point count at p={p} left candidates {sorted(cands)}")


def order_ext(t: int, p: int, m: int) -> int:
    """#E(F_{p^m}) from the trace over F_p."""
    if m < 1:
        raise ValueError("extension degree must be >= 1")
    t_prev, t_cur = 2, t
    for _ in range(m - 1):
        t_prev, t_cur = t_cur, t * t_cur - p * t_prev
    return p**m + 1 - t_cur


def trace_ext(t: int, p: int, m: int) -> int:
    return p**m + 1 - order_ext(t, p, m)


# ---------------------------------------------------------------------------
# polynomials over a finite field (coefficients low to high)


def _trim(f, F):
    while f and F.is_zero(f[-1]):
        f.pop()
    return f


def _poly_divmod(f, g, F):
    f = list(f)
    _trim(f, F)
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = F.inv(g[-1])
    dg = len(g) - 1
    quot = [F.zero] * max(len(f) - dg, 0)
    while len(f) - 1 >= dg and f:
        c = F.mul(f[-1], inv_lead)
        shift = len(f) - 1 - dg
        quot[shift] = c
        for i, gi in enumerate(g):
            f[shift + i] = F.sub(f[shift + i], F.mul(c, gi))
        f.pop()
        _trim(f, F)
    return quot, f


def _poly_mulmod(f, g, mod, F):
    prod = [F.zero] * (len(f) + len(g) - 1) if f and g else []
    for i, fi in enumerate(f):
        if F.is_zero(fi):
            continue
        for j, gj in enumerate(g):
            prod[i + j] = F.add(prod[i + j], F.mul(fi, gj))
    return _poly_divmod(prod, mod, F)[1]


def _poly_powmod(base, e: int, mod, F):
    result = [F.one]
    base = _poly_divmod(base, mod, F)[1]
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, mod, F)
        base = _poly_mulmod(base, base, mod, F)
        e >>= 1
    return result


def _poly_monic(f, F):
    inv = F.inv(f[-1])
    return [F.mul(c, inv) for c in f]


def _poly_gcd(f, g, F):
    f, g = _trim(list(f), F), _trim(list(g), F)
    while g:
        f, g = g, _poly_divmod(f, g, F)[1]
    return _poly_monic(f, F) if f else f


def _split_linear_product(f, F, rng):
    """Roots of a monic squarefree f that is a product of distinct linears."""
    if len(f) == 1:
        return []
    if len(f) == 2:
        return [F.neg(f[0])]
    while True:
        delta = F.random(rng)
        h = _poly_powmod([delta, F.one], (F.q - 1) // 2, f, F)
        h = h + [F.zero] * (1 - len(h)) if h else [F.zero]
        h[0] = F.sub(h[0], F.one)
        d = _poly_gcd(f, h, F)
        if 1 < len(d) < len(f):
            rest = _poly_divmod(f, d, F)[0]
            return _split_linear_product(d, F, rng) + _split_linear_product(_poly_monic(rest, F), F, rng)


def poly_roots(coeffs, F, rng: Optional[random.Random] = None) -> list:
    """Distinct roots in the field F of a polynomial (coefficients low to high)."""
    f = _trim([F(c) if isinstance(c, int) else c for c in coeffs], F)
    if len(f) <= 1:
        raise ValueError("poly_roots needs a nonconstant polynomial")
    f = _poly_monic(f, F)
    rng = rng or random.Random(0)
    g = _frobenius_gcd(f, F)
    roots = _split_linear_product(g, F, rng)
    return sorted(roots, key=F.key)


def _frobenius_gcd(f, F):
    """gcd(f, x^q - x) for a monic f: the product of its distinct linear factors."""
    xq = _poly_powmod([F.zero, F.one], F.q, f, F)
    xq = xq + [F.zero] * (2 - len(xq))
    xq[1] = F.sub(xq[1], F.one)
    return _poly_gcd(f, _trim(xq, F), F) if _trim(list(xq), F) else f


def poly_splits(coeffs, F) -> bool:
    """True when the polynomial is a product of linear factors over F.

    Compares gcd(f, x^q - x) with the squarefree part f / gcd(f, f'), so no
    root has to be extracted.  Assumes deg f < char F.
    """
    f = _trim([F(c) if isinstance(c, int) else c for c in coeffs], F)
    if len(f) <= 1:
        raise ValueError("poly_splits needs a nonconstant polynomial")
    f = _poly_monic(f, F)
    deriv = _trim([F.mul_int(c, i) for i, c in enumerate(f)][1:], F)
    common = _poly_gcd(f, deriv, F)
    radical = _poly_monic(_poly_divmod(f, common, F)[0], F)
    return [F.key(c) for c in _frobenius_gcd(f, F)] == [F.key(c) for c in radical]


def poly_eval(coeffs, x, F):
    acc = F.zero
    for c in reversed(coeffs):
        acc = F.add(F.mul(acc, x), c)
    return acc


def _root_multiplicity_split(coeffs, F, roots) -> bool:
    """True when the polynomial is a product of linear factors over its roots."""
    f = _poly_monic(_trim(list(coeffs), F), F)
    for r in roots:
        while len(f) > 1:
            quot, rem = _poly_divmod(f, [F.neg(r), F.one], F)
            if rem:
                break
            f = quot
    return len(f) == 1


# ---------------------------------------------------------------------------
# 2-torsion and halving


def two_torsion_roots(curve: ReducedCurve, rng: Optional[random.Random] = None) -> list:
    """Roots of x^3 + Ax + B in the curve's field (0, 1 or 3 of them)."""
    F = curve.field
    r = curve.known_root
    if r is None:
        return poly_roots([curve.B, curve.A, F.zero, F.one], F, rng)
    # x^3 + Ax + B = (x - r)(x^2 + r x + r^2 + A)
    disc = F.sub(F.neg(F.mul_int(F.sqr(r), 3)), F.mul_int(curve.A, 4))
    s = F.sqrt(disc)
    if s is None:
        return [r]
    half = F.inv(F.mul_int(F.one, 2))
    nr = F.neg(r)
    roots = {F.key(x): x for x in (r, F.mul(F.add(nr, s), half), F.mul(F.sub(nr, s), half))}
    if len(roots) != 3:
        raise CurveError("repeated 2-torsion root on a nonsingular curve")
    return sorted(roots.values(), key=F.key)


def halve(curve: ReducedCurve, P, roots: Sequence) -> Optional[tuple]:
    """A point Q with 2Q = P, or None if P is not in 2E(F_q).

    Requires the full 2-torsion to be rational (three roots).  P is a double
    exactly when every x(P) - e_i is a square, with the difference at a
    2-torsion point replaced by the product of the other two.
    """
    if P is None:
        return None
    F = curve.field
    x0, _ = P
    diffs = [F.sub(x0, e) for e in roots]
    zero_at = [i for i, d in enumerate(diffs) if F.is_zero(d)]
    rts = []
    for i, d in enumerate(diffs):
        if zero_at and i == zero_at[0]:
            rts.append(F.zero)
            continue
        r = F.sqrt(d)
        if r is None:
            return None
        rts.append(r)
    r1, r2, r3 = rts
    x = F.add(x0, F.add(F.mul(r1, r2), F.add(F.mul(r1, r3), F.mul(r2, r3))))
    y = F.sqrt(curve.rhs(x))
    if y is None:
        raise CurveError("halving produced an x-coordinate off the curve")
    Q = (x, y)
    D = curve.double(Q)
    if D == P:
        return Q
    if D == curve.neg(P):
        return curve.neg(Q)
    raise CurveError("halving formula did not return a half")


def full_torsion_exponent(curve: ReducedCurve, roots: Sequence) -> tuple[int, list]:
    """Largest a with E[2^a] rational, plus the basis of E[2^j] for j = 1..a."""
    if len(roots) != 3:
        return 0, []
    F = curve.field
    basis = [((roots[0], F.zero), (roots[1], F.zero))]
    bound = v2(curve.q - 1)
    while len(basis) <= bound:
        T1, T2 = basis[-1]
        Q1 = halve(curve, T1, roots)
        if Q1 is None:
            break
        Q2 = halve(curve, T2, roots)
        if Q2 is None:
            break
        basis.append((Q1, Q2))
    return len(basis), basis


def halving_quartic(A, B, xi, F) -> list:
    """Coefficients (low to high) of the quartic whose roots are x(Q) with x(2Q) = xi."""
    four_xi = F.mul_int(xi, 4)
    return [
        F.sub(F.sqr(A), F.mul(four_xi, B)),
        F.sub(F.neg(F.mul(four_xi, A)), F.mul_int(B, 8)),
        F.neg(F.mul_int(A, 2)),
        F.neg(four_xi),
        F.one,
    ]


def halving_quartic_splits(curve: ReducedCurve, xi, rng: Optional[random.Random] = None) -> bool:
    """True when the halving quartic at x = xi is a product of linear factors."""
    F = curve.field
    quartic = halving_quartic(curve.A, curve.B, xi, F)
    roots = poly_roots(quartic, F, rng)
    return _root_multiplicity_split(quartic, F, roots)


def halving_quartic_roots(curve: ReducedCurve, xi, rng=None) -> list:
    F = curve.field
    return poly_roots(halving_quartic(curve.A, curve.B, xi, F), F, rng)


def two_sylow(
    curve: ReducedCurve,
    N: int,
    rng: random.Random,
    roots: Optional[Sequence] = None,
    quartic_check: bool = True,
) -> SylowShape:
    """2-Sylow shape (a, b) of a curve whose group order N is known.

    a comes from iterated halving; b = v2(N) - a is confirmed by finding a
    sampled point of exact 2-power order 2^b.  When a >= 2 the halving
    quartics at the E[2^(a-1)] basis must split and contain the halves found.
    """
    if N <= 0:
        raise ValueError("group order must be positive")
    if N % 2:
        return SylowShape(0, 0)
    F = curve.field
    v = v2(N)
    if roots is None:
        roots = two_torsion_roots(curve, rng)
    a, basis = full_torsion_exponent(curve, roots)
    b = v - a
    if a > b:
        raise CurveError(f"full 2^{a}-torsion exceeds the 2-part 2^{v} of N={N}")
    if (curve.q - 1) % (1 << a):
        raise CurveError(f"2^{a} does not divide q-1 = {curve.q - 1}")
    if a >= 2 and quartic_check:
        for T, Q in zip(basis[-2], basis[-1]):
            quartic = halving_quartic(curve.A, curve.B, T[0], F)
            if not poly_splits(quartic, F) or not F.is_zero(poly_eval(quartic, Q[0], F)):
                raise CurveError("halving quartic disagrees with the 2-descent halves")
    cof = N >> v
    for _ in range(SYLOW_SAMPLES):
        P = curve.mul(cof, random_point(curve, rng))
        k = 0
        while P is not None:
            P = curve.double(P)
            k += 1
            if k > b:
                raise CurveError(f"point of 2-order 2^{k} exceeds cyclic bound 2^{b}")
        if k == b:
            return SylowShape(a, b)
    raise CurveError(f"no point of 2-order 2^{b} found in {SYLOW_SAMPLES} samples")


def sylow_by_enumeration(curve: ReducedCurve) -> SylowShape:
    """Shape from the full point list (small fields only; test oracle)."""
    pts = curve.points()
    N = len(pts)
    if N % 2:
        return SylowShape(0, 0)
    v = v2(N)
    cof = N >> v
    max_k = 0
    for P in pts:
        Q = curve.mul(cof, P)
        k = 0
        while Q is not None:
            Q = curve.double(Q)
            k += 1
        max_k = max(max_k, k)
    return SylowShape(v - max_k, max_k)
