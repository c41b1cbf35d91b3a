"""2-isogenies, volcano geometry and the Frobenius-side isomorphism tests."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .arith import squarefree_part, v2
from .curve import ReducedCurve, two_torsion_roots

__all__ = [
    "IsogenyError",
    "TwoIsogeny",
    "velu2",
    "two_isogeny_neighbors",
    "level_above_floor",
    "VolcanoProfile",
    "volcano_profile",
    "FrobeniusRep",
    "frobenius_in_order",
    "frob_power",
    "heuberger_iso",
    "anomaly_predicate",
    "full_torsion_from_frobenius",
]


class IsogenyError(ArithmeticError):
    """A volcano or Frobenius computation contradicted the theory."""


@dataclass(frozen=True)
class TwoIsogeny:
    """The degree-2 map with kernel (x0, 0) and its image curve.

    On y^2 = x^3 + Ax + B with u = 3x0^2 + A the image is
    Y^2 = X^3 + (A - 5u)X + (B - 7x0u) and
    (x, y) -> (x + u/(x - x0), y (1 - u/(x - x0)^2)).
    The kernel of the dual map is the image point with X = -2x0.
    """

    domain: ReducedCurve
    codomain: ReducedCurve
    x0: object
    u: object

    def __call__(self, P):
        if P is None:
            return None
        F = self.domain.field
        x, y = P
        if x == self.x0:
            return None
        inv = F.inv(F.sub(x, self.x0))
        ui = F.mul(self.u, inv)
        X = F.add(x, ui)
        Y = F.mul(y, F.sub(F.one, F.mul(ui, inv)))
        return (X, Y)

    @property
    def dual_kernel_x(self):
        F = self.domain.field
        return F.neg(F.mul_int(self.x0, 2))


def velu2(curve: ReducedCurve, x0) -> TwoIsogeny:
    """Velu's 2-isogeny with kernel generated by (x0, 0)."""
    F = curve.field
    if not F.is_zero(curve.rhs(x0)):
        raise ValueError("kernel point is not of order 2")
    u = F.add(F.mul_int(F.sqr(x0), 3), curve.A)
    A2 = F.sub(curve.A, F.mul_int(u, 5))
    B2 = F.sub(curve.B, F.mul_int(F.mul(x0, u), 7))
    dual = F.neg(F.mul_int(x0, 2))
    image = ReducedCurve(F, A2, B2, curve.label + "/2", known_root=dual)
    return TwoIsogeny(curve, image, x0, u)


def two_isogeny_neighbors(curve: ReducedCurve, roots=None) -> list[TwoIsogeny]:
    """One 2-isogeny per rational 2-torsion point."""
    if roots is None:
        roots = two_torsion_roots(curve)
    return [velu2(curve, r) for r in roots]


def level_above_floor(curve: ReducedCurve, h_max: int, roots=None) -> int:
    """Distance from the curve to the floor of its 2-volcano.

    A curve is on the floor when exactly one 2-torsion point is rational.
    All non-backtracking paths are walked breadth first; the dual kernel of
    the step just taken identifies the edge leading back.
    """
    if roots is None:
        roots = two_torsion_roots(curve)
    if not roots:
        raise IsogenyError("odd-order curve has no 2-volcano level")
    frontier = [(curve, roots, None)]
    for depth in range(h_max + 1):
        if any(len(rts) == 1 for _, rts, _ in frontier):
            return depth
        nxt = []
        for E, rts, back in frontier:
            for r in rts:
                if back is not None and r == back:
                    continue
                phi = velu2(E, r)
                image = phi.codomain
                nxt.append((image, two_torsion_roots(image), image.known_root))
        frontier = nxt
    raise IsogenyError(f"no floor curve within {h_max} steps")


@dataclass(frozen=True)
class VolcanoProfile:
    """Discriminant data of Frobenius: t^2 - 4q = f^2 * dK."""

    t: int
    q: int
    D: int
    dK: int
    f: int
    h: int
    crater_class: int

    @property
    def disc(self) -> int:
        return self.t * self.t - 4 * self.q


def volcano_profile(t: int, q: int) -> VolcanoProfile:
    disc = t * t - 4 * q
    if disc >= 0:
        raise ValueError(f"t={t} is not an ordinary trace for q={q}")
    if math.gcd(t, q) > 1:
        raise ValueError(f"t={t} is a supersingular trace for q={q}")
    D = squarefree_part(disc)
    dK = D if D % 4 == 1 else 4 * D
    f2, rem = divmod(disc, dK)
    f = math.isqrt(f2)
    if rem or f * f != f2:
        raise IsogenyError(f"{disc} is not a square times {dK}")
    h = v2(f2) // 2
    return VolcanoProfile(t, q, D, dK, f, h, dK % 8)


@dataclass(frozen=True)
class FrobeniusRep:
    """Frobenius as a + b*w in the maximal order.

    w = sqrt(D) for D = 2, 3 mod 4 and (1 + sqrt(D))/2 for D = 1 mod 4.
    ``beta`` is b divided by the conductor of the curve higher in the volcano.
    """

    a: int
    b: int
    D: int
    beta: int
    s2: int
    vertical: bool

    @property
    def w_trace(self) -> int:
        return 1 if self.D % 4 == 1 else 0

    @property
    def w_norm(self) -> int:
        return (1 - self.D) // 4 if self.D % 4 == 1 else -self.D

    def norm(self) -> int:
        return self.a * self.a + self.a * self.b * self.w_trace + self.b * self.b * self.w_norm

    def trace(self) -> int:
        return 2 * self.a + self.b * self.w_trace


def frobenius_in_order(t: int, p: int, g: int, g_prime: int) -> FrobeniusRep:
    """Frobenius coordinates for the pair with conductors g and g'."""
    prof = volcano_profile(t, p)
    f, D = prof.f, prof.D
    if f % g or f % g_prime:
        raise IsogenyError("conductors must divide the conductor of Z[pi]")
    if D % 4 == 1:
        if (t - f) % 2:
            raise IsogenyError("t and f have different parity")
        a = (t - f) // 2
    else:
        if t % 2:
            raise IsogenyError("odd trace with D = 2, 3 mod 4")
        a = t // 2
    vg, vgp = v2(g), v2(g_prime)
    rep = FrobeniusRep(a, f, D, f // min(g, g_prime), max(vg, vgp), vg != vgp)
    if rep.norm() != p or rep.trace() != t:
        raise IsogenyError(f"Frobenius rep {rep} has wrong norm or trace")
    return rep


def frob_power(rep: FrobeniusRep, m: int) -> tuple[int, int]:
    """(a_m, b_m) with pi^m = a_m + b_m w."""
    ca, cb = 1, 0
    tr, nm = rep.w_trace, rep.w_norm
    for _ in range(m):
        # (ca + cb w)(a + b w) with w^2 = tr*w - nm
        ca, cb = ca * rep.a - cb * rep.b * nm, ca * rep.b + cb * rep.a + cb * rep.b * tr
    return ca, cb


def _v2_or_inf(n: int) -> float:
    return math.inf if n == 0 else v2(n)


def heuberger_iso(a_m: int, b_m: int, s2: int, vertical: bool = True) -> bool:
    """Isomorphism of the 2-parts over F_{q^m} from pi^m = a_m + b_m w.

    A horizontal pair (equal 2-adic conductors) is always isomorphic.
    """
    if b_m == 0:
        raise IsogenyError("pi^m is rational; the curve is not ordinary")
    if not vertical:
        return True
    return _v2_or_inf(a_m - 1) <= v2(b_m) - s2


def anomaly_predicate(a: int, b: int, s2: int) -> bool:
    """Frobenius-side test for an anomalous prime, given isomorphism over F_p."""
    return _v2_or_inf(a - 1) == 1 and _v2_or_inf(a + 1) > v2(b) - s2


def full_torsion_from_frobenius(a_m: int, b_m: int, v2_g: int) -> int:
    """Full-torsion exponent over F_{q^m} of the curve with conductor 2-valuation v2_g."""
    return int(min(_v2_or_inf(a_m - 1), v2(b_m) - v2_g))
