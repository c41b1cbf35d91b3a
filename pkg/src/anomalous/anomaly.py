"""Rational 2-isogenous pairs and the per-prime anomaly classifier."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .arith import is_prime, v2
from .curve import (
    BadReduction,
    CurveError,
    CurveModel,
    ReducedCurve,
    SylowShape,
    count_points_fp,
    order_ext,
    prime_rng,
    reduce_mod_p,
    two_sylow,
    two_torsion_roots,
)
from .isogeny import (
    IsogenyError,
    VolcanoProfile,
    anomaly_predicate,
    frob_power,
    frobenius_in_order,
    full_torsion_from_frobenius,
    heuberger_iso,
    level_above_floor,
    velu2,
    volcano_profile,
)

__all__ = [
    "InconsistencyError",
    "PairError",
    "RationalPair",
    "PrimeRecord",
    "STATUSES",
    "builtin_pairs",
    "get_builtin",
    "load_pair",
    "classify_prime",
]

STATUSES = (
    "bad",
    "supersingular",
    "skip_3mod4",
    "skip_2mod4",
    "non_isomorphic",
    "isomorphic",
    "anomalous",
)

DEFAULT_AUDIT_RATE = 0.01


class InconsistencyError(ArithmeticError):
    """Two independent computations disagreed at a prime."""

    def __init__(self, p: int, message: str):
        super().__init__(f"p={p}: {message}")
        self.p = p
        self.message = message

    def __reduce__(self):
        return (type(self), (self.p, self.message))


class PairError(ValueError):
    """A pair description is malformed or not a rational 2-isogeny."""


def _velu_j_over_q(model: CurveModel, x: Fraction) -> Fraction:
    A = Fraction(-27 * model.c4)
    B = Fraction(-54 * model.c6)
    x0 = model.short_x(x)
    u = 3 * x0 * x0 + A
    A2, B2 = A - 5 * u, B - 7 * x0 * u
    return 1728 * 4 * A2**3 / (4 * A2**3 + 27 * B2 * B2)


@dataclass(frozen=True)
class RationalPair:
    """E, E' = E/<(kernel_x, y)> over Q, as integral models."""

    label: str
    E: CurveModel
    Ep: CurveModel
    kernel_x: Fraction
    dual_x: Fraction = field(init=False, compare=False)
    conductor_disc: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        kx = Fraction(self.kernel_x)
        object.__setattr__(self, "kernel_x", kx)
        if not self.E.is_two_torsion_x(kx):
            raise PairError(f"{self.label}: x={kx} is not a 2-torsion point of E")
        if _velu_j_over_q(self.E, kx) != self.Ep.j:
            raise PairError(f"{self.label}: E' is not the 2-isogenous image of E")
        self._check_reductions()
        # a rational 2-torsion point of E' gives a known cubic root mod p
        roots = self.Ep.rational_two_torsion_x()
        if not roots:
            raise PairError(f"{self.label}: E' has no rational 2-torsion point")
        object.__setattr__(self, "dual_x", roots[0])
        object.__setattr__(self, "conductor_disc", self.E.disc * self.Ep.disc)

    def _check_reductions(self, count: int = 5):
        p, done = 5, 0
        while done < count:
            p += 1
            if not is_prime(p) or not self.is_good(p):
                continue
            if Fraction(self.kernel_x).denominator % p == 0:
                continue
            phi = velu2(self.reduce_E(p), reduce_mod_p(self.E, p, self.kernel_x).known_root)
            if phi.codomain.j_invariant() != reduce_mod_p(self.Ep, p).j_invariant():
                raise PairError(f"{self.label}: Velu image disagrees with E' mod {p}")
            done += 1

    def is_good(self, p: int) -> bool:
        return self.E.disc % p != 0 and self.Ep.disc % p != 0

    def reduce_E(self, p: int) -> ReducedCurve:
        return reduce_mod_p(self.E, p, self.kernel_x)

    def reduce_Ep(self, p: int) -> ReducedCurve:
        return reduce_mod_p(self.Ep, p, self.dual_x)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "E": [str(a) for a in self.E.ainvs],
            "Eprime": [str(a) for a in self.Ep.ainvs],
            "kernel_x": f"{self.kernel_x.numerator}/{self.kernel_x.denominator}",
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RationalPair":
        try:
            label = str(obj["label"])
            E = CurveModel.from_ainvs(obj["E"], label + ":E")
            Ep = CurveModel.from_ainvs(obj["Eprime"], label + ":E'")
            kx = Fraction(str(obj["kernel_x"]))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise PairError(f"malformed pair description: {exc}") from exc
        return cls(label, E, Ep, kx)


def load_pair(path) -> RationalPair:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise PairError(f"cannot read pair file {path}: {exc}") from exc
    return RationalPair.from_json(obj)


# (label, E, E', kernel x on E).  Cremona labels; the LMFDB-labelled pairs
# are stored under their LMFDB names with the matching Cremona models.
_BUILTIN = [
    # y^2 = x(x+6)(x+12) and its image under the isogeny with kernel (0, 0)
    ("example1.1", [0, 18, 0, 72, 0], [0, -36, 0, 36, 0], "0"),
    ("69a", [1, 0, 1, -16, -25], [1, 0, 1, -1, -1], "-9/4"),
    ("77c", [1, 1, 0, 4, 11], [1, 1, 0, -51, 110], "-2"),
    ("84b", [0, -1, 0, -1, -2], [0, -1, 0, -36, -72], "2"),
    ("99a", [1, -1, 1, -2, 0], [1, -1, 1, -17, 30], "-1"),
    ("99c", [1, -1, 0, -15, 8], [1, -1, 0, -150, -667], "4"),
    ("132a", [0, 1, 0, 3, 0], [0, 1, 0, -12, -12], "0"),
    ("132b", [0, -1, 0, -77, 330], [0, -1, 0, -1292, 18312], "-10"),
    ("138a", [1, 1, 0, -1, 1], [1, 1, 0, -31, 55], "-2"),
    ("141b", [1, 1, 1, -8, -16], [1, 1, 1, -143, -718], "3"),
    ("154a", [1, -1, 0, -29, 69], [1, -1, 0, -469, 4029], "-6"),
    ("154c", [1, 1, 0, -14, -28], [1, 1, 0, -234, -1480], "4"),
    ("155b", [1, 1, 1, -1, -2], [1, 1, 1, -26, -62], "1"),
    ("156a", [0, -1, 0, -5, 6], [0, -1, 0, -20, -24], "2"),
    ("10608y", [0, 1, 0, 13, 0], [0, 1, 0, -52, -52], "0"),
    # torsion Z/2 x Z/8 over Z/2 x Z/4
    ("210e", [1, 0, 0, -1070, 7812], [1, 0, 0, -7550, -247500], "28"),
    # every anomalous prime has defect (3,2)
    ("1200e", [0, -1, 0, -4008, 46512], [0, -1, 0, -54008, 4846512], "-68"),
]

_CATALOG: dict[str, RationalPair] = {}


def builtin_pairs() -> dict[str, RationalPair]:
    """The catalog of built-in pairs, verified on first use."""
    if not _CATALOG:
        for label, e, ep, kx in _BUILTIN:
            E = CurveModel.from_ainvs(e, label + ":E")
            Ep = CurveModel.from_ainvs(ep, label + ":E'")
            _CATALOG[label] = RationalPair(label, E, Ep, Fraction(kx))
    return dict(_CATALOG)


def get_builtin(label: str) -> RationalPair:
    pairs = builtin_pairs()
    if label not in pairs:
        raise PairError(f"unknown built-in pair {label!r}; choose from {sorted(pairs)}")
    return pairs[label]


# ---------------------------------------------------------------------------
# classification


@dataclass
class PrimeRecord:
    """Verdict and supporting data for one prime."""

    p: int
    status: str
    t: Optional[int] = None
    profile: Optional[VolcanoProfile] = None
    level_E: Optional[int] = None
    level_Ep: Optional[int] = None
    sylow_E_p: Optional[SylowShape] = None
    sylow_Ep_p: Optional[SylowShape] = None
    sylow_E_p2: Optional[SylowShape] = None
    sylow_Ep_p2: Optional[SylowShape] = None
    defect: Optional[tuple[int, int]] = None
    m: Optional[int] = None
    crosscheck_ok: bool = True

    @property
    def good(self) -> bool:
        return self.status != "bad"

    @property
    def iso_over_p(self) -> Optional[bool]:
        if self.sylow_E_p is None or self.sylow_Ep_p is None:
            return None
        return self.sylow_E_p == self.sylow_Ep_p


def _audit(seed, p: int, rate: float) -> bool:
    return rate > 0 and prime_rng(seed, p, "audit").random() < rate


def _checked_order(Ec: ReducedCurve, Epc: ReducedCurve, seed) -> int:
    p = Ec.p
    N = count_points_fp(Ec, prime_rng(seed, p, "count"))
    rng = prime_rng(seed, p, "order-check")
    from .curve import random_point

    for _ in range(2):
        if Epc.mul(N, random_point(Epc, rng)) is not None:
            raise InconsistencyError(p, "isogenous curves have different orders")
    return N


def _sylow_p2(Ec: ReducedCurve, N2: int, seed, tag: str) -> SylowShape:
    curve2 = Ec.base_extend()
    return two_sylow(curve2, N2, prime_rng(seed, Ec.p, tag))


def classify_prime(
    pair: RationalPair,
    p: int,
    seed=0,
    audit_rate: float = DEFAULT_AUDIT_RATE,
) -> PrimeRecord:
    """Classify one prime for the pair; raises InconsistencyError on any crosscheck failure."""
    if p < 5:
        return PrimeRecord(p, "bad")
    if not pair.is_good(p):
        return PrimeRecord(p, "bad")
    try:
        Ec, Epc = pair.reduce_E(p), pair.reduce_Ep(p)
    except BadReduction:
        return PrimeRecord(p, "bad")
    try:
        return _classify_good(Ec, Epc, p, seed, audit_rate)
    except (CurveError, IsogenyError) as exc:
        raise InconsistencyError(p, str(exc)) from exc


def _classify_good(Ec, Epc, p, seed, audit_rate) -> PrimeRecord:
    N = _checked_order(Ec, Epc, seed)
    t = p + 1 - N
    N2 = order_ext(t, p, 2)
    roots_E, roots_Ep = two_torsion_roots(Ec), two_torsion_roots(Epc)
    rec = PrimeRecord(p, "", t)
    rec.sylow_E_p = two_sylow(Ec, N, prime_rng(seed, p, "sylow-E"), roots_E)
    rec.sylow_Ep_p = two_sylow(Epc, N, prime_rng(seed, p, "sylow-Ep"), roots_Ep)
    audit = _audit(seed, p, audit_rate)

    if t == 0:
        rec.status = "supersingular"
        if audit:
            # over F_{p^2} both groups are Z/(p+1) x Z/(p+1)
            want = SylowShape(v2(p + 1), v2(p + 1))
            rec.sylow_E_p2 = _sylow_p2(Ec, N2, seed, "sylow2-E")
            rec.sylow_Ep_p2 = _sylow_p2(Epc, N2, seed, "sylow2-Ep")
            if rec.sylow_E_p2 != want or rec.sylow_Ep_p2 != want:
                raise InconsistencyError(p, "supersingular group over F_p^2 has the wrong shape")
        return rec

    prof = volcano_profile(t, p)
    rec.profile = prof
    h_max = prof.h + 1
    rec.level_E = level_above_floor(Ec, h_max, roots_E)
    rec.level_Ep = level_above_floor(Epc, h_max, roots_Ep)
    _check_levels(rec)
    g_E = prof.f >> rec.level_E
    g_Ep = prof.f >> rec.level_Ep
    rep = frobenius_in_order(t, p, g_E, g_Ep)
    # vertical edges separate levels; the walk fixes v2 of each conductor
    _check_frobenius_p(rec, rep, g_E, g_Ep)
    if t % 4 == 2:
        _check_height_increment(rec)

    if p % 4 == 3:
        rec.status = "skip_3mod4"
    elif N % 4 == 2:
        rec.status = "skip_2mod4"
    elif not rec.iso_over_p:
        rec.status = "non_isomorphic"
    if rec.status and not audit:
        return rec

    rec.sylow_E_p2 = _sylow_p2(Ec, N2, seed, "sylow2-E")
    rec.sylow_Ep_p2 = _sylow_p2(Epc, N2, seed, "sylow2-Ep")
    iso2 = rec.sylow_E_p2 == rec.sylow_Ep_p2
    _check_frobenius_p2(rec, rep, g_E, g_Ep)
    if rec.status:
        # audited skip: an isomorphism over F_p must persist over F_{p^2}
        if rec.iso_over_p and not iso2:
            raise InconsistencyError(p, f"{rec.status} prime is anomalous")
        return rec

    if iso2:
        rec.status = "isomorphic"
        return rec
    rec.status = "anomalous"
    rec.defect = (rec.sylow_E_p2.a, rec.sylow_Ep_p2.a)
    rec.m = v2(rep.beta)
    _check_anomalous(rec, rep)
    return rec


def _check_levels(rec: PrimeRecord):
    h = rec.profile.h
    lo, hi = sorted((rec.level_E, rec.level_Ep))
    if hi > h:
        raise InconsistencyError(rec.p, f"level {hi} above the crater height {h}")
    if hi - lo > 1:
        raise InconsistencyError(rec.p, "2-isogenous curves are more than one level apart")


def _check_frobenius_p(rec, rep, g_E, g_Ep):
    a1, b1 = frob_power(rep, 1)
    for shape, g in ((rec.sylow_E_p, g_E), (rec.sylow_Ep_p, g_Ep)):
        if full_torsion_from_frobenius(a1, b1, v2(g)) != shape.a:
            raise InconsistencyError(rec.p, "Frobenius and halving disagree on full torsion over F_p")
    if heuberger_iso(a1, b1, rep.s2, rep.vertical) != rec.iso_over_p:
        raise InconsistencyError(rec.p, "isomorphism criterion disagrees with Sylow shapes over F_p")


def _check_frobenius_p2(rec, rep, g_E, g_Ep):
    a2, b2 = frob_power(rep, 2)
    for shape, g in ((rec.sylow_E_p2, g_E), (rec.sylow_Ep_p2, g_Ep)):
        if full_torsion_from_frobenius(a2, b2, v2(g)) != shape.a:
            raise InconsistencyError(rec.p, "Frobenius and halving disagree on full torsion over F_p^2")
    iso2 = rec.sylow_E_p2 == rec.sylow_Ep_p2
    if heuberger_iso(a2, b2, rep.s2, rep.vertical) != iso2:
        raise InconsistencyError(rec.p, "isomorphism criterion disagrees with Sylow shapes over F_p^2")
    if rec.iso_over_p:
        predicted = rep.vertical and anomaly_predicate(rep.a, rep.b, rep.s2)
        if predicted != (not iso2):
            raise InconsistencyError(rec.p, "anomaly predicate disagrees with Sylow shapes")


def _check_height_increment(rec: PrimeRecord):
    p, t = rec.p, rec.t
    prof2 = volcano_profile(t * t - 2 * p, p * p)
    if prof2.h != rec.profile.h + 1:
        raise InconsistencyError(p, "volcano over F_p^2 is not one level higher")


def _check_anomalous(rec: PrimeRecord, rep):
    p, m = rec.p, rec.m
    problems = []
    if p % 4 != 1:
        problems.append("p is not 1 mod 4")
    if rec.sylow_E_p != (1, 1) or rec.sylow_Ep_p != (1, 1):
        problems.append("Sylow shapes over F_p are not both (1,1)")
    if rec.t % 4 != 2:
        problems.append("trace is not 2 mod 4")
    if m < 2:
        problems.append(f"m = {m} < 2")
    # the curve higher in the volcano carries the extra torsion
    upper_first = rec.level_E > rec.level_Ep
    want = (m + 1, m) if upper_first else (m, m + 1)
    if rec.defect != want:
        problems.append(f"defect {rec.defect} but Frobenius predicts {want}")
    if rec.level_E == rec.level_Ep or max(rec.level_E, rec.level_Ep) < 2:
        problems.append("levels are not vertical with top level >= 2")
    if problems:
        rec.crosscheck_ok = False
        raise InconsistencyError(p, "; ".join(problems))
