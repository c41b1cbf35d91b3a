"""The 2-adic random-matrix model for volcano heights at anomalous primes.

For a matrix M = [[x, y], [z, w]] over the 2-adic integers with y odd, the
quantity r = (x - w)^2 + 4yz controls the volcano: its valuation k = v2(r)
and the squarefree class of r decide the height.  This module gives the
distribution of (k, class) in closed form, by exact enumeration modulo 2^K
and by sampling, and a brute-force count of the index-3 subgroups of
GL2(Z/2^m) that fix the proportion of each defect.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

__all__ = [
    "SqfClass",
    "ModelDistribution",
    "GroupOracleReport",
    "prob_valuation_class",
    "lemma_regime_prob",
    "regime_sum",
    "total_probability",
    "enumerate_model",
    "sample_model",
    "height_of",
    "height_model_prob",
    "height_class_sum",
    "conjecture_table",
    "group_order_oracle",
    "defect_proportion",
    "anomalous_series_total",
    "classify_residue",
]

Mass = Union[Fraction, float]


class SqfClass(enum.Enum):
    """Squarefree class of a nonzero 2-adic number."""

    ONE_MOD_8 = "1 mod 8"
    FIVE_MOD_8 = "5 mod 8"
    THREE_MOD_4 = "3 mod 4"
    TWO_MOD_4 = "2 mod 4"

    @property
    def crater_class(self) -> int:
        """Fundamental discriminant mod 8 for a field with this squarefree part."""
        return {"1 mod 8": 1, "5 mod 8": 5, "3 mod 4": 4, "2 mod 4": 0}[self.value]

    @classmethod
    def from_crater(cls, i: int) -> "SqfClass":
        for c in cls:
            if c.crater_class == i:
                return c
        raise ValueError(f"crater class must be one of 0, 1, 4, 5; got {i}")

    @classmethod
    def parse(cls, text: str) -> "SqfClass":
        for c in cls:
            if text in (c.value, c.name, c.value.replace(" ", "")):
                return c
        raise ValueError(f"unknown class {text!r}")

    def __str__(self):
        return self.value


CLASSES = tuple(SqfClass)


def _pow2(e: Fraction) -> Fraction:
    e = Fraction(e)
    if e.denominator != 1:
        raise ValueError(f"non-integral exponent {e}")
    return Fraction(2) ** int(e)


def prob_valuation_class(k: int, cls: SqfClass) -> Fraction:
    """P(v2(r) = k and sqf(r) in cls) for the y-odd Haar model."""
    if k < 0:
        return Fraction(0)
    if cls in (SqfClass.ONE_MOD_8, SqfClass.FIVE_MOD_8):
        return _pow2(-(k + 2)) if k % 2 == 0 else Fraction(0)
    if cls is SqfClass.THREE_MOD_4:
        return _pow2(-(k + 1)) if k % 2 == 0 and k >= 2 else Fraction(0)
    return _pow2(-k) if k % 2 == 1 and k >= 3 else Fraction(0)


def lemma_regime_prob(k: int, cls: SqfClass, regime: str, beta: Optional[int] = None) -> Fraction:
    """Mass of (k, cls) restricted to one comparison of v2(alpha^2) and v2(4yz).

    regime is "alpha-small" (v2(alpha^2) < v2(4yz)), "alpha-big" (>) or
    "alpha-equal" (both equal 2*beta).
    """
    zero = Fraction(0)
    half_k = Fraction(3 * k, 2)
    if regime == "alpha-small":
        if k % 2:
            return zero
        if cls in (SqfClass.ONE_MOD_8, SqfClass.FIVE_MOD_8):
            return _pow2(-(half_k + 2))
        if cls is SqfClass.THREE_MOD_4:
            return _pow2(-(half_k + 1)) if k > 0 else zero
        return zero
    if regime == "alpha-big":
        # v2(4yz) = k needs v2(z) = k - 2 >= 0
        if k < 2:
            return zero
        if cls in (SqfClass.ONE_MOD_8, SqfClass.FIVE_MOD_8):
            return _pow2(-(half_k + 2)) if k % 2 == 0 else zero
        if cls is SqfClass.THREE_MOD_4:
            return _pow2(-(half_k + 1)) if k % 2 == 0 else zero
        return _pow2(-(half_k - Fraction(1, 2))) if k % 2 == 1 and k >= 3 else zero
    if regime == "alpha-equal":
        if beta is None or beta < 1:
            raise ValueError("alpha-equal needs beta >= 1")
        if not 2 <= 2 * beta <= k - 1:
            return zero
        if cls in (SqfClass.ONE_MOD_8, SqfClass.FIVE_MOD_8):
            return _pow2(-(k + beta + 2)) if k % 2 == 0 else zero
        if cls is SqfClass.THREE_MOD_4:
            return _pow2(-(k + beta + 1)) if k % 2 == 0 else zero
        return _pow2(-(k + beta)) if k % 2 == 1 else zero
    raise ValueError(f"unknown regime {regime!r}")


def regime_sum(k: int, cls: SqfClass) -> Fraction:
    """Sum of the three regimes, with alpha-equal summed over every valid beta."""
    total = lemma_regime_prob(k, cls, "alpha-small") + lemma_regime_prob(k, cls, "alpha-big")
    for beta in range(1, k // 2 + 1):
        total += lemma_regime_prob(k, cls, "alpha-equal", beta)
    return total


def total_probability() -> Fraction:
    """Sum over all (k, class), as four exact geometric series."""
    # classes 1, 5 mod 8: sum_{j>=0} 2^-(2j+2) = 1/3 each
    even_from_0 = Fraction(1, 4) / (1 - Fraction(1, 4))
    # class 3 mod 4: sum_{j>=1} 2^-(2j+1) = 1/6
    three = Fraction(1, 8) / (1 - Fraction(1, 4))
    # class 2 mod 4: sum_{j>=1} 2^-(2j+1) = 1/6
    two = Fraction(1, 8) / (1 - Fraction(1, 4))
    return 2 * even_from_0 + three + two


def classify_residue(r: int, K: int) -> Optional[tuple[int, SqfClass]]:
    """(k, class) of r mod 2^K, or None when v2(r) > K - 5."""
    r %= 1 << K
    if r == 0:
        return None
    k = (r & -r).bit_length() - 1
    if k > K - 5:
        return None
    u = (r >> k) % 8
    if k % 2:
        return k, SqfClass.TWO_MOD_4
    if u == 1:
        return k, SqfClass.ONE_MOD_8
    if u == 5:
        return k, SqfClass.FIVE_MOD_8
    return k, SqfClass.THREE_MOD_4


@dataclass
class ModelDistribution:
    """Mass on (k, class) pairs plus a "deep" bin for undetermined valuations."""

    kind: str
    mass: dict = field(default_factory=dict)
    deep: Mass = 0
    K: Optional[int] = None
    n: Optional[int] = None
    seed: Optional[int] = None

    def get(self, k: int, cls: SqfClass) -> Mass:
        return self.mass.get((k, cls), Fraction(0) if self.kind != "sampled" else 0.0)

    def total(self) -> Mass:
        return sum(self.mass.values()) + self.deep

    def rows(self, k_max: Optional[int] = None):
        """(kind, K, n, seed, k, class, mass) rows sorted by k then class."""
        ks = sorted({k for k, _ in self.mass})
        if k_max is not None:
            ks = [k for k in range(k_max + 1)]
        for k in ks:
            for c in CLASSES:
                yield (self.kind, self.K, self.n, self.seed, k, c.value, self.get(k, c))


def _classify_counts(counts: np.ndarray, K: int) -> tuple[dict, int]:
    """Fold a histogram over residues mod 2^K into (k, class) counts."""
    out: dict = {}
    deep = 0
    for r in np.flatnonzero(counts):
        kc = classify_residue(int(r), K)
        c = int(counts[r])
        if kc is None:
            deep += c
        else:
            out[kc] = out.get(kc, 0) + c
    return out, deep


def _residue_histogram(K: int) -> tuple[np.ndarray, int]:
    """Counts of alpha^2 + 4yz mod 2^K over all alpha, z and odd y."""
    mod = 1 << K
    a = np.arange(mod, dtype=np.int64)
    sq = np.bincount(a * a % mod, minlength=mod)
    # z -> yz permutes Z/2^K for odd y, so each of the 2^(K-1) units
    # contributes the same multiset of 4yz as 4z
    fz = np.bincount(4 * a % mod, minlength=mod)
    sq_support = np.flatnonzero(sq)
    fz_support = np.flatnonzero(fz)
    idx = (sq_support[:, None] + fz_support[None, :]) % mod
    w = sq[sq_support][:, None] * fz[fz_support][None, :]
    hist = np.zeros(mod, dtype=np.int64)
    np.add.at(hist, idx.ravel(), w.ravel())
    units = mod // 2
    return hist * units, mod * mod * units


def _residue_histogram_full(K: int) -> tuple[np.ndarray, int]:
    """Same histogram from the uncollapsed triple loop (K <= 10)."""
    mod = 1 << K
    a = np.arange(mod, dtype=np.int64)
    hist = np.zeros(mod, dtype=np.int64)
    sq = a * a % mod
    for y in range(1, mod, 2):
        r = (sq[:, None] + 4 * y * a[None, :]) % mod
        hist += np.bincount(r.ravel(), minlength=mod)
    return hist, mod * mod * (mod // 2)


def enumerate_model(K: int, full: bool = False) -> ModelDistribution:
    """Exact counting measure of (k, class) over all triples mod 2^K."""
    if not 6 <= K <= 14:
        raise ValueError("enumeration needs 6 <= K <= 14")
    if full and K > 10:
        raise ValueError("the uncollapsed loop is limited to K <= 10")
    hist, total = (_residue_histogram_full if full else _residue_histogram)(K)
    counts, deep = _classify_counts(hist, K)
    mass = {kc: Fraction(c, total) for kc, c in counts.items()}
    return ModelDistribution("enumerated", mass, Fraction(deep, total), K=K)


def sample_model(n: int, seed: int = 0, K: int = 16, chunk: int = 1 << 16) -> ModelDistribution:
    """Empirical (k, class) frequencies from n uniform triples with y odd."""
    if n < 1:
        raise ValueError("need at least one sample")
    if not 6 <= K <= 30:
        raise ValueError("sampling needs 6 <= K <= 30")
    rng = np.random.Generator(np.random.PCG64(seed))
    mod = 1 << K
    counts: dict = {}
    deep = 0
    done = 0
    while done < n:
        size = min(chunk, n - done)
        alpha = rng.integers(0, mod, size=size, dtype=np.uint64)
        y = 2 * rng.integers(0, mod // 2, size=size, dtype=np.uint64) + 1
        z = rng.integers(0, mod, size=size, dtype=np.uint64)
        r = (alpha * alpha + np.uint64(4) * ((y * z) % np.uint64(mod))) % np.uint64(mod)
        hist = np.bincount(r.astype(np.int64), minlength=mod)
        c, d = _classify_counts(hist, K)
        for kc, v in c.items():
            counts[kc] = counts.get(kc, 0) + v
        deep += d
        done += size
    mass = {kc: v / n for kc, v in counts.items()}
    return ModelDistribution("sampled", mass, deep / n, K=K, n=n, seed=seed)


def height_of(m: int, k: int, cls: SqfClass) -> Fraction:
    """Model height H_M for defect parameter m and (k, class)."""
    if cls in (SqfClass.ONE_MOD_8, SqfClass.FIVE_MOD_8):
        return m + Fraction(k, 2)
    if cls is SqfClass.THREE_MOD_4:
        return m - 1 + Fraction(k, 2)
    return m - 1 + Fraction(k - 1, 2)


def _valuation_for_height(m: int, H: int, cls: SqfClass) -> int:
    if cls in (SqfClass.ONE_MOD_8, SqfClass.FIVE_MOD_8):
        return 2 * (H - m)
    if cls is SqfClass.THREE_MOD_4:
        return 2 * (H - m + 1)
    return 2 * (H - m) + 3


def height_model_prob(m: int, H: int, crater_class: int) -> Fraction:
    """P(H_M = H and crater class i) derived from the (k, class) law.

    The result is checked against 4^-(H-m+1) for classes 1, 5 and half that
    for classes 0, 4.
    """
    if m < 2 or H < m:
        raise ValueError("need H >= m >= 2")
    cls = SqfClass.from_crater(crater_class)
    k = _valuation_for_height(m, H, cls)
    if height_of(m, k, cls) != H:
        raise AssertionError("height inversion failed")
    prob = prob_valuation_class(k, cls)
    closed = Fraction(1, 4 ** (H - m + 1))
    if crater_class in (0, 4):
        closed /= 2
    if prob != closed:
        raise AssertionError(f"height law mismatch at m={m}, H={H}, class {crater_class}")
    return prob


def height_class_sum(crater_class: int, m: int = 2) -> Fraction:
    """Sum over all H >= m, as an exact geometric series."""
    first = height_model_prob(m, m, crater_class)
    ratio = height_model_prob(m, m + 1, crater_class) / first
    return first / (1 - ratio)


CRATER_ORDER = (1, 5, 0, 4)


def conjecture_table(m: int, H_max: int) -> dict:
    """Predicted share S'_m(i, H) of defect-(m+1, m) primes, with a tail column.

    Returns {i: {"H": {H: value}, "tail": mass at heights above H_max}}.
    """
    if m < 2 or H_max < m:
        raise ValueError("need H_max >= m >= 2")
    table = {}
    for i in CRATER_ORDER:
        row = {H: height_model_prob(m, H, i) for H in range(m, H_max + 1)}
        table[i] = {"H": row, "tail": height_class_sum(i, m) - sum(row.values())}
    return table


@dataclass(frozen=True)
class GroupOracleReport:
    """Brute-force counts for the index-3 subgroup G(2^m) of GL2(Z/2^m)."""

    m: int
    gl_order: int
    subgroup_order: int
    minus_identity_mod_lower: int
    minus_identity: int
    defect_proportion: Fraction
    printed_proportion: Fraction
    note: str


def _gl2_elements(mod: int):
    for a, b, c, d in itertools.product(range(mod), repeat=4):
        if (a * d - b * c) % 2:
            yield a, b, c, d


def group_order_oracle(m: int) -> GroupOracleReport:
    """Enumerate G(2^m): matrices that reduce mod 2 into {I, [[1,1],[0,1]]}.

    That order-2 subgroup of GL2(Z/2) fixes the rational 2-torsion point,
    so G(2^m) is the largest 2-adic image compatible with the pair.
    """
    if m not in (2, 3):
        raise ValueError("the oracle enumerates m = 2 or 3")
    mod = 1 << m
    lower = mod // 2
    gl = sub = minus_lower = minus = 0
    for a, b, c, d in _gl2_elements(mod):
        gl += 1
        if a % 2 == 1 and c % 2 == 0:
            sub += 1
            if (a + 1) % lower == 0 and b % lower == 0 and c % lower == 0 and (d + 1) % lower == 0:
                minus_lower += 1
            if (a + 1) % mod == 0 and b == 0 and c == 0 and (d + 1) % mod == 0:
                minus += 1
    prop = Fraction(minus, 2 * sub)
    printed = Fraction(1, 2 ** (4 * m + 2))
    note = (
        f"|G(2^{m})| = {sub} = 2^{sub.bit_length() - 1}, so one element equal to -I gives "
        f"a per-defect share of 1/2 * 1/{sub} = {prop}; the exponent 4m+2 would give "
        f"{printed}, and summing that over both defects and m >= 2 gives 1/480, not 1/30"
    )
    return GroupOracleReport(m, gl, sub, minus_lower, minus, prop, printed, note)


def defect_proportion(m: int) -> Fraction:
    """Share of primes that are anomalous with defect (m+1, m): 2^-(4m-2).

    Equal to 1/2 * 1/|G(2^m)| with |G(2^m)| = 2^(4m-3); pinned to the
    enumeration for m = 2, 3.
    """
    if m < 2:
        raise ValueError("defects start at m = 2")
    if m <= 3:
        return group_order_oracle(m).defect_proportion
    return Fraction(1, 2 ** (4 * m - 2))


def anomalous_series_total() -> Fraction:
    """Both orientations summed over m >= 2, as an exact geometric series."""
    first = defect_proportion(2)
    ratio = defect_proportion(3) / first
    return 2 * first / (1 - ratio)
