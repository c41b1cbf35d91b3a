"""Exact integer arithmetic and the finite fields F_p and F_{p^2}.

Field elements of F_p are plain ints in [0, p).  Elements of F_{p^2} are
:class:`Fp2Element` pairs ``(c0, c1)`` standing for ``c0 + c1*sqrt(ns)``.
Both context classes expose the same small method set (``add``, ``mul``,
``inv``, ``sqrt`` ...) so the curve code can be written once for either field.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

__all__ = [
    "FactorizationError",
    "v2",
    "is_prime",
    "factor",
    "squarefree_part",
    "legendre",
    "sqrt_mod",
    "smallest_nonresidue",
    "primes_up_to",
    "first_primes",
    "FpContext",
    "Fp2Context",
    "Fp2Element",
]

# Bound on |n| for squarefree_part / factor at desk scale.
FACTOR_LIMIT = 1 << 64
TRIAL_LIMIT = 10**6


class FactorizationError(ArithmeticError):
    """Input is outside the range this module promises to factor."""


def v2(n: int) -> int:
    """2-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("v2(0) is infinite; branch before calling")
    return ((n & -n).bit_length()) - 1


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(n: int) -> list[int]:
    """All primes <= n (sieve of Eratosthenes)."""
    if n < 2:
        return []
    import numpy as np

    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    sieve[4::2] = False
    for i in range(3, math.isqrt(n) + 1, 2):
        if sieve[i]:
            sieve[i * i :: 2 * i] = False
    return np.flatnonzero(sieve).tolist()


def first_primes(count: int) -> list[int]:
    """The first `count` primes."""
    if count <= 0:
        return []
    if count < 6:
        return [2, 3, 5, 7, 11][:count]
    # Rosser's bound p_n < n (ln n + ln ln n) for n >= 6
    bound = int(count * (math.log(count) + math.log(math.log(count)))) + 1
    return primes_up_to(bound)[:count]


_SMALL_PRIMES: list[int] = []


def _small_primes() -> list[int]:
    if not _SMALL_PRIMES:
        _SMALL_PRIMES.extend(primes_up_to(TRIAL_LIMIT))
    return _SMALL_PRIMES


def _pollard_brent(n: int, rng: random.Random) -> int:
    """Return a nontrivial factor of the odd composite n."""
    while True:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        m = 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factor(n: int) -> list[int]:
    """Prime factors of n >= 1 with multiplicity, in ascending order."""
    if n < 1:
        raise ValueError("factor expects a positive integer")
    if n >= FACTOR_LIMIT:
        raise FactorizationError(f"{n} exceeds the factoring range 2^64")
    out: list[int] = []
    for q in _small_primes():
        if q * q * q > n:
            # every remaining factor exceeds q, so at most two are left
            break
        if n % q == 0:
            while n % q == 0:
                out.append(q)
                n //= q
    if n == 1:
        return out
    r = math.isqrt(n)
    if r * r == n and r > 1:
        sub = factor(r)
        return sorted(out + sub + sub)
    stack = [n]
    rng = random.Random(n)
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out.append(m)
            continue
        d = _pollard_brent(m, rng)
        stack.extend((d, m // d))
    out.sort()
    return out


def squarefree_part(n: int) -> int:
    """The squarefree d with n = d * s^2, carrying the sign of n."""
    if n == 0:
        raise ValueError("squarefree part of 0 is undefined")
    if abs(n) >= FACTOR_LIMIT:
        raise FactorizationError(f"|{n}| exceeds the factoring range 2^64")
    d = -1 if n < 0 else 1
    prev, run = 0, 0
    for q in factor(abs(n)) + [0]:
        if q == prev:
            run += 1
            continue
        if run % 2:
            d *= prev
        prev, run = q, 1
    return d


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def smallest_nonresidue(p: int) -> int:
    n = 2
    while legendre(n, p) != -1:
        n += 1
    return n


def sqrt_mod(a: int, p: int, nonresidue: Optional[int] = None) -> Optional[int]:
    """Square root of a modulo the odd prime p, or None for a non-residue.

    The smaller of the two roots is returned.
    """
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        r = pow(a, (p + 1) // 4, p)
    else:
        q, s = p - 1, 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = nonresidue if nonresidue is not None else smallest_nonresidue(p)
        m, c = s, pow(z, q, p)
        t, r = pow(a, q, p), pow(a, (q + 1) // 2, p)
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(c, 1 << (m - i - 1), p)
            m, c = i, b * b % p
            t, r = t * c % p, r * b % p
    return min(r, p - r)


@dataclass(frozen=True)
class FpContext:
    """The prime field F_p; elements are ints in [0, p)."""

    p: int
    ns: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = self.p
        if p < 3 or not is_prime(p):
            raise ValueError(f"FpContext needs an odd prime, got {p}")
        object.__setattr__(self, "ns", smallest_nonresidue(p))

    @property
    def q(self) -> int:
        return self.p

    @property
    def degree(self) -> int:
        return 1

    zero = 0
    one = 1

    def __call__(self, n: int) -> int:
        return n % self.p

    def add(self, x, y):
        return (x + y) % self.p

    def sub(self, x, y):
        return (x - y) % self.p

    def neg(self, x):
        return -x % self.p

    def mul(self, x, y):
        return x * y % self.p

    def sqr(self, x):
        return x * x % self.p

    def mul_int(self, x, n: int):
        return x * n % self.p

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("inverse of zero in F_p")
        return pow(x, -1, self.p)

    def pow(self, x, e: int):
        return pow(x, e, self.p)

    def is_zero(self, x) -> bool:
        return x == 0

    def is_square(self, x) -> bool:
        return x == 0 or pow(x, (self.p - 1) // 2, self.p) == 1

    def sqrt(self, x) -> Optional[int]:
        return sqrt_mod(x, self.p, self.ns)

    def random(self, rng: random.Random) -> int:
        return rng.randrange(self.p)

    def elements(self):
        return range(self.p)

    def key(self, x):
        return x


class Fp2Element(NamedTuple):
    """c0 + c1*sqrt(ns) with residues reduced mod p."""

    c0: int
    c1: int

    def __str__(self):
        return f"{self.c0}+{self.c1}i"


@dataclass(frozen=True)
class Fp2Context:
    """F_{p^2} = F_p(sqrt(ns)) for the smallest quadratic non-residue ns."""

    p: int
    ns: int = field(default=0)

    def __post_init__(self):
        p = self.p
        if p < 3 or not is_prime(p):
            raise ValueError(f"Fp2Context needs an odd prime, got {p}")
        if self.ns == 0:
            object.__setattr__(self, "ns", smallest_nonresidue(p))
        elif legendre(self.ns, p) != -1:
            raise ValueError(f"{self.ns} is a square mod {p}")

    @property
    def q(self) -> int:
        return self.p * self.p

    @property
    def degree(self) -> int:
        return 2

    @property
    def zero(self) -> Fp2Element:
        return Fp2Element(0, 0)

    @property
    def one(self) -> Fp2Element:
        return Fp2Element(1, 0)

    @property
    def base(self) -> FpContext:
        return FpContext(self.p)

    def __call__(self, c0, c1: int = 0) -> Fp2Element:
        if isinstance(c0, tuple):
            c0, c1 = c0
        return Fp2Element(c0 % self.p, c1 % self.p)

    def add(self, x, y):
        p = self.p
        return Fp2Element((x[0] + y[0]) % p, (x[1] + y[1]) % p)

    def sub(self, x, y):
        p = self.p
        return Fp2Element((x[0] - y[0]) % p, (x[1] - y[1]) % p)

    def neg(self, x):
        p = self.p
        return Fp2Element(-x[0] % p, -x[1] % p)

    def mul(self, x, y):
        p = self.p
        a, b = x
        c, d = y
        return Fp2Element((a * c + self.ns * b * d) % p, (a * d + b * c) % p)

    def sqr(self, x):
        p = self.p
        a, b = x
        return Fp2Element((a * a + self.ns * b * b) % p, 2 * a * b % p)

    def mul_int(self, x, n: int):
        p = self.p
        return Fp2Element(x[0] * n % p, x[1] * n % p)

    def norm(self, x) -> int:
        return (x[0] * x[0] - self.ns * x[1] * x[1]) % self.p

    def conj(self, x):
        return Fp2Element(x[0], -x[1] % self.p)

    def inv(self, x):
        n = self.norm(x)
        if n == 0:
            raise ZeroDivisionError("inverse of zero in F_p^2")
        ninv = pow(n, -1, self.p)
        p = self.p
        return Fp2Element(x[0] * ninv % p, -x[1] * ninv % p)

    def pow(self, x, e: int):
        if e < 0:
            x, e = self.inv(x), -e
        result = self.one
        while e:
            if e & 1:
                result = self.mul(result, x)
            x = self.sqr(x)
            e >>= 1
        return result

    def is_zero(self, x) -> bool:
        return x[0] == 0 and x[1] == 0

    def is_square(self, x) -> bool:
        # every element of F_p is a square in F_{p^2}; otherwise test the norm
        return legendre(self.norm(x), self.p) >= 0

    def sqrt(self, x) -> Optional[Fp2Element]:
        p, ns = self.p, self.ns
        a, b = x
        if b == 0:
            r = sqrt_mod(a, p, ns)
            if r is not None:
                return Fp2Element(r, 0)
            # a/ns is then a square in F_p and sqrt(a) = sqrt(a/ns)*sqrt(ns)
            r = sqrt_mod(a * pow(ns, -1, p), p, ns)
            return Fp2Element(0, r)
        s = sqrt_mod(self.norm(x), p, ns)
        if s is None:
            return None
        half = (p + 1) // 2
        u2 = (a + s) * half % p
        u = sqrt_mod(u2, p, ns)
        if u is None or u == 0:
            u2 = (a - s) * half % p
            u = sqrt_mod(u2, p, ns)
        v = b * pow(2 * u, -1, p) % p
        r = Fp2Element(u, v)
        if self.sqr(r) != (a, b):
            raise ArithmeticError(f"F_p^2 square root failed for {x} mod {p}")
        return r

    def random(self, rng: random.Random) -> Fp2Element:
        return Fp2Element(rng.randrange(self.p), rng.randrange(self.p))

    def elements(self):
        p = self.p
        return (Fp2Element(a, b) for a in range(p) for b in range(p))

    def key(self, x):
        return (x[0], x[1])
