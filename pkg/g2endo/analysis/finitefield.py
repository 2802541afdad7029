"""
Finite Field Module

Hyperelliptic models y^2 = f(x), arithmetic in F_p and F_{p^2},
point counting and the Frobenius (Weil) polynomial at good primes.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property, lru_cache

import gmpy2
import numpy as np
from sympy import primerange

from g2endo.analysis.intpoly import IntPoly, discriminant, is_irreducible, twist
from g2endo.errors import BadReductionError, SingularCurveError

logger = logging.getLogger(__name__)

# number of F_{p^2} elements evaluated per numpy batch
BATCH_SIZE = 1 << 20


@dataclass(frozen=True)
class CurveModel:
    """Genus-2 model y^2 = f(x) with f of degree 5 or 6 over Z."""

    f: IntPoly

    def __post_init__(self):
        if self.f.degree not in (5, 6):
            raise SingularCurveError(f"Model must have degree 5 or 6, got {self.f.degree}")
        if self.disc == 0:
            raise SingularCurveError(f"Singular model: disc({self.f}) = 0")

    @classmethod
    def from_coeffs(cls, coeffs):
        return cls(IntPoly(coeffs))

    @classmethod
    def from_h_g(cls, h, g):
        """Model of y^2 + h(x)·y = g(x) after completing the square: f = 4g + h^2."""
        h, g = IntPoly(h), IntPoly(g)
        return cls(4 * g + h * h)

    @cached_property
    def disc(self):
        return discriminant(self.f)

    @cached_property
    def bad_primes(self):
        """Primes dividing 2·lc(f)·disc(f); raises if disc cannot be fully factored."""
        from g2endo.analysis.numfield import factor

        fac = factor(2 * self.f.lc * self.disc)
        if fac.cofactor != 1:
            from g2endo.errors import FactorizationIncomplete
            raise FactorizationIncomplete(f"Could not factor disc of {self.f}", fac)
        return frozenset(q for q, _ in fac.pairs)

    def is_good(self, p):
        return p > 2 and (2 * self.f.lc * self.disc) % p != 0

    def __str__(self):
        return f"y^2 = {self.f}"


def least_nonresidue(p):
    n = 2
    while gmpy2.legendre(n, p) != -1:
        n += 1
    return n


@dataclass(frozen=True)
class Fp2Element:
    """u + v·t in F_p[t]/(t^2 - n)."""

    u: int
    v: int
    p: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, 'u', self.u % self.p)
        object.__setattr__(self, 'v', self.v % self.p)

    def _lift(self, other):
        if isinstance(other, Fp2Element):
            return other
        return Fp2Element(other, 0, self.p, self.n)

    def __add__(self, other):
        o = self._lift(other)
        return Fp2Element(self.u + o.u, self.v + o.v, self.p, self.n)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        return Fp2Element(self.u - o.u, self.v - o.v, self.p, self.n)

    def __neg__(self):
        return Fp2Element(-self.u, -self.v, self.p, self.n)

    def __mul__(self, other):
        o = self._lift(other)
        return Fp2Element(self.u * o.u + self.n * self.v * o.v, self.u * o.v + self.v * o.u, self.p, self.n)

    __rmul__ = __mul__

    def __pow__(self, k):
        result = Fp2Element(1, 0, self.p, self.n)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self):
        return Fp2Element(self.u, -self.v, self.p, self.n)

    def frobenius(self):
        return self ** self.p

    def norm(self):
        return (self.u * self.u - self.n * self.v * self.v) % self.p

    def is_zero(self):
        return self.u == 0 and self.v == 0

    def quadratic_character(self):
        if self.is_zero():
            return 0
        # z is a square in F_{p^2} iff its norm is a square in F_p
        return int(gmpy2.legendre(self.norm(), self.p))


def _character_table(p):
    """chi(k) for k in 0..p-1 as an int64 array."""
    chi = -np.ones(p, dtype=np.int64)
    xs = np.arange(1, p, dtype=np.int64)
    chi[(xs * xs) % p] = 1
    chi[0] = 0
    return chi


def _count_affine_fp(coeffs, p):
    xs = np.arange(p, dtype=np.int64)
    vals = np.zeros(p, dtype=np.int64)
    for a in reversed(coeffs):
        vals = (vals * xs + a) % p
    return p + int(_character_table(p)[vals].sum())


def _count_affine_fp2(coeffs, p):
    n = least_nonresidue(p)
    chi = _character_table(p)
    us = np.arange(p, dtype=np.int64)
    rows = max(1, BATCH_SIZE // p)
    total = 0
    for start in range(0, p, rows):
        vs = np.arange(start, min(p, start + rows), dtype=np.int64)
        xu = np.tile(us, len(vs))
        xv = np.repeat(vs, p)
        re = np.zeros_like(xu)
        im = np.zeros_like(xu)
        for a in reversed(coeffs):
            # (re + im·t)(xu + xv·t) + a
            new_re = (re * xu + ((n * im) % p) * xv + a) % p
            im = (re * xv + im * xu) % p
            re = new_re
        norm = (re * re - ((n * im) % p) * im) % p
        total += int(chi[norm].sum())
    return p * p + total


def count_points(curve, q):
    """
    Count points on the smooth projective model over F_q, q in {p, p^2}.

    Args:
        curve (CurveModel): Model with good reduction at p
        q (int): Field size, an odd prime p or its square

    Returns:
        int: Number of F_q-points
    """
    if gmpy2.is_prime(q):
        p, r = q, 1
    else:
        p = int(gmpy2.isqrt(q))
        if p * p != q or not gmpy2.is_prime(p):
            raise BadReductionError(f"count_points supports q = p or p^2, got {q}")
        r = 2
    if p == 2:
        raise BadReductionError("Even characteristic is not supported")
    if not curve.is_good(p):
        raise BadReductionError(f"Bad reduction at {p} for {curve}")

    coeffs = [a % p for a in curve.f.coeffs]
    affine = _count_affine_fp(coeffs, p) if r == 1 else _count_affine_fp2(coeffs, p)

    if curve.f.degree == 5:
        infinity = 1
    elif r == 2:
        infinity = 2
    else:
        infinity = 2 if gmpy2.legendre(curve.f.lc % p, p) == 1 else 0
    return affine + infinity


@dataclass(frozen=True)
class FrobeniusData:
    p: int
    N1: int
    N2: int
    a: int
    b: int
    weil_poly: IntPoly
    ordinary: bool
    in_omega_prime: bool

    def to_dict(self):
        return {
            'p': self.p, 'N1': self.N1, 'N2': self.N2, 'a': self.a, 'b': self.b,
            'ordinary': self.ordinary, 'in_omega_prime': self.in_omega_prime,
        }


def weil_polynomial(p, a, b):
    return IntPoly((p * p, a * p, b, a, 1))


@lru_cache(maxsize=8192)
def frobenius_data(curve, p):
    """
    Frobenius data at a good odd prime p.

    a = N1 - p - 1 and b = (a^2 - p^2 - 1 + N2)/2, from the power sums
    s1 = -a and s2 = a^2 - 2b of the Weil polynomial roots.

    Args:
        curve (CurveModel): Genus-2 model
        p (int): Odd prime of good reduction

    Returns:
        FrobeniusData: Point counts, Weil polynomial and place predicates
    """
    n1 = count_points(curve, p)
    n2 = count_points(curve, p * p)
    a = n1 - p - 1
    twice_b = a * a - p * p - 1 + n2
    if twice_b % 2:
        raise BadReductionError(f"Odd 2b at p={p} for {curve}: N1={n1}, N2={n2}")
    b = twice_b // 2
    if a * a > 16 * p:
        raise BadReductionError(f"|a| exceeds 4*sqrt(p) at p={p} for {curve}")

    s1, s2 = -a, a * a - 2 * b
    assert n1 == p + 1 - s1 and n2 == p * p + 1 - s2

    weil = weil_polynomial(p, a, b)
    ordinary = b % p != 0
    in_omega = ordinary and is_irreducible(twist(weil, 4))
    return FrobeniusData(p, n1, n2, a, b, weil, ordinary, in_omega)


def good_primes(curve, bound, max_prime=2 ** 16):
    if bound > max_prime:
        raise BadReductionError(f"Prime bound {bound} exceeds the cap {max_prime}")
    return [int(p) for p in primerange(3, bound + 1) if curve.is_good(p)]


def frobenius_table(curve, bound, workers=1, max_prime=2 ** 16):
    """
    Frobenius data for every good prime up to bound, ascending.

    Args:
        curve (CurveModel): Genus-2 model
        bound (int): Largest prime
        workers (int): Threads used to compute distinct primes

    Returns:
        list: FrobeniusData in ascending prime order
    """
    primes = good_primes(curve, bound, max_prime)
    if workers <= 1:
        return [frobenius_data(curve, p) for p in primes]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda p: frobenius_data(curve, p), primes))


def frobenius_stream(curve, bound, max_prime=2 ** 16):
    """Lazily yield Frobenius data for good primes up to bound, ascending."""
    for p in good_primes(curve, bound, max_prime):
        yield frobenius_data(curve, p)
