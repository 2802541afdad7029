"""
Exact Integer Polynomial Module

Univariate polynomials over Z with resultants, discriminants, the twist
f{m} (roots raised to the m-th power), exact irreducibility for degree
at most 6, perfect-square detection and Galois S_n/A_n certificates.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from math import comb, isqrt

import gmpy2
from sympy import Poly, divisors, primerange, resultant as sympy_resultant, symbols
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_ddf_zassenhaus, gf_from_int_poly, gf_monic

from g2endo.errors import PolynomialError

logger = logging.getLogger(__name__)

_X, _Y = symbols('x y')

# primes used by the mod-p degree-pattern pre-filter
PREFILTER_PRIMES = (3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


@dataclass(frozen=True)
class IntPoly:
    """Polynomial with integer coefficients in ascending degree order."""

    coeffs: tuple = ()

    def __post_init__(self):
        c = [int(a) for a in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, 'coeffs', tuple(c))

    @classmethod
    def monomial(cls, k, c=1):
        return cls((0,) * k + (c,))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def lc(self):
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self):
        return not self.coeffs

    def is_monic(self):
        return self.lc == 1

    def __call__(self, x):
        acc = 0
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return acc

    def __neg__(self):
        return IntPoly(-a for a in self.coeffs)

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return IntPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if self.is_zero() or other.is_zero():
            return IntPoly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k):
        result = IntPoly((1,))
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def derivative(self):
        return IntPoly(i * a for i, a in enumerate(self.coeffs) if i)

    def content(self):
        g = 0
        for a in self.coeffs:
            g = gmpy2.gcd(g, a)
        return int(g)

    def primitive_part(self):
        c = self.content()
        if c == 0:
            return self
        if self.lc < 0:
            c = -c
        return IntPoly(a // c for a in self.coeffs)

    def compose_linear(self, s, r):
        """f(s·x + r)."""
        result = IntPoly()
        lin = IntPoly((r, s))
        for a in reversed(self.coeffs):
            result = result * lin + a
        return result

    def reverse(self, n=None):
        """x^n · f(1/x), with n defaulting to the degree."""
        n = self.degree if n is None else n
        padded = self.coeffs + (0,) * (n + 1 - len(self.coeffs))
        return IntPoly(reversed(padded))

    def exact_quotient(self, divisor):
        """Quotient when divisor divides self over Z, else None."""
        divisor = _as_poly(divisor)
        if divisor.is_zero():
            raise PolynomialError("Division by the zero polynomial")
        rem = list(self.coeffs)
        dn, dl = divisor.degree, divisor.lc
        if len(rem) - 1 < dn:
            return IntPoly() if not rem else None
        quot = [0] * (len(rem) - dn)
        for k in range(len(rem) - 1 - dn, -1, -1):
            top = rem[k + dn]
            if top % dl:
                return None
            q = top // dl
            quot[k] = q
            if q:
                for j, b in enumerate(divisor.coeffs):
                    rem[k + j] -= q * b
        if any(rem):
            return None
        return IntPoly(quot)

    def to_sympy(self, gen=_X):
        return Poly(list(reversed(self.coeffs)) or [0], gen, domain=ZZ)

    def __str__(self):
        if not self.coeffs:
            return '0'
        terms = []
        for k in range(self.degree, -1, -1):
            a = self.coeffs[k]
            if a == 0:
                continue
            sign = '-' if a < 0 else '+'
            mag = abs(a)
            if k == 0:
                body = str(mag)
            else:
                power = 'x' if k == 1 else f'x^{k}'
                body = power if mag == 1 else f'{mag}*{power}'
            terms.append((sign, body))
        first_sign, first_body = terms[0]
        text = ('-' if first_sign == '-' else '') + first_body
        for sign, body in terms[1:]:
            text += f' {sign} {body}'
        return text


def _as_poly(value):
    if isinstance(value, IntPoly):
        return value
    return IntPoly((value,))


def resultant(f, g):
    """
    Res(f, g) = lc(f)^deg(g) · prod over roots a of f of g(a).

    Args:
        f (IntPoly): Nonzero polynomial
        g (IntPoly): Nonzero polynomial

    Returns:
        int: The resultant
    """
    if f.is_zero() or g.is_zero():
        raise PolynomialError("Resultant of the zero polynomial")
    if g.degree == 0:
        return g.lc ** f.degree
    if f.degree == 0:
        return f.lc ** g.degree
    return int(f.to_sympy().resultant(g.to_sympy()))


def discriminant(f):
    """disc(f) = (-1)^(n(n-1)/2) · Res(f, f') / lc(f)."""
    n = f.degree
    if n < 1:
        raise PolynomialError(f"Discriminant of a constant polynomial {f}")
    r = resultant(f, f.derivative())
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    q, rem = divmod(sign * r, f.lc)
    if rem:
        raise PolynomialError(f"lc does not divide Res(f, f') for {f}")
    return q


def _graeffe2(f):
    # f(x) = E(x^2) + x·O(x^2);  f{2}(y) = (-1)^n (E(y)^2 - y·O(y)^2)
    even = IntPoly(f.coeffs[0::2])
    odd = IntPoly(f.coeffs[1::2])
    g = even * even - IntPoly((0, 1)) * odd * odd
    return -g if f.degree % 2 else g


def _graeffe3(f):
    # f(x) = A(x^3) + x·B(x^3) + x^2·C(x^3);  f{3} = A^3 + yB^3 + y^2C^3 - 3yABC
    a = IntPoly(f.coeffs[0::3])
    b = IntPoly(f.coeffs[1::3])
    c = IntPoly(f.coeffs[2::3])
    y = IntPoly((0, 1))
    return a ** 3 + y * b ** 3 + y * y * c ** 3 - 3 * y * a * b * c


def twist_by_resultant(f, m):
    """f{m} computed directly as Res_y(f(y), x - y^m)."""
    if not f.is_monic():
        raise PolynomialError(f"twist needs a monic polynomial, got {f}")
    expr = sympy_resultant(f.to_sympy(_Y).as_expr(), _X - _Y ** m, _Y)
    coeffs = Poly(expr, _X, domain=ZZ).all_coeffs()
    g = IntPoly(reversed([int(c) for c in coeffs]))
    return -g if g.lc < 0 else g


def twist(f, m):
    """
    The monic polynomial whose roots are the m-th powers of the roots of f.

    Factors 2 and 3 of m go through multisection (Graeffe) steps, any
    remaining factor through the resultant Res_y(f(y), x - y^m).

    Args:
        f (IntPoly): Monic integer polynomial
        m (int): Exponent, m >= 1

    Returns:
        IntPoly: f{m}
    """
    if not f.is_monic():
        raise PolynomialError(f"twist needs a monic polynomial, got {f}")
    if m < 1:
        raise PolynomialError(f"twist exponent must be positive, got {m}")

    result, rest = f, m
    while rest % 2 == 0:
        result = _graeffe2(result)
        rest //= 2
    while rest % 3 == 0:
        result = _graeffe3(result)
        rest //= 3
    if rest > 1:
        result = twist_by_resultant(result, rest)

    n = f.degree
    sign = -1 if n % 2 else 1
    expected = sign * (sign * f.coeffs[0]) ** m if f.coeffs else 0
    if not result.is_monic() or (n > 0 and result.coeffs[0] != expected):
        raise PolynomialError(f"twist normalization failed for {f}, m={m}")
    return result


def mignotte_bound(f, k, i):
    """Bound on |coefficient of x^i| of a degree-k integer factor of f."""
    norm = isqrt(sum(a * a for a in f.coeffs)) + 1
    return comb(k, i) * norm


def monic_transform(f):
    """lc^(n-1) · f(x/lc): monic, integral, irreducible iff f is."""
    n, c = f.degree, f.lc
    return IntPoly([a * c ** (n - 1 - i) for i, a in enumerate(f.coeffs[:-1])] + [1])


def cycle_type(f, p):
    """Degrees of the irreducible factors of f mod p, sorted descending."""
    desc = gf_from_int_poly(list(reversed(f.coeffs)), p)
    _, monic = gf_monic(desc, p, ZZ)
    degrees = []
    for g, d in gf_ddf_zassenhaus(monic, p, ZZ):
        degrees.extend([d] * ((len(g) - 1) // d))
    return tuple(sorted(degrees, reverse=True))


def _subset_sums(parts):
    sums = {0}
    for d in parts:
        sums |= {s + d for s in sums}
    return sums


def _prefilter_proves_irreducible(f, disc):
    # degree patterns mod good primes: a factor of degree k over Q gives a
    # subset of each pattern summing to k
    n = f.degree
    possible = set(range(1, n))
    for p in PREFILTER_PRIMES:
        if disc % p == 0:
            continue
        possible &= _subset_sums(cycle_type(f, p))
        if not possible:
            return True
    return False


def _signed_divisors(n):
    ds = divisors(abs(n))
    return [int(d) for d in ds] + [-int(d) for d in ds]


def _linear_factor(f):
    for r in _signed_divisors(f.coeffs[0]):
        if f(r) == 0:
            return IntPoly((-r, 1))
    return None


def _quadratic_factor_of_quartic(f):
    a0, a1, a2, a3 = f.coeffs[:4]
    for v in _signed_divisors(a0):
        v2 = a0 // v
        if v != v2:
            num, den = a1 - a3 * v, v2 - v
            if num % den:
                continue
            u = num // den
            u2 = a3 - u
            if v + v2 + u * u2 == a2:
                return IntPoly((v, u, 1))
        elif a1 == a3 * v:
            disc = a3 * a3 - 4 * (a2 - 2 * v)
            if disc < 0 or not gmpy2.is_square(disc):
                continue
            s = isqrt(disc)
            if (a3 + s) % 2 == 0:
                return IntPoly((v, (a3 + s) // 2, 1))
    return None


def _quadratic_factor(f):
    f1, fm1 = f(1), f(-1)
    bound = mignotte_bound(f, 2, 1)
    for v in _signed_divisors(f.coeffs[0]):
        for d in _signed_divisors(f1):
            u = d - 1 - v
            g_minus_one = 1 - u + v
            if abs(u) > bound or g_minus_one == 0 or fm1 % g_minus_one:
                continue
            g = IntPoly((v, u, 1))
            if f.exact_quotient(g) is not None:
                return g
    return None


def _cubic_factor(f):
    f1, fm1, f2 = f(1), f(-1), f(2)
    bound_u, bound_w = mignotte_bound(f, 3, 2), mignotte_bound(f, 3, 1)
    d1s, d2s = _signed_divisors(f1), _signed_divisors(fm1)
    for v in _signed_divisors(f.coeffs[0]):
        for d1 in d1s:
            for d2 in d2s:
                twice_u = d1 + d2 - 2 * v
                twice_w = d1 - d2 - 2
                if twice_u % 2 or twice_w % 2:
                    continue
                u, w = twice_u // 2, twice_w // 2
                if abs(u) > bound_u or abs(w) > bound_w:
                    continue
                g = IntPoly((v, w, u, 1))
                g2 = g(2)
                if g2 == 0 or f2 % g2:
                    continue
                if f.exact_quotient(g) is not None:
                    return g
    return None


def find_factor(f):
    """
    A monic integer factor of degree 1..n/2 of a monic f, or None.

    Exhaustive within Gauss's lemma: linear factors through divisors of
    the constant term, quadratic and cubic ones through divisors of f(0),
    f(1), f(-1) filtered by Mignotte bounds.
    """
    if not f.is_monic():
        raise PolynomialError(f"find_factor needs a monic polynomial, got {f}")
    n = f.degree
    if n < 2:
        return None
    if f.coeffs[0] == 0:
        return IntPoly((0, 1))
    linear = _linear_factor(f)
    if linear is not None or n < 4:
        return linear
    if n == 4:
        return _quadratic_factor_of_quartic(f)
    quadratic = _quadratic_factor(f)
    if quadratic is not None or n == 5:
        return quadratic
    return _cubic_factor(f)


def is_irreducible(f):
    """
    Decide irreducibility over Q for degree 2..6.

    Args:
        f (IntPoly): Integer polynomial

    Returns:
        bool: True iff f is irreducible over Q
    """
    n = f.degree
    if n < 1 or n > 6:
        raise PolynomialError(f"is_irreducible supports degrees 1..6, got {n}")
    if n == 1:
        return True
    g = monic_transform(f.primitive_part())
    if g.coeffs[0] == 0:
        return False
    disc = discriminant(g)
    if disc == 0:
        return False
    if n == 2:
        return not (disc >= 0 and gmpy2.is_square(disc))
    if _prefilter_proves_irreducible(g, disc):
        return True
    return find_factor(g) is None


def perfect_square_root(f):
    """Monic h with h^2 = f for a monic quartic f, or None."""
    if f.degree != 4 or not f.is_monic():
        raise PolynomialError(f"perfect_square_root needs a monic quartic, got {f}")
    a2, a3 = f.coeffs[2], f.coeffs[3]
    if a3 % 2:
        return None
    u = a3 // 2
    if (a2 - u * u) % 2:
        return None
    h = IntPoly(((a2 - u * u) // 2, u, 1))
    return h if h * h == f else None


class GaloisVerdict(Enum):
    PROVEN_SN = 'ProvenSn'
    PROVEN_AN = 'ProvenAn'
    UNKNOWN = 'Unknown'


@dataclass(frozen=True)
class GaloisCertificate:
    verdict: GaloisVerdict
    witnesses: tuple = ()
    discriminant_is_square: bool = False

    def to_dict(self):
        return {
            'verdict': self.verdict.value,
            'witnesses': [[p, list(ct)] for p, ct in self.witnesses],
            'discriminant_is_square': self.discriminant_is_square,
        }


def _is_prime_small(k):
    return k > 1 and bool(gmpy2.is_prime(k))


def _has_long_prime_cycle(ct, n):
    return any(_is_prime_small(d) and 2 * d > n for d in ct)


def _has_transposition_power(ct):
    return ct.count(2) == 1 and all(d % 2 for d in ct if d != 2)


def _has_three_cycle_power(ct):
    return ct.count(3) == 1 and all(d % 3 for d in ct if d != 3)


def galois_sn_certificate(f, prime_budget=200):
    """
    Try to prove Gal(f) = S_n or A_n from cycle types mod small primes.

    Transitivity comes from irreducibility over Q; a cycle of prime length
    l > n/2 makes the group primitive; a transposition then forces S_n and
    a 3-cycle forces A_n (Jordan). Unknown is always a sound answer.

    Args:
        f (IntPoly): Squarefree integer polynomial
        prime_budget (int): Largest prime to examine

    Returns:
        GaloisCertificate: Verdict with the witnessing (prime, cycle type) pairs
    """
    n = f.degree
    if n < 2 or n > 6:
        raise PolynomialError(f"galois_sn_certificate supports degrees 2..6, got {n}")
    disc = discriminant(f)
    if disc == 0:
        raise PolynomialError(f"{f} is not squarefree")
    square = disc > 0 and bool(gmpy2.is_square(disc))
    if not is_irreducible(f):
        return GaloisCertificate(GaloisVerdict.UNKNOWN, (), square)

    bad = f.lc * disc
    witnesses = []
    have = {'long': False, 'transposition': False, 'three': False}
    for p in primerange(3, prime_budget + 1):
        if bad % p == 0:
            continue
        ct = cycle_type(f, p)
        found = {
            'long': _has_long_prime_cycle(ct, n),
            'transposition': _has_transposition_power(ct),
            'three': _has_three_cycle_power(ct),
        }
        if any(found[k] and not have[k] for k in have):
            witnesses.append((int(p), ct))
            for k in have:
                have[k] = have[k] or found[k]
        if have['long'] and have['transposition'] and not square:
            return GaloisCertificate(GaloisVerdict.PROVEN_SN, tuple(witnesses), square)
        if have['long'] and have['three'] and square:
            return GaloisCertificate(GaloisVerdict.PROVEN_AN, tuple(witnesses), square)

    logger.debug(f"No S_n/A_n certificate for {f} with primes up to {prime_budget}")
    return GaloisCertificate(GaloisVerdict.UNKNOWN, tuple(witnesses), square)
