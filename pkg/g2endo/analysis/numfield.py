"""
Number Field Module

Integer factorization, discriminants of the fields Q[x]/(f) for
deg f <= 4 (Dedekind criterion, then the radical/idealizer enlargement
until the order is maximal), and quadratic field utilities.
"""

import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import prod

import gmpy2
import numpy as np
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_factor, gf_from_int_poly, gf_gcd

from g2endo.analysis.intpoly import IntPoly, discriminant, is_irreducible
from g2endo.errors import FactorizationIncomplete, PolynomialError, ReducibleInputError

logger = logging.getLogger(__name__)

# Miller-Rabin with these bases is deterministic below this bound
MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
MR_DETERMINISTIC_BOUND = 3317044064679887385961981

TRIAL_CHUNK = 256


def is_prime(n):
    """Deterministic Miller-Rabin below 3.3e24, strong probable prime test above."""
    if n < 2:
        return False
    for p in MR_BASES:
        if n % p == 0:
            return n == p
    if n >= MR_DETERMINISTIC_BOUND:
        return bool(gmpy2.is_prime(n, 50))
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in MR_BASES:
        x = gmpy2.powmod(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = gmpy2.powmod(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Factorization:
    """sign · prod(p^e) · cofactor == n; cofactor is 1 when complete."""

    pairs: tuple
    cofactor: int = 1
    sign: int = 1

    @property
    def complete(self):
        return self.cofactor == 1

    def value(self):
        return self.sign * self.cofactor * prod(p ** e for p, e in self.pairs)

    def exponent(self, p):
        return dict(self.pairs).get(p, 0)

    def __str__(self):
        text = ' * '.join(f"{p}^{e}" if e > 1 else str(p) for p, e in self.pairs) or '1'
        if self.sign < 0:
            text = '-' + text
        if self.cofactor != 1:
            text += f" * [{self.cofactor}]"
        return text


@lru_cache(maxsize=4)
def _trial_chunks(bound):
    sieve = np.ones(bound + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, int(bound ** 0.5) + 1):
        if sieve[i]:
            sieve[i * i::i] = False
    primes = [int(p) for p in np.nonzero(sieve)[0]]
    chunks = []
    for start in range(0, len(primes), TRIAL_CHUNK):
        block = primes[start:start + TRIAL_CHUNK]
        chunks.append((block, prod(block)))
    return chunks


def pollard_brent(n, max_iterations=200000, seed=None):
    """
    Pollard's rho with Brent's cycle detection and batched gcds.

    Args:
        n: Odd composite to split
        max_iterations: Iterations before giving up
        seed: Seed for the starting point; defaults to n for reproducibility

    Returns:
        A nontrivial factor of n, or None
    """
    rng = random.Random(n if seed is None else seed)
    for _attempt in range(8):
        y = rng.randint(1, n - 1)
        c = rng.randint(1, n - 1)
        m, g, r, q = 128, 1, 1, 1
        x = ys = y
        steps = 0
        while g == 1 and steps < max_iterations:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = int(gmpy2.gcd(q, n))
                k += m
            steps += r
            r *= 2
        if g == n:
            # batch overshot: walk back one step at a time
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = int(gmpy2.gcd(abs(x - ys), n))
        if 1 < g < n:
            return g
    return None


def _split_completely(n, out, leftover, rho_iterations):
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    root = gmpy2.iroot(n, 2)
    if root[1]:
        _split_completely(int(root[0]), out, leftover, rho_iterations)
        _split_completely(int(root[0]), out, leftover, rho_iterations)
        return
    d = pollard_brent(n, rho_iterations)
    if d is None:
        leftover.append(n)
        return
    _split_completely(d, out, leftover, rho_iterations)
    _split_completely(n // d, out, leftover, rho_iterations)


def factor(n, trial_bound=10 ** 6, rho_iterations=200000):
    """
    Factor an integer by trial division then Pollard rho.

    Args:
        n (int): Nonzero integer
        trial_bound (int): Trial division limit
        rho_iterations (int): Budget for each rho call

    Returns:
        Factorization: Complete unless the cofactor is not 1
    """
    if n == 0:
        raise PolynomialError("Cannot factor 0")
    sign = -1 if n < 0 else 1
    n = abs(n)
    found = {}

    for block, block_product in _trial_chunks(trial_bound):
        if n == 1:
            break
        if block[0] * block[0] > n:
            break
        g = gmpy2.gcd(n, block_product)
        if g == 1:
            continue
        for p in block:
            if g % p == 0:
                while n % p == 0:
                    n //= p
                    found[p] = found.get(p, 0) + 1
        if n > 1 and is_prime(n):
            break

    leftover = []
    if n > 1:
        if n < trial_bound * trial_bound or is_prime(n):
            found[n] = found.get(n, 0) + 1
        else:
            _split_completely(n, found, leftover, rho_iterations)

    cofactor = prod(leftover)
    if cofactor != 1:
        logger.warning(f"Partial factorization: cofactor {cofactor} left unsplit")
    return Factorization(tuple(sorted(found.items())), cofactor, sign)


# -- linear algebra over Z and F_q for orders -------------------------------

def _hnf(rows, n):
    """Upper-triangular Z-basis (pivot of row i in column i) of the lattice spanned by rows."""
    pool = [list(r) for r in rows if any(r)]
    basis = []
    for col in range(n):
        active = [r for r in pool if r[col] != 0]
        rest = [r for r in pool if r[col] == 0]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            pivot = active[0]
            reduced = [pivot]
            for r in active[1:]:
                k = r[col] // pivot[col]
                r2 = [a - k * b for a, b in zip(r, pivot)]
                if r2[col] != 0:
                    reduced.append(r2)
                elif any(r2):
                    rest.append(r2)
            active = reduced
        if not active:
            raise ValueError("lattice is not of full rank")
        pivot = active[0]
        if pivot[col] < 0:
            pivot = [-a for a in pivot]
        basis.append(pivot)
        pool = rest
    return basis


def _left_kernel_mod(rows, q):
    """Basis of {c : sum c_i rows[i] = 0 mod q}."""
    m, k = len(rows), len(rows[0])
    mat = [[rows[i][j] % q for i in range(m)] for j in range(k)]
    pivots = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, k) if mat[i][c]), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = pow(mat[r][c], -1, q)
        mat[r] = [(v * inv) % q for v in mat[r]]
        for i in range(k):
            if i != r and mat[i][c]:
                t = mat[i][c]
                mat[i] = [(a - t * b) % q for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == k:
            break
    basis = []
    for free in (c for c in range(m) if c not in pivots):
        v = [0] * m
        v[free] = 1
        for i, pc in enumerate(pivots):
            v[pc] = (-mat[i][free]) % q
        basis.append(v)
    return basis


def _solve_upper(basis, y):
    """Integer c with c·basis = y for an upper-triangular basis, or None."""
    n = len(basis)
    c = [0] * n
    for col in range(n):
        acc = y[col] - sum(c[i] * basis[i][col] for i in range(col))
        if acc % basis[col][col]:
            return None
        c[col] = acc // basis[col][col]
    return c


class _Order:
    """Order in Q[x]/(f) given by rational basis rows in power-basis coordinates."""

    def __init__(self, f, rows):
        self.f = f
        self.n = f.degree
        self.rows = rows
        self._inverse = _invert(rows)
        self.table = [[self.coords(self._mul_power(ri, rj)) for rj in rows] for ri in rows]

    def _mul_power(self, x, y):
        n, fc = self.n, self.f.coeffs
        out = [Fraction(0)] * (2 * n - 1)
        for i, a in enumerate(x):
            if a:
                for j, b in enumerate(y):
                    out[i + j] += a * b
        for k in range(2 * n - 2, n - 1, -1):
            c = out[k]
            if c:
                for i in range(n):
                    out[k - n + i] -= c * fc[i]
        return out[:n]

    def coords(self, x):
        n = self.n
        raw = [sum(x[i] * self._inverse[i][j] for i in range(n)) for j in range(n)]
        if any(v.denominator != 1 for v in raw):
            raise ArithmeticError("element is not in the order")
        return [int(v) for v in raw]

    def mul(self, a, b, q=None):
        n = self.n
        out = [0] * n
        for i in range(n):
            if a[i]:
                for j in range(n):
                    if b[j]:
                        t = a[i] * b[j]
                        row = self.table[i][j]
                        for k in range(n):
                            out[k] += t * row[k]
        return [v % q for v in out] if q else out

    def power_mod(self, a, e, q):
        result = self.coords([Fraction(1)] + [Fraction(0)] * (self.n - 1))
        result = [v % q for v in result]
        base = [v % q for v in a]
        while e:
            if e & 1:
                result = self.mul(result, base, q)
            base = self.mul(base, base, q)
            e >>= 1
        return result

    def determinant(self):
        return prod(self.rows[i][i] for i in range(self.n))


def _invert(rows):
    n = len(rows)
    aug = [list(rows[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / Fraction(aug[col][col])
        aug[col] = [v * inv for v in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                t = aug[i][col]
                aug[i] = [a - t * b for a, b in zip(aug[i], aug[col])]
    return [row[n:] for row in aug]


def _normalize_rows(rows, n):
    den = 1
    for r in rows:
        for v in r:
            den = den * v.denominator // gmpy2.gcd(den, v.denominator)
    den = int(den)
    ints = [[int(v * den) for v in r] for r in rows]
    return [[Fraction(v, den) for v in r] for r in _hnf(ints, n)]


def dedekind_is_maximal(f, q):
    """Dedekind's criterion: is Z[x]/(f) maximal at q?"""
    desc = gf_from_int_poly(list(reversed(f.coeffs)), q)
    _, factors = gf_factor(desc, q, ZZ)
    g, h = IntPoly((1,)), IntPoly((1,))
    for factor_desc, e in factors:
        lifted = IntPoly(reversed([int(c) for c in factor_desc]))
        g = g * lifted
        h = h * lifted ** (e - 1)
    diff = f - g * h
    if any(c % q for c in diff.coeffs):
        raise ArithmeticError("mod-q factorization does not reproduce f")
    big_f = IntPoly(c // q for c in diff.coeffs)

    def reduce_desc(poly):
        return gf_from_int_poly(list(reversed(poly.coeffs)) or [0], q)

    common = gf_gcd(gf_gcd(reduce_desc(big_f), reduce_desc(g), q, ZZ), reduce_desc(h), q, ZZ)
    return len(common) <= 1


def _enlarge_at(order, q):
    """One radical/idealizer step; returns the enlarged order or None when q-maximal."""
    n = order.n
    e = q
    while e < n:
        e *= q
    units = [[int(i == j) for j in range(n)] for i in range(n)]

    # radical of qO: kernel of x -> x^e on O/qO, plus qO
    images = [order.power_mod(u, e, q) for u in units]
    radical = _hnf(_left_kernel_mod(images, q) + [[q * v for v in u] for u in units], n)

    # U = {a in O : a·I in qI}; then O' = U/q
    big_rows = []
    for i in range(n):
        row = []
        for v in radical:
            product = order.mul(units[i], v)
            c = _solve_upper(radical, product)
            if c is None:
                raise ArithmeticError("radical is not an ideal")
            row.extend(x % q for x in c)
        big_rows.append(row)
    kernel = _left_kernel_mod(big_rows, q)
    if not kernel:
        return None
    u_basis = _hnf(kernel + [[q * v for v in u] for u in units], n)
    new_rows = []
    for coeffs in u_basis:
        vec = [Fraction(0)] * n
        for c, row in zip(coeffs, order.rows):
            if c:
                vec = [a + Fraction(c, q) * b for a, b in zip(vec, row)]
        new_rows.append(vec)
    return _Order(order.f, _normalize_rows(new_rows, n))


def integral_basis(f):
    """
    Rational basis (power-basis coordinates) of the maximal order of Q[x]/(f).

    Args:
        f (IntPoly): Monic irreducible polynomial of degree 1..4

    Returns:
        list: Basis rows as lists of Fractions
    """
    if not f.is_monic() or not 1 <= f.degree <= 4:
        raise PolynomialError(f"integral_basis needs a monic polynomial of degree 1..4, got {f}")
    if not is_irreducible(f):
        raise ReducibleInputError(f"{f} is reducible")
    n = f.degree
    order = _Order(f, [[Fraction(int(i == j)) for j in range(n)] for i in range(n)])
    if n == 1:
        return order.rows
    fac = factor(discriminant(f))
    if not fac.complete:
        raise FactorizationIncomplete(f"Could not factor disc({f})", fac)
    for q, e in fac.pairs:
        if e < 2 or dedekind_is_maximal(f, q):
            continue
        while True:
            bigger = _enlarge_at(order, q)
            if bigger is None:
                break
            order = bigger
    return order.rows


def field_discriminant(f):
    """
    Discriminant of the number field Q[x]/(f).

    Args:
        f (IntPoly): Monic irreducible polynomial, degree 2 or 4 (1..4 accepted)

    Returns:
        int: The field discriminant
    """
    rows = integral_basis(f)
    det = prod(rows[i][i] for i in range(len(rows)))
    disc_f = discriminant(f)
    value = disc_f * det * det
    if value.denominator != 1:
        raise ArithmeticError(f"Non-integral field discriminant for {f}")
    value = int(value)
    index_sq, rem = divmod(disc_f, value)
    if rem or not gmpy2.is_square(index_sq):
        raise ArithmeticError(f"Index identity fails for {f}: disc {disc_f}, field disc {value}")
    return value


# -- quadratic fields --------------------------------------------------------

def is_squarefree(m):
    if m == 0:
        return False
    fac = factor(m)
    if not fac.complete:
        raise FactorizationIncomplete(f"Could not factor {m}", fac)
    return all(e == 1 for _, e in fac.pairs)


def is_fundamental_discriminant(d):
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def is_discriminant(d):
    return d % 4 in (0, 1)


@dataclass(frozen=True)
class QuadraticField:
    fundamental_discriminant: int

    def __post_init__(self):
        if not is_fundamental_discriminant(self.fundamental_discriminant):
            raise PolynomialError(f"{self.fundamental_discriminant} is not a fundamental discriminant")

    @property
    def radicand(self):
        d = self.fundamental_discriminant
        return d if d % 4 == 1 else d // 4

    @property
    def is_real(self):
        return self.fundamental_discriminant > 0

    @property
    def label(self):
        m = self.radicand
        return 'Q(i)' if m == -1 else f"Q(sqrt({m}))"

    def __str__(self):
        return self.label


def splits_in(d, p):
    """True iff the odd prime p splits in the quadratic field of discriminant d."""
    if p % 2 == 0 or d % p == 0:
        raise PolynomialError(f"splits_in needs an odd prime unramified in disc {d}, got {p}")
    return gmpy2.kronecker(d, p) == 1


def quadratic_fields_unramified_outside(primes):
    """
    All quadratic fields whose discriminant is supported on the given primes.

    Returns:
        list: QuadraticField objects ordered by |D|, then D
    """
    primes = sorted(set(primes))
    odd = [p for p in primes if p != 2]
    with_two = 2 in primes
    found = set()
    for k in range(len(odd) + 1):
        for subset in combinations(odd, k):
            base = prod(subset)
            for m in (base, -base):
                if m % 4 == 1 and m != 1:
                    found.add(m)
                if with_two:
                    if m % 4 == 3:
                        found.add(4 * m)
                    found.add(8 * m)
    return [QuadraticField(d) for d in sorted(found, key=lambda d: (abs(d), d))]
