"""
Quadratic Forms Module

Positive definite binary forms Q(m, n) = a m^2 + 2x mn + c n^2 viewed as
discriminant matrices [[a, x], [x, c]] of quaternionic orders: GL2(Z)
reduction, primitive representation, candidate enumeration, certification
sets and the deduction of the order from Humbert membership answers.
"""

import logging
from dataclasses import dataclass
from math import gcd, isqrt

import gmpy2

from g2endo.analysis.numfield import factor
from g2endo.errors import CertificationSearchError, InconclusiveError, QuadraticFormError

logger = logging.getLogger(__name__)

DEFAULT_CERTIFY_CAP = 10 ** 4


@dataclass(frozen=True)
class BinaryQuadraticForm:
    a: int
    x: int
    c: int

    @property
    def det(self):
        return self.a * self.c - self.x * self.x

    def is_positive_definite(self):
        return self.a > 0 and self.det > 0

    def __call__(self, m, n):
        return self.a * m * m + 2 * self.x * m * n + self.c * n * n

    def matrix(self):
        return [[self.a, self.x], [self.x, self.c]]

    def transform(self, p, q, r, s):
        """Form of Q(p m + q n, r m + s n)."""
        return BinaryQuadraticForm(
            self(p, r),
            self.a * p * q + self.x * (p * s + q * r) + self.c * r * s,
            self(q, s),
        )

    def __str__(self):
        return f"[[{self.a},{self.x}],[{self.x},{self.c}]]"


def is_discriminant(d):
    return d % 4 in (0, 1)


def _require_definite(form):
    if not form.is_positive_definite():
        raise QuadraticFormError(f"{form} is not positive definite")


def reduce_gl2z(form):
    """
    Canonical GL2(Z) representative with 0 <= 2x <= a <= c.

    Args:
        form (BinaryQuadraticForm): Positive definite form

    Returns:
        BinaryQuadraticForm: Reduced form with the same determinant
    """
    _require_definite(form)
    a, x, c = form.a, form.x, form.c
    while True:
        if 2 * abs(x) > a:
            # m -> m - k n
            k = (2 * x + a) // (2 * a)
            c = a * k * k - 2 * x * k + c
            x = x - k * a
        if c < a:
            a, c = c, a
            continue
        if 2 * abs(x) <= a:
            break
    reduced = BinaryQuadraticForm(a, abs(x), c)
    assert reduced.det == form.det
    return reduced


def equivalent(f, g):
    return reduce_gl2z(f) == reduce_gl2z(g)


def _signed_range(limit):
    yield 0
    for n in range(1, limit + 1):
        yield n
        yield -n


def primitively_represents(form, d):
    """
    First coprime (m, n) with Q(m, n) = d, searching m >= 0 ascending and
    n in the order 0, 1, -1, 2, -2, ...

    Returns:
        tuple: (m, n), or None
    """
    _require_definite(form)
    if d <= 0:
        return None
    det = form.det
    m_max = isqrt(d * form.c // det)
    n_max = isqrt(d * form.a // det)
    for m in range(m_max + 1):
        for n in _signed_range(n_max):
            if gcd(m, n) == 1 and form(m, n) == d:
                return m, n
    return None


def represented_values(form, bound):
    """All values <= bound taken by the form at coprime vectors."""
    _require_definite(form)
    det = form.det
    values = set()
    for m in range(isqrt(bound * form.c // det) + 1):
        for n in _signed_range(isqrt(bound * form.a // det)):
            if gcd(m, n) == 1:
                v = form(m, n)
                if v <= bound:
                    values.add(v)
    return values


def enumerate_candidates(a, c):
    """
    Positive definite [[a, x], [x, c]] with 0 <= x <= sqrt(ac) and Q(1, 1) a
    discriminant, one per GL2(Z) class.

    Args:
        a (int): Positive discriminant
        c (int): Positive discriminant

    Returns:
        list: BinaryQuadraticForm in increasing x
    """
    if a <= 0 or c <= 0 or not is_discriminant(a) or not is_discriminant(c):
        raise QuadraticFormError(f"Candidate diagonal must be positive discriminants, got {a}, {c}")
    seen = set()
    out = []
    for x in range(isqrt(a * c) + 1):
        form = BinaryQuadraticForm(a, x, c)
        if form.det <= 0 or not is_discriminant(a + 2 * x + c):
            continue
        key = reduce_gl2z(form)
        if key in seen:
            continue
        seen.add(key)
        out.append(form)
    return out


@dataclass(frozen=True)
class CertificationSets:
    positive: tuple
    negative: tuple
    witnesses: tuple

    def to_dict(self):
        return {
            'P': list(self.positive),
            'N': list(self.negative),
            'witnesses': [[str(form), d] for form, d in self.witnesses],
        }


def certify_qm_sets(target, cap=DEFAULT_CERTIFY_CAP):
    """
    Discriminants certifying the order with discriminant matrix target:
    P is the diagonal of target; for each inequivalent candidate with the
    same diagonal, N gets the least discriminant it represents primitively
    while target does not.

    Args:
        target (BinaryQuadraticForm): Discriminant matrix of the order
        cap (int): Largest discriminant searched

    Returns:
        CertificationSets: P, N and the (candidate, discriminant) witnesses

    Raises:
        CertificationSearchError: No distinguishing discriminant below cap
    """
    _require_definite(target)
    canonical = reduce_gl2z(target)
    target_values = represented_values(target, cap)
    witnesses = []
    for candidate in enumerate_candidates(target.a, target.c):
        if reduce_gl2z(candidate) == canonical:
            continue
        distinguishing = sorted(
            d for d in represented_values(candidate, cap) if is_discriminant(d) and d not in target_values
        )
        if not distinguishing:
            raise CertificationSearchError(
                f"No discriminant up to {cap} separates {candidate} from {target}", candidate
            )
        d = distinguishing[0]
        assert primitively_represents(target, d) is None
        witnesses.append((candidate, d))
    negative = tuple(sorted({d for _, d in witnesses}))
    return CertificationSets((target.a, target.c), negative, tuple(witnesses))


# -- quaternion algebras ------------------------------------------------------

def _split_valuation(n, p):
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def hilbert_symbol(a, b, p):
    """
    Hilbert symbol (a, b)_p for nonzero integers; p = 0 means the real place.

    Returns:
        int: 1 or -1
    """
    if a == 0 or b == 0:
        raise QuadraticFormError("Hilbert symbol of zero")
    if p == 0:
        return -1 if a < 0 and b < 0 else 1
    alpha, u = _split_valuation(a, p)
    beta, v = _split_valuation(b, p)
    if p == 2:
        eps = lambda t: ((t - 1) // 2) % 2
        omega = lambda t: ((t * t - 1) // 8) % 2
        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    return sign * int(gmpy2.legendre(u % p, p)) ** beta * int(gmpy2.legendre(v % p, p)) ** alpha


def quaternion_algebra_disc(form):
    """
    Discriminant of the quaternion algebra (a, a·det) attached to a
    discriminant matrix: the product of the finite ramified primes.
    """
    _require_definite(form)
    a, b = form.a, form.a * form.det
    primes = {2} | {p for p, _ in factor(a).pairs} | {p for p, _ in factor(b).pairs}
    disc = 1
    for p in sorted(primes):
        if hilbert_symbol(a, b, p) == -1:
            disc *= p
    return disc


@dataclass(frozen=True)
class QuaternionOrderDescriptor:
    reduced_form: BinaryQuadraticForm
    disc: int
    algebra_disc: int
    index_in_maximal: int

    def to_dict(self):
        return {
            'reduced_form': self.reduced_form.matrix(),
            'disc': self.disc,
            'algebra_disc': self.algebra_disc,
            'index_in_maximal': self.index_in_maximal,
        }


def describe_order(form):
    if form.det % 4:
        raise QuadraticFormError(f"det {form} = {form.det} is not divisible by 4")
    disc = form.det // 4
    algebra_disc = quaternion_algebra_disc(form)
    index, rem = divmod(disc, algebra_disc)
    if rem:
        raise QuadraticFormError(f"Algebra discriminant {algebra_disc} does not divide {disc}")
    return QuaternionOrderDescriptor(reduce_gl2z(form), disc, algebra_disc, index)


# -- deduction from membership answers ---------------------------------------

def query_bound(candidates):
    return max(max(f.a, f.c, f(1, 1), f(1, -1)) for f in candidates)


def required_queries(d1, d2):
    """Discriminants whose Humbert membership the deduction for (d1, d2) may ask about."""
    candidates = enumerate_candidates(d1, d2)
    bound = query_bound(candidates)
    needed = set()
    for form in candidates:
        needed |= {d for d in represented_values(form, bound) if is_discriminant(d)}
    return sorted(needed)


def deduce_qm_ring(d1, d2, membership):
    """
    Determine the quaternionic order from Humbert membership answers.

    Every candidate [[d1, x], [x, d2]] that primitively represents some D
    with membership(D) false is eliminated; D ranges over discriminants up
    to the largest of the candidates' values at (1, 1) and (1, -1).

    Args:
        d1 (int): Discriminant of one Humbert surface containing the point
        d2 (int): Discriminant of a second one
        membership: Callable D -> bool/None, or a dict; None means unknown

    Returns:
        QuaternionOrderDescriptor: The unique survivor

    Raises:
        InconclusiveError: Zero or several survivors
    """
    oracle = membership.get if isinstance(membership, dict) else membership
    answers = {}

    def ask(d):
        if d not in answers:
            answers[d] = oracle(d)
        return answers[d]

    candidates = enumerate_candidates(d1, d2)
    bound = query_bound(candidates)
    survivors = []
    for form in candidates:
        blocker = next(
            (d for d in sorted(represented_values(form, bound)) if is_discriminant(d) and ask(d) is False),
            None,
        )
        if blocker is None:
            survivors.append(form)
        else:
            logger.debug(f"Eliminated {form}: represents {blocker}, which is off")

    if len(survivors) != 1:
        raise InconclusiveError(
            f"{len(survivors)} candidate orders survive for ({d1}, {d2})", [str(s) for s in survivors]
        )
    descriptor = describe_order(survivors[0])
    logger.info(
        f"Completed QM deduction for ({d1}, {d2}): disc {descriptor.disc}, "
        f"algebra disc {descriptor.algebra_disc}, index {descriptor.index_in_maximal}"
    )
    return descriptor
