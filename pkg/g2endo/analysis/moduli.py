"""
Moduli Module

Igusa-Clebsch invariants of binary sextics, weighted-projective comparison,
Humbert surface membership from equation files and CM list matching.

Invariant convention (stamped as CONVENTION_ID): the sextic is homogenized
as F(x, z) = sum a_i x^i z^(6-i) and transvectants are normalized,

    (f, g)_k = (n-k)!(m-k)!/(n! m!) sum_j (-1)^j C(k, j) d^k f/dx^(k-j) dz^j · d^k g/dx^j dz^(k-j).

With i = (F,F)_4, D = (i,i)_2, A = (F,F)_6, B = (i,i)_4, C = (i,D)_4:

    I2 = -120 A
    I4 = -720 A^2 + 6750 B
    I6 = 8640 A^3 - 108000 A B + 202500 C
    I10 = discriminant of the binary sextic (a5^2 · disc(f) for a quintic)

Satake evaluations are normalized as |P(x)| / sum |c| prod |x_i|^e_i.
"""

import logging
import os
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations, permutations
from math import factorial, isqrt

import gmpy2
import mpmath
from mpmath.libmp import NoConvergence
from sympy import Rational, binomial, diff, expand, symbols

from g2endo import CONVENTION_ID
from g2endo.analysis.intpoly import discriminant
from g2endo.errors import DataFileError, NumericPathwayError, SingularCurveError

logger = logging.getLogger(__name__)

_X, _Z = symbols('x z')

IGUSA_WEIGHTS = (2, 4, 6, 10)

DEFAULT_TOLERANCE = 1e-20
DEFAULT_DPS = 60
# smallest non-vanishing value must exceed this multiple of the tolerance
SEPARATION_FACTOR = 10


@dataclass(frozen=True)
class IgusaInvariants:
    I2: Fraction
    I4: Fraction
    I6: Fraction
    I10: Fraction

    def __post_init__(self):
        for name in ('I2', 'I4', 'I6', 'I10'):
            object.__setattr__(self, name, Fraction(getattr(self, name)))

    def values(self):
        return (self.I2, self.I4, self.I6, self.I10)

    def scaled(self, c):
        c = Fraction(c)
        return IgusaInvariants(*(v * c ** w for v, w in zip(self.values(), IGUSA_WEIGHTS)))

    def to_list(self):
        return [str(v) for v in self.values()]


def _partial(form, i, j):
    for _ in range(i):
        form = diff(form, _X)
    for _ in range(j):
        form = diff(form, _Z)
    return form


def transvectant(f, g, n, m, k):
    """Normalized k-th transvectant of binary forms f, g of orders n, m."""
    total = 0
    for j in range(k + 1):
        total += (-1) ** j * binomial(k, j) * _partial(f, k - j, j) * _partial(g, j, k - j)
    scale = Rational(factorial(n - k) * factorial(m - k), factorial(n) * factorial(m))
    return expand(scale * total)


def _to_fraction(value):
    r = Rational(value)
    return Fraction(int(r.p), int(r.q))


def igusa_clebsch(curve):
    """
    Igusa-Clebsch invariants (I2, I4, I6, I10) of y^2 = f(x).

    Args:
        curve (CurveModel): Smooth genus-2 model

    Returns:
        IgusaInvariants: Exact rational invariants
    """
    coeffs = list(curve.f.coeffs) + [0] * (7 - len(curve.f.coeffs))
    form = sum(a * _X ** i * _Z ** (6 - i) for i, a in enumerate(coeffs))

    i_form = transvectant(form, form, 6, 6, 4)
    delta = transvectant(i_form, i_form, 4, 4, 2)
    a = _to_fraction(transvectant(form, form, 6, 6, 6))
    b = _to_fraction(transvectant(i_form, i_form, 4, 4, 4))
    c = _to_fraction(transvectant(i_form, delta, 4, 4, 4))

    i2 = -120 * a
    i4 = -720 * a * a + 6750 * b
    i6 = 8640 * a ** 3 - 108000 * a * b + 202500 * c
    disc = discriminant(curve.f)
    i10 = Fraction(disc if curve.f.degree == 6 else curve.f.lc ** 2 * disc)
    if i10 == 0:
        raise SingularCurveError(f"I10 vanishes for {curve}")
    return IgusaInvariants(i2, i4, i6, i10)


def _positive_rational_root(r, n):
    """The positive rational c with c^n = r, or None."""
    if r <= 0:
        return None
    num, num_exact = gmpy2.iroot(r.numerator, n)
    den, den_exact = gmpy2.iroot(r.denominator, n)
    if not (num_exact and den_exact):
        return None
    return Fraction(int(num), int(den))


def weighted_equal(p, q, geometric=False):
    """
    True iff q_2k = c^2k p_2k for all four invariants, with c a nonzero rational.

    Compares zero patterns, then (q_i/p_i)^j = (q_j/p_j)^i over all pairs.
    With geometric=True any nonzero algebraic c is allowed (isomorphism
    over Q-bar), which is what the CM list is keyed by.
    """
    weights = (1, 2, 3, 5)
    pv, qv = p.values(), q.values()
    if any((a == 0) != (b == 0) for a, b in zip(pv, qv)):
        return False
    support = [(w, a, b) for w, a, b in zip(weights, pv, qv) if a != 0]
    for (i, pi, qi), (j, pj, qj) in combinations(support, 2):
        if qi ** j * pj ** i != qj ** i * pi ** j:
            return False
    if geometric or not support:
        return True

    w, a, b = support[0]
    c = _positive_rational_root(Fraction(b) / Fraction(a), 2 * w)
    if c is None:
        return False
    return all(Fraction(bk) == Fraction(ak) * c ** (2 * k) for k, ak, bk in support)


# -- Humbert equations --------------------------------------------------------

class CoordinateSystem(Enum):
    IGUSA = 'igusa'
    SATAKE = 'satake'


class Membership(Enum):
    ON = 'On'
    OFF = 'Off'
    NUMERIC_ON = 'NumericOn'
    NUMERIC_OFF = 'NumericOff'
    NUMERIC_ON_UNRELIABLE = 'NumericOnUnreliable'
    NUMERIC_OFF_UNRELIABLE = 'NumericOffUnreliable'

    @property
    def is_on(self):
        return self in (Membership.ON, Membership.NUMERIC_ON, Membership.NUMERIC_ON_UNRELIABLE)

    @property
    def is_exact(self):
        return self in (Membership.ON, Membership.OFF)

    @property
    def reliable(self):
        """False when the Satake separation audit failed."""
        return self not in (Membership.NUMERIC_ON_UNRELIABLE, Membership.NUMERIC_OFF_UNRELIABLE)


@dataclass(frozen=True)
class HumbertEquation:
    discriminant: int
    coordinate_system: CoordinateSystem
    monomials: tuple
    convention_id: str = CONVENTION_ID
    satake_transform: tuple = None
    source: str = ''

    def __post_init__(self):
        if self.discriminant <= 0 or self.discriminant % 4 not in (0, 1):
            raise DataFileError(f"Humbert discriminant must be a positive discriminant, got {self.discriminant}")
        if self.convention_id != CONVENTION_ID:
            raise DataFileError(f"Convention mismatch: file uses {self.convention_id}, expected {CONVENTION_ID}")
        if not self.monomials:
            raise DataFileError(f"Humbert equation for D={self.discriminant} has no monomials")
        if self.coordinate_system == CoordinateSystem.IGUSA:
            degrees = {sum(e * w for e, w in zip(exps, IGUSA_WEIGHTS)) for exps, _ in self.monomials}
            if len(degrees) != 1:
                raise DataFileError(f"Igusa equation for D={self.discriminant} is not weighted-homogeneous")
        elif self.satake_transform is None or len(self.satake_transform) != 6:
            raise DataFileError(f"Satake equation for D={self.discriminant} needs six transform power sums")

    @property
    def weighted_degree(self):
        exps = self.monomials[0][0]
        return sum(e * w for e, w in zip(exps, IGUSA_WEIGHTS))


def _parse_monomial(line, arity, source):
    try:
        left, right = line.split(':', 1)
        exps = tuple(int(e) for e in left.split())
        coeff = Fraction(right.strip())
    except ValueError as e:
        raise DataFileError(f"Malformed monomial line in {source}: {line!r} ({str(e)})")
    if len(exps) != arity or any(e < 0 for e in exps):
        raise DataFileError(f"Expected {arity} non-negative exponents in {source}: {line!r}")
    return exps, coeff


def _merge(monomials):
    merged = {}
    for exps, coeff in monomials:
        merged[exps] = merged.get(exps, Fraction(0)) + coeff
    return tuple(sorted((e, c) for e, c in merged.items() if c != 0))


def parse_humbert_text(text, source='<string>'):
    """Parse a Humbert equation file body."""
    header = {}
    monomials = []
    transform = {}
    in_transform = False
    for raw in text.splitlines():
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if line == '[satake_transform]':
            in_transform = True
            continue
        if in_transform:
            key, sep, rest = line.partition('=')
            key = key.strip()
            if not sep or key not in {f"s{k}" for k in range(1, 7)}:
                raise DataFileError(f"Malformed transform line in {source}: {line!r}")
            transform.setdefault(key, []).append(_parse_monomial(rest, 4, source))
            continue
        if '=' in line and ':' not in line:
            key, _, value = line.partition('=')
            header[key.strip()] = value.strip()
            continue
        coords = header.get('coords')
        if coords is None:
            raise DataFileError(f"Monomial before coords= header in {source}")
        monomials.append(_parse_monomial(line, 4 if coords == 'igusa' else 6, source))

    try:
        disc = int(header['discriminant'])
        coords = CoordinateSystem(header['coords'])
        convention = header['convention']
    except (KeyError, ValueError) as e:
        raise DataFileError(f"Missing or invalid header in {source}: {str(e)}")

    satake = None
    if transform:
        satake = tuple(_merge(transform.get(f"s{k}", [])) for k in range(1, 7))
    return HumbertEquation(disc, coords, _merge(monomials), convention, satake, source)


def load_humbert_equation(path):
    try:
        with open(path, 'r') as f:
            text = f.read()
    except OSError as e:
        raise DataFileError(f"Cannot read Humbert file {path}: {str(e)}")
    return parse_humbert_text(text, source=path)


class HumbertRegistry:
    """Read-only map D -> Humbert equations loaded from a directory of *.eq files."""

    def __init__(self, equations=()):
        self._by_disc = {}
        for eq in equations:
            self._by_disc.setdefault(eq.discriminant, []).append(eq)

    @classmethod
    def from_directory(cls, directory):
        equations = []
        if directory and os.path.isdir(directory):
            for name in sorted(os.listdir(directory)):
                if name.endswith('.eq'):
                    equations.append(load_humbert_equation(os.path.join(directory, name)))
            logger.info(f"Loaded {len(equations)} Humbert equations from {directory}")
        return cls(equations)

    def discriminants(self):
        return sorted(self._by_disc)

    def get(self, d):
        return list(self._by_disc.get(d, []))

    def __contains__(self, d):
        return d in self._by_disc

    def membership(self, point, d, tol=DEFAULT_TOLERANCE, dps=DEFAULT_DPS):
        """Membership of point in H_d, preferring exact equations; None without data."""
        equations = sorted(self.get(d), key=lambda eq: eq.coordinate_system != CoordinateSystem.IGUSA)
        if not equations:
            return None
        return humbert_membership(point, equations[0], tol, dps)


def _evaluate(monomials, values):
    total = 0
    for exps, coeff in monomials:
        term = coeff
        for v, e in zip(values, exps):
            term *= v ** e
        total += term
    return total


def power_sums_to_polynomial(sums):
    """Coefficients (descending) of prod (X - x_i) from the power sums s1..s6 via Newton's identities."""
    e = [Fraction(1)]
    for k in range(1, len(sums) + 1):
        acc = sum((-1) ** (i - 1) * e[k - i] * sums[i - 1] for i in range(1, k + 1))
        e.append(acc / k)
    return [(-1) ** k * e[k] for k in range(len(e))]


@dataclass(frozen=True)
class SatakeEvaluation:
    values: tuple
    min_value: object
    min_nonvanishing: object
    reliable: bool


def satake_evaluate(point, eq, tol=DEFAULT_TOLERANCE, dps=DEFAULT_DPS, roots=None):
    """
    Evaluate a Satake-coordinate equation on all 720 orderings of the six
    coordinates recovered from the transform power sums.

    Returns:
        SatakeEvaluation: Sorted normalized values and the separation audit
    """
    if eq.satake_transform is None:
        raise NumericPathwayError(f"No Satake transform for D={eq.discriminant}")
    with mpmath.workdps(dps):
        if roots is None:
            sums = [_evaluate(s, point.values()) for s in eq.satake_transform]
            coeffs = power_sums_to_polynomial(sums)
            try:
                roots, err = mpmath.polyroots(
                    [mpmath.mpf(c.numerator) / c.denominator for c in coeffs],
                    maxsteps=200, extraprec=2 * dps, error=True,
                )
            except NoConvergence as e:
                raise NumericPathwayError(f"Root finding failed for D={eq.discriminant}: {str(e)}")
            if err > mpmath.mpf(10) ** -30:
                raise NumericPathwayError(f"Root residual {err} too large for D={eq.discriminant}")

        values = []
        for ordering in permutations(roots):
            num, den = mpmath.mpf(0), mpmath.mpf(0)
            for exps, coeff in eq.monomials:
                term = mpmath.mpf(coeff.numerator) / coeff.denominator
                for x, e in zip(ordering, exps):
                    term *= x ** e
                num += term
                den += abs(term)
            values.append(abs(num) / den if den else mpmath.mpf(0))
        values.sort()

        small = mpmath.mpf(tol)
        nonvanishing = [v for v in values if v >= small]
        min_nonvanishing = nonvanishing[0] if nonvanishing else None
        reliable = min_nonvanishing is None or min_nonvanishing > SEPARATION_FACTOR * small
    return SatakeEvaluation(tuple(values), values[0], min_nonvanishing, reliable)


def humbert_membership(point, eq, tol=DEFAULT_TOLERANCE, dps=DEFAULT_DPS):
    """
    Decide whether the moduli point lies on the Humbert surface of eq.

    Args:
        point (IgusaInvariants): Invariants of the curve
        eq (HumbertEquation): Equation in Igusa or Satake coordinates
        tol (float): Vanishing tolerance for the Satake pathway
        dps (int): Working precision for the Satake pathway

    Returns:
        Membership: ON/OFF (exact), NUMERIC_ON/NUMERIC_OFF, or their
            _UNRELIABLE variants when the separation audit fails
    """
    if eq.coordinate_system == CoordinateSystem.IGUSA:
        return Membership.ON if _evaluate(eq.monomials, point.values()) == 0 else Membership.OFF

    evaluation = satake_evaluate(point, eq, tol, dps)
    on = evaluation.min_value < tol
    if not evaluation.reliable:
        logger.warning(
            f"Unreliable Satake evaluation for D={eq.discriminant}: "
            f"smallest non-vanishing value {mpmath.nstr(evaluation.min_nonvanishing, 5)}"
        )
        return Membership.NUMERIC_ON_UNRELIABLE if on else Membership.NUMERIC_OFF_UNRELIABLE
    return Membership.NUMERIC_ON if on else Membership.NUMERIC_OFF


# -- orders and CM matching ---------------------------------------------------

@dataclass(frozen=True)
class RmOrder:
    index: int
    discriminant: int
    checked_up_to: int

    @property
    def decomposable(self):
        return self.discriminant == 1


def rm_order_from_membership(memberships, d):
    """
    Least n with the point on H_{n^2 d}: End is the order of index n.

    Args:
        memberships (dict): D -> bool for the surfaces tested
        d (int): Fundamental discriminant, or 1 for the square (split) case

    Returns:
        RmOrder: Index and the largest n covered by the map, or None
    """
    covered = []
    for key in memberships:
        if key % d == 0:
            root = isqrt(key // d)
            if root * root * d == key:
                covered.append(root)
    covered.sort()
    if not covered:
        return None
    for n in covered:
        if memberships[n * n * d]:
            return RmOrder(n, d, covered[-1])
    return None


def optimality_obstruction_set(d):
    """Discriminants D/n^2 (n > 1) whose surfaces must be avoided for an optimal action."""
    out = []
    n = 2
    while n * n <= d:
        if d % (n * n) == 0 and (d // (n * n)) % 4 in (0, 1):
            out.append(d // (n * n))
        n += 1
    return out


@dataclass(frozen=True)
class CMRecord:
    invariants: IgusaInvariants
    label: str


def load_cm_list(path):
    records = []
    try:
        with open(path, 'r') as f:
            lines = f.readlines()
    except OSError as e:
        raise DataFileError(f"Cannot read CM list {path}: {str(e)}")
    for number, raw in enumerate(lines, 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        left, sep, label = line.partition(':')
        parts = left.split()
        if not sep or len(parts) != 4 or not label.strip():
            raise DataFileError(f"Malformed CM record at {path}:{number}: {raw.strip()!r}")
        try:
            invariants = IgusaInvariants(*(Fraction(v) for v in parts))
        except ValueError as e:
            raise DataFileError(f"Malformed invariant at {path}:{number}: {str(e)}")
        records.append(CMRecord(invariants, label.strip()))
    return records


def cm_list_match(point, cm_data):
    """First record of the CM list weighted-equal to point, or None."""
    records = load_cm_list(cm_data) if isinstance(cm_data, str) else cm_data
    for record in records:
        if weighted_equal(point, record.invariants, geometric=True):
            return record
    return None
