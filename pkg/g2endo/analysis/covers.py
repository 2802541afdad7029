"""
Covers Module

Exact verification of maps (x, y) -> (w(x), y·r(x)) from y^2 = f(x) onto
z^2 = w^3 + A w + B over Q or a number field Q[t]/(g), deg g <= 4.
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction

from g2endo.analysis.intpoly import IntPoly, is_irreducible
from g2endo.errors import CoverError

logger = logging.getLogger(__name__)


class NumberField:
    """Q[t]/(g) for a monic irreducible integer polynomial g of degree 1..4."""

    def __init__(self, minpoly):
        minpoly = IntPoly(minpoly) if not isinstance(minpoly, IntPoly) else minpoly
        if not minpoly.is_monic() or not 1 <= minpoly.degree <= 4:
            raise CoverError(f"Field polynomial must be monic of degree 1..4, got {minpoly}")
        if not is_irreducible(minpoly):
            raise CoverError(f"Field polynomial {minpoly} is reducible")
        self.minpoly = minpoly
        self.degree = minpoly.degree

    @classmethod
    def rationals(cls):
        return cls(IntPoly((0, 1)))

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.minpoly == other.minpoly

    def __hash__(self):
        return hash(self.minpoly)

    def __repr__(self):
        return f"NumberField({self.minpoly})"

    def element(self, coords):
        coords = [Fraction(c) for c in coords]
        if len(coords) > self.degree:
            raise CoverError(f"Too many coordinates for a degree-{self.degree} field")
        return NumberFieldElement(self, tuple(coords + [Fraction(0)] * (self.degree - len(coords))))

    def __call__(self, value):
        if isinstance(value, NumberFieldElement):
            if value.field != self:
                raise CoverError(f"Field mismatch: {value.field} vs {self}")
            return value
        return self.element([value])

    @property
    def generator(self):
        if self.degree == 1:
            return self.element([-self.minpoly.coeffs[0]])
        return self.element([0, 1])

    def zero(self):
        return self.element([])

    def one(self):
        return self.element([1])

    def _reduce(self, coeffs):
        g, n = self.minpoly.coeffs, self.degree
        coeffs = list(coeffs)
        for k in range(len(coeffs) - 1, n - 1, -1):
            c = coeffs[k]
            if c:
                for i in range(n):
                    coeffs[k - n + i] -= c * g[i]
            coeffs[k] = Fraction(0)
        return tuple(coeffs[:n]) + (Fraction(0),) * max(0, n - len(coeffs))


@dataclass(frozen=True, eq=False)
class NumberFieldElement:
    field: NumberField
    coords: tuple

    def _coerce(self, other):
        if isinstance(other, NumberFieldElement):
            if other.field != self.field:
                raise CoverError(f"Field mismatch: {other.field} vs {self.field}")
            return other
        return self.field.element([other])

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.field.element([other])
        return isinstance(other, NumberFieldElement) and self.field == other.field and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def is_zero(self):
        return not any(self.coords)

    def __add__(self, other):
        o = self._coerce(other)
        return NumberFieldElement(self.field, tuple(a + b for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __neg__(self):
        return NumberFieldElement(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        n = self.field.degree
        out = [Fraction(0)] * (2 * n - 1)
        for i, a in enumerate(self.coords):
            if a:
                for j, b in enumerate(o.coords):
                    out[i + j] += a * b
        return NumberFieldElement(self.field, self.field._reduce(out))

    __rmul__ = __mul__

    def __pow__(self, k):
        result, base = self.field.one(), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self):
        if self.is_zero():
            raise CoverError("Division by zero in number field")
        n = self.field.degree
        # columns: self * t^j in coordinates
        basis = [self.field.element([0] * j + [1]) for j in range(n)]
        columns = [(self * b).coords for b in basis]
        rows = [[columns[j][i] for j in range(n)] + [Fraction(int(i == 0))] for i in range(n)]
        for col in range(n):
            piv = next(i for i in range(col, n) if rows[i][col] != 0)
            rows[col], rows[piv] = rows[piv], rows[col]
            inv = 1 / rows[col][col]
            rows[col] = [v * inv for v in rows[col]]
            for i in range(n):
                if i != col and rows[i][col] != 0:
                    t = rows[i][col]
                    rows[i] = [a - t * b for a, b in zip(rows[i], rows[col])]
        return NumberFieldElement(self.field, tuple(r[n] for r in rows))

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def conjugate(self):
        """Image under the nontrivial automorphism of a quadratic field (t -> -b - t)."""
        if self.field.degree == 1:
            return self
        if self.field.degree != 2:
            raise CoverError("Conjugation is only defined for quadratic fields")
        b = self.field.minpoly.coeffs[1]
        u, v = self.coords
        return NumberFieldElement(self.field, (u - b * v, -v))

    def __str__(self):
        terms = []
        for k, c in enumerate(self.coords):
            if c:
                terms.append(str(c) if k == 0 else f"{c}*t" + (f"^{k}" if k > 1 else ''))
        return ' + '.join(terms) or '0'

    __repr__ = __str__


class FieldPoly:
    """Polynomial in x with coefficients in a NumberField, ascending order."""

    def __init__(self, field, coeffs=()):
        self.field = field
        c = [field(a) for a in coeffs]
        while c and c[-1].is_zero():
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def from_intpoly(cls, field, poly):
        return cls(field, poly.coeffs)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    @property
    def lc(self):
        return self.coeffs[-1]

    def _check(self, other):
        if not isinstance(other, FieldPoly):
            return FieldPoly(self.field, [other])
        if other.field != self.field:
            raise CoverError(f"Field mismatch: {other.field} vs {self.field}")
        return other

    def __eq__(self, other):
        return isinstance(other, FieldPoly) and self.field == other.field and self.coeffs == other.coeffs

    def __add__(self, other):
        o = self._check(other)
        n = max(len(self.coeffs), len(o.coeffs))
        zero = self.field.zero()
        a = self.coeffs + (zero,) * (n - len(self.coeffs))
        b = o.coeffs + (zero,) * (n - len(o.coeffs))
        return FieldPoly(self.field, [x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return FieldPoly(self.field, [-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-self._check(other))

    def __mul__(self, other):
        o = self._check(other)
        if self.is_zero() or o.is_zero():
            return FieldPoly(self.field)
        out = [self.field.zero()] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(o.coeffs):
                out[i + j] = out[i + j] + a * b
        return FieldPoly(self.field, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        result = FieldPoly(self.field, [1])
        for _ in range(k):
            result = result * self
        return result

    def derivative(self):
        return FieldPoly(self.field, [k * a for k, a in enumerate(self.coeffs)][1:])

    def divmod(self, other):
        o = self._check(other)
        if o.is_zero():
            raise CoverError("Division by the zero polynomial")
        rem = list(self.coeffs)
        quot = [self.field.zero()] * max(0, len(rem) - o.degree)
        inv = o.lc.inverse()
        for k in range(len(rem) - 1, o.degree - 1, -1):
            c = rem[k] * inv
            if c.is_zero():
                continue
            quot[k - o.degree] = c
            for i, b in enumerate(o.coeffs):
                rem[k - o.degree + i] = rem[k - o.degree + i] - c * b
        return FieldPoly(self.field, quot), FieldPoly(self.field, rem[:o.degree] if o.degree > 0 else [])

    def monic(self):
        inv = self.lc.inverse()
        return FieldPoly(self.field, [a * inv for a in self.coeffs])

    def map_coeffs(self, fn):
        return FieldPoly(self.field, [fn(a) for a in self.coeffs])

    def __str__(self):
        return ' + '.join(f"({a})*x^{k}" for k, a in enumerate(self.coeffs) if not a.is_zero()) or '0'


def poly_gcd(f, g):
    while not g.is_zero():
        f, g = g, f.divmod(g)[1]
    return f.monic() if not f.is_zero() else f


@dataclass(frozen=True)
class CoverMap:
    """(x, y) -> (w_num/w_den, y · r_num/r_den) onto z^2 = w^3 + A w + B."""

    field: NumberField
    w_num: FieldPoly
    w_den: FieldPoly
    r_num: FieldPoly
    r_den: FieldPoly
    A: NumberFieldElement
    B: NumberFieldElement

    def __post_init__(self):
        if self.w_den.is_zero() or self.r_den.is_zero():
            raise CoverError("Cover map has a zero denominator")
        for poly in (self.w_num, self.w_den, self.r_num, self.r_den):
            if poly.field != self.field:
                raise CoverError(f"Field mismatch in cover map: {poly.field} vs {self.field}")
        object.__setattr__(self, 'A', self.field(self.A))
        object.__setattr__(self, 'B', self.field(self.B))

    def reduced(self):
        """Same map with w and r in lowest terms."""
        gw = poly_gcd(self.w_num, self.w_den)
        gr = poly_gcd(self.r_num, self.r_den)
        return CoverMap(
            self.field,
            self.w_num.divmod(gw)[0], self.w_den.divmod(gw)[0],
            self.r_num.divmod(gr)[0], self.r_den.divmod(gr)[0],
            self.A, self.B,
        )


def _curve_poly(curve, field):
    if isinstance(curve, FieldPoly):
        if curve.field != field:
            raise CoverError(f"Field mismatch: curve over {curve.field}, map over {field}")
        return curve
    poly = curve.f if hasattr(curve, 'f') else curve
    return FieldPoly.from_intpoly(field, poly)


def verify_cover(curve, cover):
    """
    True iff r^2 f = w^3 + A w + B as rational functions, i.e.
    r_num^2 · f · w_den^3 = (w_num^3 + A w_num w_den^2 + B w_den^3) · r_den^2.

    Args:
        curve: CurveModel, IntPoly or FieldPoly giving f
        cover (CoverMap): Map data

    Returns:
        bool: Whether the identity holds (False for constant w or r = 0)
    """
    f = _curve_poly(curve, cover.field)
    wn, wd, rn, rd = cover.w_num, cover.w_den, cover.r_num, cover.r_den
    if rn.is_zero() or (wn * wd.derivative() - wn.derivative() * wd).is_zero():
        return False
    lhs = rn * rn * f * wd ** 3
    rhs = (wn ** 3 + wn * wd * wd * cover.A + wd ** 3 * cover.B) * rd * rd
    return lhs == rhs


def map_degree(curve, cover):
    """Degree of x -> w(x) in lowest terms; the map must verify first."""
    if not verify_cover(curve, cover):
        raise CoverError("Map does not verify as a cover")
    reduced = cover.reduced()
    return max(reduced.w_num.degree, reduced.w_den.degree)


def pullback_differential(curve, cover):
    """
    phi^*(dw/z) = (w'/r) dx/y with w'/r = alpha + beta x.

    Returns:
        tuple: (alpha, beta) as field elements
    """
    if not verify_cover(curve, cover):
        raise CoverError("Map does not verify as a cover")
    wn, wd, rn, rd = cover.w_num, cover.w_den, cover.r_num, cover.r_den
    num = (wn.derivative() * wd - wn * wd.derivative()) * rd
    den = wd * wd * rn
    quotient, remainder = num.divmod(den)
    if not remainder.is_zero() or quotient.degree > 1:
        raise CoverError(f"Pullback w'/r is not a polynomial of degree <= 1: {quotient} rem {remainder}")
    zero = cover.field.zero()
    coeffs = list(quotient.coeffs) + [zero] * (2 - len(quotient.coeffs))
    return coeffs[0], coeffs[1]


def independence(p1, p2):
    """True iff the two pullbacks alpha + beta x are linearly independent."""
    return not (p1[0] * p2[1] - p2[0] * p1[1]).is_zero()


def solve_target(curve, field, w_num, w_den, r_num, r_den):
    """
    Solve for (A, B) with r^2 f = w^3 + A w + B by coefficient matching.

    Returns:
        tuple: (A, B), or None if no pair makes the identity hold
    """
    f = _curve_poly(curve, field)
    lhs = r_num * r_num * f * w_den ** 3 - w_num ** 3 * r_den * r_den
    u = w_num * w_den * w_den * r_den * r_den
    v = w_den ** 3 * r_den * r_den
    size = max(len(lhs.coeffs), len(u.coeffs), len(v.coeffs))
    zero = field.zero()

    def coeff(p, k):
        return p.coeffs[k] if k < len(p.coeffs) else zero

    for i in range(size):
        for j in range(i + 1, size):
            det = coeff(u, i) * coeff(v, j) - coeff(u, j) * coeff(v, i)
            if det.is_zero():
                continue
            a = (coeff(lhs, i) * coeff(v, j) - coeff(lhs, j) * coeff(v, i)) / det
            b = (coeff(u, i) * coeff(lhs, j) - coeff(u, j) * coeff(lhs, i)) / det
            if lhs == u * a + v * b:
                return a, b
            return None
    return None


def conjugate_cover(cover):
    """Apply the nontrivial automorphism of a quadratic field to every coefficient."""
    conj = NumberFieldElement.conjugate
    return CoverMap(
        cover.field,
        cover.w_num.map_coeffs(conj), cover.w_den.map_coeffs(conj),
        cover.r_num.map_coeffs(conj), cover.r_den.map_coeffs(conj),
        cover.A.conjugate(), cover.B.conjugate(),
    )


def conjugate_poly(poly):
    return poly.map_coeffs(NumberFieldElement.conjugate)


# -- text format --------------------------------------------------------------

_TERM = re.compile(r'^(?P<coeff>\d+(?:/\d+)?)?(?P<mul>\*)?(?P<t>t(?:\^(?P<exp>\d+))?)?$')
MAP_KEYS = ('f', 'A', 'B', 'w_num', 'w_den', 'r_num', 'r_den')


def parse_field_coefficient(text, field):
    """Parse a sum of terms p/q, p/q*t^k, t^k into a field element."""
    text = text.replace(' ', '')
    if not text:
        raise CoverError("Empty coefficient")
    total = field.zero()
    for match in re.finditer(r'[+-]?[^+-]+', text):
        term = match.group(0)
        sign = -1 if term.startswith('-') else 1
        term = term.lstrip('+-')
        parts = _TERM.match(term)
        if not parts or (parts.group('coeff') is None and parts.group('t') is None):
            raise CoverError(f"Malformed coefficient term {match.group(0)!r}")
        if parts.group('mul') and not (parts.group('coeff') and parts.group('t')):
            raise CoverError(f"Malformed coefficient term {match.group(0)!r}")
        value = Fraction(parts.group('coeff') or 1) * sign
        power = 0
        if parts.group('t'):
            power = int(parts.group('exp') or 1)
        total = total + field.generator ** power * value
    return total


def _parse_poly(text, field):
    return FieldPoly(field, [parse_field_coefficient(c, field) for c in text.split(',')])


def parse_cover_text(text, source='<string>'):
    """
    Parse a cover file. Lines are `key: c0, c1, ...` (ascending in x); a
    repeated polynomial key multiplies the factors. The optional
    `minpoly:` line gives ascending integer coefficients of g(t).

    Returns:
        tuple: (FieldPoly f, CoverMap)
    """
    entries = {}
    minpoly = None
    for raw in text.splitlines():
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(':')
        key = key.strip()
        if not sep:
            raise CoverError(f"Malformed line in {source}: {raw.strip()!r}")
        if key == 'minpoly':
            minpoly = IntPoly(int(c) for c in value.split(','))
        elif key in MAP_KEYS:
            entries.setdefault(key, []).append(value)
        else:
            raise CoverError(f"Unknown key {key!r} in {source}")
    field = NumberField(minpoly) if minpoly is not None else NumberField.rationals()

    missing = [k for k in MAP_KEYS if k not in entries and k not in ('w_den', 'r_den')]
    if missing:
        raise CoverError(f"Missing keys {missing} in {source}")

    def product(key):
        result = FieldPoly(field, [1])
        for value in entries.get(key, ['1']):
            result = result * _parse_poly(value, field)
        return result

    a = parse_field_coefficient(entries['A'][0], field)
    b = parse_field_coefficient(entries['B'][0], field)
    cover = CoverMap(field, product('w_num'), product('w_den'), product('r_num'), product('r_den'), a, b)
    return product('f'), cover


def load_cover(path):
    try:
        with open(path, 'r') as f:
            text = f.read()
    except OSError as e:
        raise CoverError(f"Cannot read cover file {path}: {str(e)}")
    return parse_cover_text(text, source=path)
