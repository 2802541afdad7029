import pytest

from g2endo.analysis.intpoly import IntPoly, discriminant
from g2endo.analysis.numfield import (
    QuadraticField,
    factor,
    field_discriminant,
    integral_basis,
    is_fundamental_discriminant,
    is_prime,
    pollard_brent,
    quadratic_fields_unramified_outside,
    splits_in,
)
from g2endo.errors import PolynomialError, ReducibleInputError


def test_is_prime():
    assert is_prime(2)
    assert is_prime(41)
    assert not is_prime(1)
    assert not is_prime(561)
    assert is_prime(2 ** 61 - 1)
    assert not is_prime(3215031751)
    assert not is_prime(3317044064679887385961981)
    assert is_prime(2 ** 127 - 1)


def test_factor_small_and_signed():
    fac = factor(-360)
    assert fac.sign == -1
    assert fac.pairs == ((2, 3), (3, 2), (5, 1))
    assert fac.complete
    assert fac.value() == -360
    assert fac.exponent(3) == 2
    assert factor(2869).pairs == ((19, 1), (151, 1))


def test_factor_needs_rho():
    p, q = 1000000007, 1000000009
    fac = factor(p * q * 4)
    assert fac.pairs == ((2, 2), (p, 1), (q, 1))


def test_factor_zero_raises():
    with pytest.raises(PolynomialError):
        factor(0)


def test_pollard_brent_is_reproducible():
    d = pollard_brent(8051)
    assert d in (83, 97)
    assert pollard_brent(8051) == d


@pytest.mark.parametrize('coeffs, expected', [
    ((1, 0, 0, 0, 1), 256),
    ((-2, 0, 0, 0, 1), -2048),
    ((1, 1, 1, 1, 1), 125),
    ((1, 0, -1, 0, 1), 144),
    ((1, 0, -10, 0, 1), 2304),
    ((9, 0, -2, 0, 1), 256),
    ((-1, -1, 1), 5),
    ((-2, 0, 1), 8),
    ((3, 0, 1), -3),
    ((-5, 0, 1), 5),
])
def test_field_discriminant(coeffs, expected):
    f = IntPoly(coeffs)
    d = field_discriminant(f)
    assert d == expected
    index_sq, rem = divmod(discriminant(f), d)
    assert rem == 0


def test_nonmaximal_equation_order_is_enlarged():
    rows = integral_basis(IntPoly((9, 0, -2, 0, 1)))
    index = 1
    for i, row in enumerate(rows):
        index *= row[i]
    assert 1 / index == 24


def test_integral_basis_rejects_reducible():
    with pytest.raises(ReducibleInputError):
        integral_basis(IntPoly((4, 0, 0, 0, 1)))


def test_fundamental_discriminants():
    for d in (5, 8, 12, -3, -4, -8, 24, -24):
        assert is_fundamental_discriminant(d)
    for d in (0, 1, 4, 9, 16, 6, -12 * 4):
        assert not is_fundamental_discriminant(d)


def test_quadratic_field_labels():
    assert QuadraticField(-4).label == 'Q(i)'
    assert QuadraticField(12).label == 'Q(sqrt(3))'
    assert QuadraticField(-8).radicand == -2
    assert QuadraticField(5).is_real
    with pytest.raises(PolynomialError):
        QuadraticField(6)


def test_splits_in():
    assert splits_in(8, 7)
    assert not splits_in(8, 3)
    assert splits_in(-8, 3)
    with pytest.raises(PolynomialError):
        splits_in(12, 3)


def test_fields_unramified_outside():
    fields = quadratic_fields_unramified_outside({2, 3})
    assert {q.fundamental_discriminant for q in fields} == {-3, -4, 8, -8, 12, 24, -24}
    keys = [(abs(q.fundamental_discriminant), q.fundamental_discriminant) for q in fields]
    assert keys == sorted(keys)
    assert [q.fundamental_discriminant for q in quadratic_fields_unramified_outside({5})] == [5]
