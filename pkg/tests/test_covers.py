import os

import pytest

from g2endo.analysis.covers import (
    FieldPoly,
    NumberField,
    conjugate_cover,
    conjugate_poly,
    independence,
    load_cover,
    map_degree,
    parse_cover_text,
    parse_field_coefficient,
    pullback_differential,
    solve_target,
    verify_cover,
)
from g2endo.errors import CoverError


def cover_path(data_dir, name):
    return os.path.join(data_dir, 'covers', name)


@pytest.mark.data
def test_square_map(data_dir):
    f, cover = load_cover(cover_path(data_dir, 'x6p1_square.map'))
    assert verify_cover(f, cover)
    assert map_degree(f, cover) == 2
    assert pullback_differential(f, cover) == (0, 2)


@pytest.mark.data
def test_inverse_square_map(data_dir):
    f, cover = load_cover(cover_path(data_dir, 'x6p1_inverse.map'))
    assert verify_cover(f, cover)
    assert map_degree(f, cover) == 2
    assert pullback_differential(f, cover) == (-2, 0)


@pytest.mark.data
def test_square_maps_give_independent_differentials(data_dir):
    f, square = load_cover(cover_path(data_dir, 'x6p1_square.map'))
    _, inverse = load_cover(cover_path(data_dir, 'x6p1_inverse.map'))
    assert independence(pullback_differential(f, square), pullback_differential(f, inverse))


@pytest.mark.data
def test_degree7_map(data_dir, degree7_curve):
    f, cover = load_cover(cover_path(data_dir, 'degree7.map'))
    assert verify_cover(f, cover)
    assert verify_cover(degree7_curve, cover)
    assert map_degree(f, cover) == 7


@pytest.mark.data
def test_mutated_map_is_rejected(data_dir):
    with open(cover_path(data_dir, 'degree7.map')) as handle:
        text = handle.read()
    f, cover = parse_cover_text(text.replace('f: 56,', 'f: 57,'))
    assert not verify_cover(f, cover)
    with pytest.raises(CoverError):
        map_degree(f, cover)
    with pytest.raises(CoverError):
        pullback_differential(f, cover)


@pytest.mark.data
def test_sqrt2_map_and_its_conjugate(data_dir):
    f, cover = load_cover(cover_path(data_dir, 'sqrt2_bielliptic.map'))
    field = cover.field
    assert field.degree == 2
    assert verify_cover(f, cover)

    pullback = pullback_differential(f, cover)
    assert pullback == (field.element([-2, -2]), field(-2))

    conj = conjugate_cover(cover)
    conj_f = conjugate_poly(f)
    assert conj_f == f
    assert verify_cover(conj_f, conj)
    other = pullback_differential(conj_f, conj)
    assert other == (field.element([-2, 2]), field(-2))
    assert independence(pullback, other)


@pytest.mark.data
def test_solve_target_recovers_coefficients(data_dir):
    f, cover = load_cover(cover_path(data_dir, 'sqrt2_bielliptic.map'))
    target = solve_target(f, cover.field, cover.w_num, cover.w_den, cover.r_num, cover.r_den)
    assert target == (cover.A, cover.B)


def test_number_field_arithmetic():
    field = NumberField((-2, 0, 1))
    t = field.generator
    assert t * t == 2
    assert (1 + t) * (t - 1) == 1
    assert (1 + t).inverse() == t - 1
    assert t.conjugate() == -t
    assert parse_field_coefficient('7/12-1/2*t', field) == field.element(['7/12', '-1/2'])
    with pytest.raises(CoverError):
        NumberField((-1, 0, 1))


def test_field_poly_division():
    field = NumberField.rationals()
    f = FieldPoly(field, [-1, 0, 1])
    q, r = f.divmod(FieldPoly(field, [-1, 1]))
    assert q == FieldPoly(field, [1, 1])
    assert r.is_zero()


@pytest.mark.parametrize('text', [
    'f: 1, 0, 1\nA: 0\n',
    'f: 1, 0, 1\nA: 0\nB: 1\nw_num: 0, 1\nr_num: 1\ncolour: red\n',
    'f: 1, 0, 1\nA: 0\nB: 1\nw_num: 0, 2**t\nr_num: 1\n',
    'f 1, 0, 1\n',
])
def test_malformed_cover_files(text):
    with pytest.raises(CoverError):
        parse_cover_text(text)


def test_missing_cover_file(tmp_path):
    with pytest.raises(CoverError):
        load_cover(str(tmp_path / 'absent.map'))
