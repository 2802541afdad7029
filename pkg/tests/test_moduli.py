import logging
import os
import random
from fractions import Fraction

import pytest

from g2endo.analysis import moduli
from g2endo.analysis.finitefield import CurveModel
from g2endo.analysis.intpoly import IntPoly
from g2endo.analysis.moduli import (
    CoordinateSystem,
    HumbertRegistry,
    IgusaInvariants,
    Membership,
    cm_list_match,
    humbert_membership,
    igusa_clebsch,
    load_cm_list,
    load_humbert_equation,
    optimality_obstruction_set,
    parse_humbert_text,
    power_sums_to_polynomial,
    rm_order_from_membership,
    satake_evaluate,
    weighted_equal,
)
from g2endo.errors import DataFileError, NumericPathwayError

HEADER = "discriminant=8\ncoords=igusa\nconvention=igusa-clebsch/transvectant-v1\n"


def toy(data_dir, name):
    return load_humbert_equation(os.path.join(data_dir, 'toy', 'humbert', name))


def test_invariants_of_x5_plus_1(cm_curve):
    point = igusa_clebsch(cm_curve)
    assert point.values()[:3] == (0, 0, 0)
    assert point.I10 == 3125
    assert weighted_equal(point, IgusaInvariants(0, 0, 0, 1), geometric=True)
    assert not weighted_equal(point, IgusaInvariants(0, 0, 0, 1))
    assert weighted_equal(point, IgusaInvariants(0, 0, 0, Fraction(3125, 2 ** 10)))


def check_invariance(coeffs):
    f = IntPoly(coeffs)
    point = igusa_clebsch(CurveModel(f))
    assert igusa_clebsch(CurveModel(f.compose_linear(1, 3))) == point
    assert igusa_clebsch(CurveModel(f.reverse(6))) == point
    assert weighted_equal(igusa_clebsch(CurveModel(f.compose_linear(2, 0))), point)
    assert weighted_equal(igusa_clebsch(CurveModel(4 * f)), point)


def test_invariance_on_one_sextic():
    check_invariance((1, 1, 0, 0, 0, 0, 1))


@pytest.mark.slow
def test_invariance_on_random_sextics():
    rng = random.Random(5)
    done = 0
    while done < 100:
        coeffs = [rng.randint(-5, 5) for _ in range(6)] + [rng.randint(1, 3)]
        try:
            CurveModel(IntPoly(coeffs))
        except Exception:
            continue
        check_invariance(coeffs)
        done += 1


def test_weighted_equal():
    p = IgusaInvariants(1, 2, 3, 5)
    assert weighted_equal(p, p.scaled(3))
    assert weighted_equal(p, p.scaled(Fraction(-2, 5)))
    assert weighted_equal(p.scaled(Fraction(1, 7)), p)
    assert not weighted_equal(p, IgusaInvariants(9, 162, 2187, 295246))
    assert not weighted_equal(p, IgusaInvariants(0, 162, 2187, 295245))
    assert not weighted_equal(IgusaInvariants(1, 0, 0, 1), IgusaInvariants(1, 0, 0, -1))
    assert p.scaled(Fraction(1, 3)) == IgusaInvariants(Fraction(1, 9), Fraction(2, 81), Fraction(1, 243), Fraction(5, 59049))


def test_weighted_equal_needs_a_rational_scale():
    # c = sqrt(2) and c = i
    assert not weighted_equal(IgusaInvariants(1, 1, 1, 1), IgusaInvariants(2, 4, 8, 32))
    assert not weighted_equal(IgusaInvariants(1, 1, 1, 1), IgusaInvariants(-1, 1, -1, -1))
    assert weighted_equal(IgusaInvariants(1, 1, 1, 1), IgusaInvariants(2, 4, 8, 32), geometric=True)
    assert weighted_equal(IgusaInvariants(1, 1, 1, 1), IgusaInvariants(-1, 1, -1, -1), geometric=True)
    assert not weighted_equal(IgusaInvariants(1, 1, 1, 1), IgusaInvariants(2, 4, 8, 33), geometric=True)


def test_weighted_equal_is_an_equivalence():
    rng = random.Random(11)
    for _ in range(20):
        p = IgusaInvariants(*(Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(3)), rng.randint(1, 50))
        c1 = Fraction(rng.choice([-1, 1]) * rng.randint(1, 6), rng.randint(1, 6))
        c2 = Fraction(rng.randint(1, 6), rng.randint(1, 6))
        q, r = p.scaled(c1), p.scaled(c1).scaled(c2)
        assert weighted_equal(p, p)
        assert weighted_equal(p, q) and weighted_equal(q, p)
        assert weighted_equal(q, r) and weighted_equal(p, r)


def test_parse_toy_equations(data_dir):
    eq = toy(data_dir, 'igusa_toy.eq')
    assert eq.discriminant == 12
    assert eq.coordinate_system == CoordinateSystem.IGUSA
    assert eq.weighted_degree == 10
    satake = toy(data_dir, 'satake_all.eq')
    assert satake.coordinate_system == CoordinateSystem.SATAKE
    assert len(satake.satake_transform) == 6


def test_repeated_monomials_merge():
    eq = parse_humbert_text(HEADER + "1 0 0 0 : 2\n1 0 0 0 : -1\n0 0 0 0 : 0\n")
    assert eq.monomials == (((1, 0, 0, 0), Fraction(1)),)


@pytest.mark.parametrize('text', [
    "discriminant=8\ncoords=igusa\nconvention=other-v0\n1 0 0 0 : 1\n",
    HEADER + "1 0 0 0 : 1\n0 1 0 0 : 1\n",
    HEADER + "1 0 0 : 1\n",
    HEADER + "1 0 0 0 : x\n",
    "discriminant=7\ncoords=igusa\nconvention=igusa-clebsch/transvectant-v1\n1 0 0 0 : 1\n",
    "discriminant=5\ncoords=satake\nconvention=igusa-clebsch/transvectant-v1\n1 0 0 0 0 0 : 1\n",
    "coords=igusa\nconvention=igusa-clebsch/transvectant-v1\n1 0 0 0 : 1\n",
])
def test_malformed_equations(text):
    with pytest.raises(DataFileError):
        parse_humbert_text(text)


def test_igusa_membership(data_dir):
    eq = toy(data_dir, 'igusa_toy.eq')
    assert humbert_membership(IgusaInvariants(1, 2, 3, 6), eq) == Membership.ON
    assert humbert_membership(IgusaInvariants(1, 2, 3, 5), eq) == Membership.OFF
    # weighted-projective: scaling the point keeps the answer
    assert humbert_membership(IgusaInvariants(1, 2, 3, 6).scaled(7), eq) == Membership.ON


def test_power_sums_to_polynomial():
    assert power_sums_to_polynomial([21, 91, 441, 2275, 12201, 67171]) == [1, -21, 175, -735, 1624, -1764, 720]


def test_satake_membership(data_dir):
    point = IgusaInvariants(1, 2, 3, 5)
    assert humbert_membership(point, toy(data_dir, 'satake_all.eq')) == Membership.NUMERIC_ON
    assert humbert_membership(point, toy(data_dir, 'satake_none.eq')) == Membership.NUMERIC_OFF
    assert Membership.NUMERIC_ON.is_on and not Membership.NUMERIC_OFF.is_on
    assert Membership.NUMERIC_ON.reliable and not Membership.NUMERIC_ON.is_exact


def test_unseparated_satake_membership_is_flagged(data_dir, caplog):
    # smallest value of |7 x1 - x2| / (7|x1| + |x2|) on roots 1..6 is 1/13
    point = IgusaInvariants(1, 2, 3, 5)
    eq = toy(data_dir, 'satake_none.eq')
    assert not satake_evaluate(point, eq, tol=0.05).reliable
    with caplog.at_level(logging.WARNING):
        result = humbert_membership(point, eq, tol=0.05)
    assert result == Membership.NUMERIC_OFF_UNRELIABLE
    assert not result.reliable
    assert not result.is_on
    assert Membership.NUMERIC_ON_UNRELIABLE.is_on
    assert 'Unreliable Satake evaluation' in caplog.text


def test_registry_forwards_precision(data_dir, monkeypatch):
    seen = []
    real_membership = moduli.humbert_membership

    def recording_membership(point, eq, tol, dps):
        seen.append(dps)
        return real_membership(point, eq, tol, dps)

    monkeypatch.setattr(moduli, 'humbert_membership', recording_membership)
    registry = HumbertRegistry.from_directory(os.path.join(data_dir, 'toy', 'humbert'))
    assert registry.membership(IgusaInvariants(1, 2, 3, 5), 5, dps=80) == Membership.NUMERIC_ON
    assert seen == [80]


def test_satake_separation_audit(data_dir):
    evaluation = satake_evaluate(IgusaInvariants(1, 2, 3, 5), toy(data_dir, 'satake_all.eq'))
    assert len(evaluation.values) == 720
    assert evaluation.min_value < 1e-20
    assert evaluation.reliable


def test_satake_is_permutation_order_independent(data_dir):
    eq = toy(data_dir, 'satake_all.eq')
    point = IgusaInvariants(1, 0, 0, 1)
    forward = satake_evaluate(point, eq, roots=[1, 2, 3, 4, 5, 6])
    backward = satake_evaluate(point, eq, roots=[6, 4, 2, 5, 3, 1])
    assert forward.values == backward.values


def test_satake_needs_transform():
    eq = parse_humbert_text(HEADER + "1 0 0 0 : 1\n")
    with pytest.raises(NumericPathwayError):
        satake_evaluate(IgusaInvariants(1, 2, 3, 5), eq)


def test_registry(data_dir):
    registry = HumbertRegistry.from_directory(os.path.join(data_dir, 'toy', 'humbert'))
    assert registry.discriminants() == [5, 12]
    assert len(registry.get(5)) == 2
    assert 12 in registry
    assert registry.membership(IgusaInvariants(1, 2, 3, 6), 12) == Membership.ON
    assert registry.membership(IgusaInvariants(1, 2, 3, 6), 8) is None
    assert HumbertRegistry.from_directory(os.path.join(data_dir, 'missing')).discriminants() == []


def test_rm_order_from_membership():
    order = rm_order_from_membership({8: False, 32: True, 72: False}, 8)
    assert (order.index, order.discriminant, order.checked_up_to) == (2, 8, 3)
    assert rm_order_from_membership({8: True}, 8).index == 1
    split = rm_order_from_membership({4: False, 9: True}, 1)
    assert split.index == 3 and split.decomposable
    assert rm_order_from_membership({}, 8) is None
    assert rm_order_from_membership({8: False}, 8) is None


def test_optimality_obstruction_set():
    assert optimality_obstruction_set(36) == [9, 4, 1]
    assert optimality_obstruction_set(32) == [8]
    assert optimality_obstruction_set(5) == []


def test_cm_list(cm_curve, rm_curve, data_dir):
    path = os.path.join(data_dir, 'cm', 'list.txt')
    records = load_cm_list(path)
    assert [r.label for r in records] == ['Z[zeta5]']
    assert cm_list_match(igusa_clebsch(cm_curve), path).label == 'Z[zeta5]'
    assert cm_list_match(igusa_clebsch(rm_curve), records) is None


def test_malformed_cm_list(tmp_path):
    path = tmp_path / 'list.txt'
    path.write_text("# comment\n0 0 1 : missing invariant\n")
    with pytest.raises(DataFileError):
        load_cm_list(str(path))
