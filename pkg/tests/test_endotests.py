import logging
from dataclasses import replace

import pytest

from g2endo.analysis import endotests
from g2endo.analysis.endotests import (
    DiscBoundMode,
    DiscBoundVerdict,
    IrreducibilityStatus,
    Witness,
    disc_bound,
    geometric_irreducibility,
    k_irreducibility,
    restricted_gcd,
    rm_candidates_from,
    rm_field_of_definition,
    rm_split_form,
    rm_split_test,
    trivial_endomorphism_certificate,
    twist_scan,
    verify_witness,
    weil_shape_odd_vanishing,
)
from g2endo.analysis.finitefield import CurveModel, FrobeniusData, frobenius_stream, weil_polynomial
from g2endo.analysis.intpoly import IntPoly
from g2endo.analysis.numfield import factor


def synthetic(p, a, b):
    return FrobeniusData(p, p + 1 + a, 0, a, b, weil_polynomial(p, a, b), b % p != 0, False)


def test_rm_curve_is_irreducible_without_qm_at_seven(rm_curve):
    verdict = geometric_irreducibility(rm_curve, 7)
    assert verdict.status == IrreducibilityStatus.ABS_IRREDUCIBLE_NO_QM
    assert verdict.witness == Witness.IRREDUCIBLE_TWIST
    assert verdict.witness_prime <= 7
    assert verify_witness(rm_curve, verdict)


def test_irreducible_quintic(trivial_curve):
    verdict = geometric_irreducibility(trivial_curve, 7)
    assert verdict.status == IrreducibilityStatus.ABS_IRREDUCIBLE
    assert verify_witness(trivial_curve, verdict)


def test_valuation_one_shortcut(trivial_curve):
    verdict = trivial_endomorphism_certificate(trivial_curve)
    assert verdict.status == IrreducibilityStatus.END_IS_Z
    assert verdict.witness == Witness.VALUATION_ONE
    assert verdict.witness_prime == 19
    assert verdict.scan_prime is not None
    assert verdict.to_dict()['scan_prime'] == verdict.scan_prime
    assert verify_witness(trivial_curve, verdict)
    assert not verify_witness(trivial_curve, replace(verdict, scan_prime=None))


def test_valuation_shortcut_respects_factor_cap(rm_curve):
    assert trivial_endomorphism_certificate(rm_curve, factor_cap=1) is None


def test_valuation_shortcut_uses_trial_bound(trivial_curve, monkeypatch):
    seen = []

    def recording_factor(n, trial_bound=10 ** 6, **kwargs):
        seen.append(trial_bound)
        return factor(n, trial_bound=trial_bound, **kwargs)

    monkeypatch.setattr(endotests, 'factor', recording_factor)
    verdict = trivial_endomorphism_certificate(trivial_curve, trial_bound=10)
    assert seen == [10]
    assert verdict.witness_prime == 19


def test_split_curve_model(degree7_curve):
    curve = CurveModel.from_h_g((0, 1, 1), (14, 0, 11, 7, 2, 3, 1))
    assert curve.f == degree7_curve.f
    assert degree7_curve.disc % 7 == 0
    assert degree7_curve.disc % 49 != 0


def test_valuation_shortcut_rejected_on_split_curve(degree7_curve, caplog):
    with caplog.at_level(logging.WARNING):
        assert trivial_endomorphism_certificate(degree7_curve) is None
    assert 'Skipping valuation shortcut' in caplog.text


def test_split_curve_is_never_absolutely_irreducible(degree7_curve):
    verdict = geometric_irreducibility(degree7_curve, 59)
    assert not verdict.proves_abs_irreducible
    assert verdict.status in (IrreducibilityStatus.NO_QM, IrreducibilityStatus.INCONCLUSIVE)
    assert twist_scan(degree7_curve, 59).witness != Witness.IRREDUCIBLE_TWIST


def test_k_irreducibility_on_rm_curve(rm_curve):
    verdict = k_irreducibility(rm_curve, 59)
    assert verdict.status == IrreducibilityStatus.K_SIMPLE_NO_QM
    assert verdict.proves_k_simple
    assert verdict.proves_k_no_qm
    assert not verdict.proves_abs_irreducible
    assert not verdict.proves_no_qm
    assert verify_witness(rm_curve, verdict)


def test_k_irreducibility_says_nothing_geometric():
    curve = CurveModel(IntPoly((0, -1, 0, 0, 0, 1)))
    verdict = k_irreducibility(curve, 59)
    assert verdict.status in (
        IrreducibilityStatus.K_SIMPLE_NO_QM,
        IrreducibilityStatus.K_NO_QM,
        IrreducibilityStatus.INCONCLUSIVE,
    )
    assert not verdict.proves_abs_irreducible
    assert not verdict.proves_no_qm
    assert not geometric_irreducibility(curve, 59).proves_abs_irreducible
    assert not geometric_irreducibility(curve, 59).proves_no_qm


def test_over_k_bound_with_early_exit(rm_curve):
    result = disc_bound(frobenius_stream(rm_curve, 23), mode=DiscBoundMode.OVER_K)
    assert result.verdict == DiscBoundVerdict.END_IS_Z
    assert result.early_exit
    assert result.d_of_B <= 24


def test_over_k_bound_without_early_exit(rm_curve):
    result = disc_bound(frobenius_stream(rm_curve, 67), mode=DiscBoundMode.OVER_K, early_exit=False)
    assert result.verdict == DiscBoundVerdict.END_IS_Z
    assert not result.early_exit


def test_geometric_bound_finds_sqrt2(rm_curve):
    result = disc_bound(frobenius_stream(rm_curve, 200))
    assert 64 % result.d_of_B == 0
    assert result.d_of_B == 64
    assert result.cm_excluded
    assert [q.fundamental_discriminant for q in result.rm_candidates] == [8]
    assert result.verdict == DiscBoundVerdict.BOUND_ONLY
    assert all(d % 64 == 0 for d in result.discriminants)


def test_geometric_bound_on_cm_curve(cm_curve):
    result = disc_bound(frobenius_stream(cm_curve, 100))
    assert result.d_of_B == 125
    assert not result.cm_excluded
    assert result.rm_candidates == ()
    assert set(result.discriminants) == {125}


def test_empty_place_set_warns(caplog):
    with caplog.at_level(logging.WARNING):
        result = disc_bound(iter(()))
    assert result.d_of_B == 0
    assert result.verdict == DiscBoundVerdict.BOUND_ONLY
    assert 'No admissible place' in caplog.text


def test_rm_candidates_from():
    assert [q.fundamental_discriminant for q in rm_candidates_from(64)] == [8]
    assert [q.fundamental_discriminant for q in rm_candidates_from(1600)] == [5, 8, 40]
    assert rm_candidates_from(0) == ()
    assert rm_candidates_from(20) == ()


def test_split_form_real_quadratic_two():
    fd = synthetic(7, -2, 13)
    assert rm_split_form(fd, 2) == (-22, 4)
    assert rm_split_test(fd, 2)
    assert rm_split_form(fd, 5) is None
    assert rm_split_form(fd, 1) is None


def test_split_form_half_integral():
    fd = synthetic(11, -1, 21)
    assert rm_split_form(fd, 5) == (-41, 1)


def test_rm_curve_splits_over_sqrt2_everywhere(rm_curve):
    table = list(frobenius_stream(rm_curve, 100))
    assert table
    assert all(rm_split_test(fd, 2) for fd in table)


def test_split_test_rejects_trivial_curve(trivial_curve):
    table = list(frobenius_stream(trivial_curve, 100))
    for m in (2, 3, 5, 13):
        assert not all(rm_split_test(fd, m) for fd in table)


def test_weil_shape_odd_vanishing():
    assert weil_shape_odd_vanishing(synthetic(11, 0, 6))
    assert not weil_shape_odd_vanishing(synthetic(11, 0, 5))
    assert not weil_shape_odd_vanishing(synthetic(11, 2, 6))


def test_field_of_definition(rm_curve):
    result = rm_field_of_definition(rm_curve, 8, 61)
    assert result.field.fundamental_discriminant == 8
    assert result.field.label == 'Q(sqrt(2))'
    assert {q.fundamental_discriminant for q in result.eliminated} == {-3, -4, -8, 12, 24, -24}
    assert result.evidence['support'] == [2, 3]


@pytest.mark.slow
def test_restricted_gcd_over_sqrt_minus_two(rm_curve):
    assert restricted_gcd(rm_curve, -8, 500) == 16
    for fd in frobenius_stream(rm_curve, 200):
        if fd.p % 8 == 3:
            assert weil_shape_odd_vanishing(fd)


def test_restricted_gcd_shrinks_with_the_bound(rm_curve):
    values = [restricted_gcd(rm_curve, -8, bound) for bound in (60, 120, 240)]
    assert values[-1] != 0
    for earlier, later in zip(values, values[1:]):
        if earlier:
            assert earlier % later == 0
