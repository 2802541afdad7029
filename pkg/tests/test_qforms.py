import random

import pytest

from g2endo.analysis.qforms import (
    BinaryQuadraticForm,
    certify_qm_sets,
    deduce_qm_ring,
    describe_order,
    enumerate_candidates,
    equivalent,
    hilbert_symbol,
    primitively_represents,
    quaternion_algebra_disc,
    reduce_gl2z,
    represented_values,
    required_queries,
)
from g2endo.errors import InconclusiveError, QuadraticFormError

TARGET = BinaryQuadraticForm(12, 12, 24)


def faithful(form):
    return lambda d: primitively_represents(form, d) is not None


@pytest.mark.parametrize('x, d, vector', [
    (0, 36, (1, 1)),
    (2, 40, (1, 1)),
    (4, 28, (1, -1)),
    (6, 48, (1, 1)),
])
def test_primitive_representations(x, d, vector):
    assert primitively_represents(BinaryQuadraticForm(12, x, 24), d) == vector


def test_non_representation():
    form = BinaryQuadraticForm(12, 0, 24)
    assert primitively_represents(form, 48) is None
    assert primitively_represents(form, 0) is None
    assert 12 in represented_values(form, 40)
    assert 48 not in represented_values(form, 100)


def test_reduction():
    assert reduce_gl2z(BinaryQuadraticForm(24, 12, 12)) == BinaryQuadraticForm(12, 0, 12)
    assert reduce_gl2z(BinaryQuadraticForm(12, -4, 24)) == BinaryQuadraticForm(12, 4, 24)
    with pytest.raises(QuadraticFormError):
        reduce_gl2z(BinaryQuadraticForm(1, 2, 1))


@pytest.mark.slow
def test_reduction_is_canonical_under_basis_changes():
    rng = random.Random(11)
    generators = [(1, 1, 0, 1), (1, -1, 0, 1), (0, 1, 1, 0), (1, 0, 0, -1)]
    for _ in range(50):
        form = BinaryQuadraticForm(rng.randint(1, 30), rng.randint(-10, 10), rng.randint(1, 30))
        if not form.is_positive_definite():
            continue
        moved = form
        for _ in range(rng.randint(1, 12)):
            moved = moved.transform(*rng.choice(generators))
        assert moved.det == form.det
        assert reduce_gl2z(moved) == reduce_gl2z(form)
        assert equivalent(moved, form)


def test_candidates_for_12_24():
    candidates = enumerate_candidates(12, 24)
    xs = [f.x for f in candidates]
    assert xs == sorted(xs)
    assert all(x % 2 == 0 for x in xs)
    assert 12 in xs
    assert len({reduce_gl2z(f) for f in candidates}) == len(candidates)
    with pytest.raises(QuadraticFormError):
        enumerate_candidates(12, 7)


def test_hilbert_symbol():
    assert hilbert_symbol(-1, -1, 0) == -1
    assert hilbert_symbol(-1, -1, 2) == -1
    assert hilbert_symbol(-1, -1, 3) == 1
    assert hilbert_symbol(2, 3, 3) == -1
    assert hilbert_symbol(2, 3, 2) == -1
    assert hilbert_symbol(2, 3, 0) == 1


def test_describe_order():
    descriptor = describe_order(TARGET)
    assert descriptor.disc == 36
    assert descriptor.algebra_disc == 6
    assert descriptor.index_in_maximal == 6
    assert quaternion_algebra_disc(TARGET) == 6


def test_deduce_qm_ring_with_faithful_answers():
    descriptor = deduce_qm_ring(12, 24, faithful(TARGET))
    assert descriptor.disc == 36
    assert descriptor.algebra_disc == 6
    assert descriptor.index_in_maximal == 6
    assert descriptor.reduced_form == reduce_gl2z(TARGET)


def test_deduce_qm_ring_accepts_dict_answers():
    answers = {d: faithful(TARGET)(d) for d in required_queries(12, 24)}
    assert deduce_qm_ring(12, 24, answers).disc == 36


def test_partial_answers_leave_several_survivors():
    answers = {12: True, 24: True, 36: True, 28: False, 40: False, 48: False}
    with pytest.raises(InconclusiveError) as info:
        deduce_qm_ring(12, 24, answers)
    assert len(info.value.survivors) > 1


def test_required_queries_cover_every_discriminant():
    queries = required_queries(12, 24)
    for d in (12, 24, 28, 36, 40, 48):
        assert d in queries
    assert queries == sorted(queries)


def test_certification_sets():
    sets = certify_qm_sets(TARGET)
    assert sets.positive == (12, 24)
    assert sets.negative
    for candidate, d in sets.witnesses:
        assert primitively_represents(candidate, d) is not None
        assert primitively_represents(TARGET, d) is None
    assert sets.to_dict()['P'] == [12, 24]
