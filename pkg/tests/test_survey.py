import json

import pytest

from g2endo.config import Settings
from g2endo.report import Kind
from g2endo.survey import (
    SINGULAR,
    SurveyConfig,
    classify_model,
    coefficients_at,
    survey,
    survey_indices,
)


def test_model_count():
    assert SurveyConfig().model_count == 2139291
    assert SurveyConfig(box=1).model_count == 162
    assert SurveyConfig(box=1, a4_nonneg=False).model_count == 243


def test_coefficients_at():
    assert coefficients_at(0, 1) == [-1, -1, -1, -1, 0, 1]
    assert coefficients_at(1, 1) == [0, -1, -1, -1, 0, 1]
    assert coefficients_at(40, 1) == [0, 0, 0, 0, 0, 1]
    assert coefficients_at(161, 1) == [1, 1, 1, 1, 1, 1]
    assert coefficients_at(0, 1, a4_nonneg=False) == [-1, -1, -1, -1, -1, 1]
    assert coefficients_at(SurveyConfig().model_count - 1, 10) == [10, 10, 10, 10, 10, 1]


def test_sample_is_reproducible():
    config = SurveyConfig(sample=100, seed=7)
    first = survey_indices(config)
    assert first == survey_indices(config)
    assert first == sorted(set(first))
    assert len(first) == 100
    assert first != survey_indices(SurveyConfig(sample=100, seed=8))
    assert list(survey_indices(SurveyConfig(box=1, sample=1000))) == list(range(162))


def test_singular_model():
    record = classify_model(40, SurveyConfig(box=1), Settings())
    assert record['coeffs'] == [0, 0, 0, 0, 0, 1]
    assert record['row'] == SINGULAR


def test_trivial_model():
    record = classify_model(38, SurveyConfig(box=1), Settings())
    assert record['coeffs'] == [1, -1, 0, 0, 0, 1]
    assert record['row'] == Kind.TRIVIAL.value
    assert record['proof_status'] == 'ProvenBoth'


def test_small_survey(tmp_path):
    config = SurveyConfig(box=1, sample=8, seed=3, b_disc=100)
    result = survey(config)
    assert result.tested == 8
    assert [r['index'] for r in result.records] == list(survey_indices(config))
    table = result.table()
    assert table['models'] == 162
    assert table['singular'] + sum(table['rows'].values()) == 8

    log = tmp_path / 'survey.jsonl'
    result.write_log(str(log))
    lines = log.read_text().splitlines()
    assert len(lines) == 8
    assert json.loads(lines[0])['index'] == result.records[0]['index']


@pytest.mark.slow
def test_parallel_survey_matches_serial():
    serial = survey(SurveyConfig(box=1, sample=16, seed=5, b_disc=100))
    parallel = survey(SurveyConfig(box=1, sample=16, seed=5, b_disc=100, workers=2))
    assert parallel.records == serial.records


@pytest.mark.slow
def test_sampled_box_statistics():
    result = survey(SurveyConfig(box=10, sample=10 ** 4, seed=2024))
    table = result.table()
    # 7239 singular models in 2139291, three standard deviations
    assert 16 <= table['singular'] <= 52
    nonsingular = result.tested - table['singular']
    trivial = table['rows'].get(Kind.TRIVIAL.value, 0)
    assert abs(trivial / nonsingular - 2129918 / 2132052) <= 0.005
    assert table['max_scan_prime'] is None or table['max_scan_prime'] <= 59
