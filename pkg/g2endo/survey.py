"""
Survey over boxes of quintic models.

Enumerates y^2 = x^5 + a4 x^4 + a3 x^3 + a2 x^2 + a1 x + a0 with |a_i| <= box
(and a4 >= 0 by default), classifies each model and tallies the results.
"""

import json
import logging
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace

from tqdm import tqdm

from g2endo.analysis.endotests import Witness
from g2endo.analysis.finitefield import CurveModel
from g2endo.config import Settings
from g2endo.errors import G2EndoError, SingularCurveError
from g2endo.report import Kind, analyze

logger = logging.getLogger(__name__)

CHUNK_SIZE = 64

SINGULAR = 'Singular'
FAILED = 'Error'

_SCAN_WITNESSES = (Witness.IRREDUCIBLE_TWIST, Witness.NON_SQUARE_TWIST)


@dataclass(frozen=True)
class SurveyConfig:
    box: int = 10
    a4_nonneg: bool = True
    b_irred: int = 59
    b_disc: int = 200
    sample: int = None
    seed: int = 0
    workers: int = 1
    data_dir: str = ''

    @property
    def model_count(self):
        width = 2 * self.box + 1
        a4_width = self.box + 1 if self.a4_nonneg else width
        return a4_width * width ** 4


def coefficients_at(index, box, a4_nonneg=True):
    """Coefficients (a0, ..., a4, 1) of the model at a mixed-radix index, a0 varying fastest."""
    width = 2 * box + 1
    coeffs = []
    for _ in range(4):
        index, digit = divmod(index, width)
        coeffs.append(digit - box)
    coeffs.append(index if a4_nonneg else index - box)
    coeffs.append(1)
    return coeffs


def _row(report):
    kind = report.classification.kind
    params = report.classification.params
    if kind == Kind.RM and params.get('disc'):
        return f"RM D={params['disc']}"
    if kind == Kind.CM:
        return f"CM {params.get('label') or params.get('field_disc')}"
    if kind == Kind.DECOMPOSABLE and params.get('n'):
        return f"Decomposable ({params['n']},{params['n']})"
    return kind.value


def _scan_prime(report):
    """Largest prime the Frobenius scan of the irreducibility test needed, or None."""
    primes = [
        e['witness_prime'] for e in report.evidence
        if e['kind'] == 'irreducibility' and e.get('witness') in _SCAN_WITNESSES
    ]
    primes += [e['prime'] for e in report.evidence if e['kind'] == 'no-qm']
    primes += [e.get('scan_prime') for e in report.evidence if e['kind'] == 'irreducibility']
    primes = [p for p in primes if p is not None]
    return max(primes) if primes else None


def classify_model(index, config, settings):
    """Per-curve log record for the model at index."""
    coeffs = coefficients_at(index, config.box, config.a4_nonneg)
    record = {'index': index, 'coeffs': coeffs}
    try:
        curve = CurveModel.from_coeffs(coeffs)
    except SingularCurveError:
        record['row'] = SINGULAR
        return record
    try:
        report = analyze(curve, settings, config.data_dir)
    except G2EndoError as e:
        logger.error(f"Error classifying {curve}: {str(e)}")
        record['row'] = FAILED
        record['error'] = str(e)
        return record
    record['row'] = _row(report)
    record['proof_status'] = report.proof_status.value
    record['scan_prime'] = _scan_prime(report)
    return record


def _classify_chunk(indices, config, settings):
    return [classify_model(i, config, settings) for i in indices]


@dataclass
class SurveyResult:
    config: SurveyConfig
    records: list = field(default_factory=list)

    @property
    def tested(self):
        return len(self.records)

    @property
    def rows(self):
        return Counter(r['row'] for r in self.records)

    @property
    def singular(self):
        return self.rows[SINGULAR]

    @property
    def max_scan_prime(self):
        primes = [r['scan_prime'] for r in self.records if r.get('scan_prime') is not None]
        return max(primes) if primes else None

    def table(self):
        rows = self.rows
        return {
            'models': self.config.model_count,
            'tested': self.tested,
            'singular': rows.pop(SINGULAR, 0),
            'rows': dict(sorted(rows.items())),
            'max_scan_prime': self.max_scan_prime,
        }

    def write_log(self, path):
        with open(path, 'w') as f:
            for record in self.records:
                f.write(json.dumps(record, sort_keys=True) + '\n')
        logger.info(f"Wrote {len(self.records)} survey records to {path}")


def survey_indices(config):
    total = config.model_count
    if config.sample is None or config.sample >= total:
        return range(total)
    rng = random.Random(config.seed)
    return sorted(rng.sample(range(total), config.sample))


def survey(config, settings=None):
    """
    Classify every model in the box, or a seeded sample of it.

    Args:
        config (SurveyConfig): Box, bounds, sample and worker count
        settings (Settings): Numeric and bound settings; bounds from config win

    Returns:
        SurveyResult: Per-curve records sorted by index
    """
    settings = replace(settings or Settings(), b_irred=config.b_irred, b_disc=config.b_disc)
    indices = list(survey_indices(config))
    logger.info(f"Checking {len(indices)} of {config.model_count} models with box {config.box}")

    records = []
    chunks = [indices[i:i + CHUNK_SIZE] for i in range(0, len(indices), CHUNK_SIZE)]
    if config.workers <= 1:
        for chunk in tqdm(chunks, desc="Classifying models"):
            records.extend(_classify_chunk(chunk, config, settings))
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            futures = {executor.submit(_classify_chunk, chunk, config, settings): chunk for chunk in chunks}
            for future in tqdm(as_completed(futures), total=len(futures), desc="Classifying models"):
                try:
                    records.extend(future.result())
                except Exception as e:
                    chunk = futures[future]
                    logger.error(f"Error classifying models {chunk[0]}..{chunk[-1]}: {str(e)}")
                    records.extend({'index': i, 'coeffs': coefficients_at(i, config.box, config.a4_nonneg),
                                    'row': FAILED, 'error': str(e)} for i in chunk)

    records.sort(key=lambda r: r['index'])
    result = SurveyResult(config, records)
    logger.info(f"Completed survey: {result.tested} models, {result.singular} singular")
    return result
