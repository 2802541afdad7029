"""
Analysis pipeline for a single curve.

Runs the irreducibility test, the discriminant bound and, when data files
are available, Humbert certification, the field of definition of real
multiplication and the quaternionic deduction. Every claim in the report
carries the strength of its proof.
"""

import logging
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import partial

import gmpy2

from g2endo import CONVENTION_ID, SCHEMA_VERSION
from g2endo.analysis.endotests import (
    DiscBoundMode,
    DiscBoundVerdict,
    IrreducibilityStatus,
    disc_bound,
    geometric_irreducibility,
    rm_field_of_definition,
    trivial_endomorphism_certificate,
    twist_scan,
    weil_shape_odd_vanishing,
)
from g2endo.analysis.finitefield import frobenius_table
from g2endo.analysis.moduli import (
    HumbertRegistry,
    cm_list_match,
    igusa_clebsch,
    load_cm_list,
    rm_order_from_membership,
)
from g2endo.analysis.qforms import certify_qm_sets, deduce_qm_ring
from g2endo.config import Settings
from g2endo.errors import G2EndoError, InconclusiveError

logger = logging.getLogger(__name__)


class ProofStatus(Enum):
    PROVEN_UPPER = 'ProvenUpper'
    PROVEN_LOWER = 'ProvenLower'
    PROVEN_BOTH = 'ProvenBoth'
    HEURISTIC = 'Heuristic'


class Kind(Enum):
    TRIVIAL = 'Trivial'
    RM = 'RM'
    CM = 'CM'
    DECOMPOSABLE = 'Decomposable'
    QM = 'QM'
    UNDETERMINED = 'Undetermined'


class ExitCode:
    PROVEN = 0
    ERROR = 1
    HEURISTIC = 2
    INCONCLUSIVE = 3


@dataclass(frozen=True)
class Classification:
    kind: Kind
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {'kind': self.kind.value, **self.params}


@dataclass(frozen=True)
class Claim:
    statement: str
    status: ProofStatus

    def to_dict(self):
        return {'statement': self.statement, 'status': self.status.value}


@dataclass
class AnalysisReport:
    curve: dict
    classification: Classification = None
    proof_status: ProofStatus = ProofStatus.HEURISTIC
    claims: list = field(default_factory=list)
    evidence: list = field(default_factory=list)
    bounds_used: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    field_of_definition: str = None

    def classify(self, kind, status, statement, **params):
        self.classification = Classification(kind, params)
        self.proof_status = status
        self.claims.append(Claim(statement, status))

    def add_evidence(self, kind, **details):
        self.evidence.append({'kind': kind, **details})

    @property
    def exit_code(self):
        if self.classification is None or self.classification.kind == Kind.UNDETERMINED:
            return ExitCode.INCONCLUSIVE
        if self.proof_status == ProofStatus.PROVEN_BOTH:
            return ExitCode.PROVEN
        return ExitCode.HEURISTIC

    def to_dict(self, include_timings=False):
        out = {
            'schema': SCHEMA_VERSION,
            'convention_id': CONVENTION_ID,
            'curve': self.curve,
            'classification': self.classification.to_dict() if self.classification else None,
            'proof_status': self.proof_status.value,
            'claims': [c.to_dict() for c in self.claims],
            'evidence': self.evidence,
            'bounds_used': self.bounds_used,
            'field_of_definition': self.field_of_definition,
        }
        if include_timings:
            out['timings'] = self.timings
        return out


@dataclass
class DataBundle:
    """Humbert equations and CM records found under a data directory."""

    humbert: HumbertRegistry
    cm_records: list
    root: str = ''


def load_data(data_dir):
    """
    Load `humbert/*.eq` and `cm/list.txt` from data_dir.

    Returns:
        DataBundle: Possibly empty bundle; malformed files raise DataFileError
    """
    if not data_dir:
        return DataBundle(HumbertRegistry(), [])
    humbert = HumbertRegistry.from_directory(os.path.join(data_dir, 'humbert'))
    cm_path = os.path.join(data_dir, 'cm', 'list.txt')
    cm_records = load_cm_list(cm_path) if os.path.exists(cm_path) else []
    if cm_records:
        logger.info(f"Loaded {len(cm_records)} CM records from {cm_path}")
    return DataBundle(humbert, cm_records, data_dir)


@contextmanager
def _timed(report, stage):
    start = time.perf_counter()
    try:
        yield
    finally:
        elapsed = time.perf_counter() - start
        report.timings[stage] = round(report.timings.get(stage, 0.0) + elapsed, 6)


class _MembershipOracle:
    """Cached Humbert membership for one point, recording which answers were numeric."""

    def __init__(self, point, data, settings, report):
        self.point = point
        self.data = data
        self.settings = settings
        self.report = report
        self.answers = {}

    def __call__(self, d):
        if d not in self.answers:
            self.answers[d] = self._ask(d)
        result = self.answers[d]
        return None if result is None else result.is_on

    def _ask(self, d):
        if d not in self.data.humbert:
            return None
        try:
            result = self.data.humbert.membership(self.point, d, self.settings.tolerance, self.settings.dps)
        except G2EndoError as e:
            logger.error(f"Error evaluating H_{d}: {str(e)}")
            return None
        sources = [os.path.basename(eq.source) for eq in self.data.humbert.get(d)]
        self.report.add_evidence('humbert', discriminant=d, membership=result.value,
                                 reliable=result.reliable, files=sources)
        return result

    def exact(self, d):
        answer = self.answers.get(d)
        return answer is not None and answer.is_exact

    def memberships(self, discriminants):
        out = {}
        for d in discriminants:
            answer = self(d)
            if answer is not None:
                out[d] = answer
        return out


def curve_echo(curve):
    return {'f': list(curve.f.coeffs), 'model': str(curve)}


def analyze(curve, settings=None, data_dir=None):
    """
    Classify the geometric endomorphism ring of Jac(C).

    Args:
        curve (CurveModel): Genus-2 model y^2 = f(x)
        settings (Settings): Bounds and numeric parameters
        data_dir (str): Directory with humbert/ and cm/ data, or None

    Returns:
        AnalysisReport: Classification with per-claim proof status
    """
    settings = settings or Settings()
    data_dir = data_dir if data_dir is not None else settings.data_dir
    report = AnalysisReport(curve_echo(curve))
    report.bounds_used = {'B_irred': settings.b_irred, 'B_disc': settings.b_disc}
    stage = partial(_timed, report)

    logger.info(f"Checking {curve}")
    with stage('data'):
        data = load_data(data_dir)
    if data.root:
        report.add_evidence('data', root=os.path.basename(os.path.normpath(data.root)),
                            humbert=data.humbert.discriminants(), cm_records=len(data.cm_records))

    with stage('irreducibility'):
        verdict = geometric_irreducibility(
            curve, settings.b_irred, settings.factor_cap, settings.galois_prime_budget, settings.max_prime,
            settings.trial_bound,
        )
        report.add_evidence('irreducibility', **verdict.to_dict())
        if verdict.status == IrreducibilityStatus.ABS_IRREDUCIBLE:
            shortcut = trivial_endomorphism_certificate(
                curve, settings.factor_cap, settings.galois_prime_budget,
                settings.b_irred, settings.max_prime, settings.trial_bound,
            )
            if shortcut is not None:
                verdict = shortcut
            else:
                scan = twist_scan(curve, settings.b_irred, max_prime=settings.max_prime)
                if scan.proves_no_qm:
                    report.add_evidence('no-qm', prime=scan.no_qm_prime, bound=settings.b_irred)
                    verdict = replace(verdict, status=IrreducibilityStatus.ABS_IRREDUCIBLE_NO_QM,
                                      no_qm_prime=scan.no_qm_prime, bound_used=settings.b_irred)
                else:
                    report.claims.append(Claim('Jac(C) is absolutely irreducible', ProofStatus.PROVEN_BOTH))
            if verdict.proves_end_is_z:
                report.add_evidence('irreducibility', **verdict.to_dict())

    if verdict.proves_end_is_z:
        report.classify(Kind.TRIVIAL, ProofStatus.PROVEN_BOTH, 'End(Jac(C)) over Q-bar is Z')
    elif verdict.proves_abs_irreducible and verdict.proves_no_qm:
        _simple_no_qm(curve, settings, data, report, stage)
    elif verdict.proves_abs_irreducible:
        _quaternionic(curve, settings, data, report, stage, allow_split=False)
    elif verdict.status == IrreducibilityStatus.NO_QM:
        _split(curve, settings, data, report, stage)
    else:
        _quaternionic(curve, settings, data, report, stage, allow_split=True)

    logger.info(
        f"Completed analysis of {curve}: {report.classification.kind.value} ({report.proof_status.value})"
    )
    return report


def _simple_no_qm(curve, settings, data, report, stage):
    """Absolutely irreducible without potential QM: End^0 is Q, real quadratic or quartic CM."""
    with stage('frobenius'):
        table = frobenius_table(curve, settings.b_disc, settings.workers, settings.max_prime)
    with stage('disc_bound'):
        bound = disc_bound(table, mode=DiscBoundMode.GEOMETRIC)
    report.add_evidence('disc_bound', mode=DiscBoundMode.GEOMETRIC.value, **bound.to_dict())

    if bound.verdict == DiscBoundVerdict.END_IS_Z:
        report.classify(Kind.TRIVIAL, ProofStatus.PROVEN_BOTH, 'End(Jac(C)) over Q-bar is Z')
        return
    if bound.d_of_B == 0:
        report.classify(Kind.UNDETERMINED, ProofStatus.HEURISTIC,
                        f'No admissible place up to {settings.b_disc}')
        return

    if not bound.cm_excluded:
        _complex(curve, data, report, bound)
        return

    candidates = [qf.fundamental_discriminant for qf in bound.rm_candidates]
    if not candidates:
        report.classify(Kind.UNDETERMINED, ProofStatus.HEURISTIC,
                        f'd(B) = {bound.d_of_B} leaves no real quadratic candidate')
        return

    point = igusa_clebsch(curve)
    oracle = _MembershipOracle(point, data, settings, report)
    for d in candidates:
        covering = [k for k in data.humbert.discriminants() if k % d == 0 and gmpy2.is_square(k // d)]
        order = rm_order_from_membership(oracle.memberships(covering), d)
        if order is None:
            continue
        exact = oracle.exact(order.index ** 2 * d)
        status = ProofStatus.PROVEN_BOTH if exact else ProofStatus.PROVEN_UPPER
        report.classify(Kind.RM, status, f'End(Jac(C)) over Q-bar is the order of index {order.index} '
                        f'in Q(sqrt D), D = {d}', disc=d, order_index=order.index)
        _field_of_definition(curve, settings, report, stage, table, d)
        return

    if len(candidates) == 1:
        report.classify(Kind.RM, ProofStatus.PROVEN_UPPER,
                        f'End(Jac(C)) over Q-bar is contained in Q(sqrt {candidates[0]})',
                        disc=candidates[0], order_index=None)
    else:
        report.classify(Kind.RM, ProofStatus.HEURISTIC,
                        f'Real multiplication by one of {candidates}', disc=None, candidates=candidates)


def _complex(curve, data, report, bound):
    """Every admissible place gave the same field: CM is suspected."""
    field_disc = bound.discriminants[0]
    if data.cm_records:
        record = cm_list_match(igusa_clebsch(curve), data.cm_records)
        if record is not None:
            report.add_evidence('cm-list', label=record.label)
            report.classify(Kind.CM, ProofStatus.PROVEN_BOTH, f'Jac(C) has CM by {record.label}',
                            field_disc=field_disc, label=record.label)
            return
    report.classify(Kind.CM, ProofStatus.HEURISTIC,
                    f'Every admissible place up to B gives the quartic field of discriminant {field_disc}',
                    field_disc=field_disc, label=None)


def _field_of_definition(curve, settings, report, stage, table, rm_disc):
    with stage('field_of_definition'):
        over_k = disc_bound(table, mode=DiscBoundMode.OVER_K)
        report.add_evidence('disc_bound', mode=DiscBoundMode.OVER_K.value, **over_k.to_dict())
        if over_k.verdict != DiscBoundVerdict.END_IS_Z:
            logger.warning(f"Skipping field of definition for {curve}: End over Q not proven to be Z")
            return
        report.claims.append(Claim('End(Jac(C)) over Q is Z', ProofStatus.PROVEN_BOTH))
        try:
            result = rm_field_of_definition(
                curve, rm_disc, settings.b_disc, settings.max_prime, settings.trial_bound,
            )
        except G2EndoError as e:
            logger.error(f"Error finding field of definition for {curve}: {str(e)}")
            report.add_evidence('field-of-definition', error=str(e))
            return

    d = result.field.fundamental_discriminant
    report.field_of_definition = result.field.label
    report.claims.append(Claim(f'Real multiplication is defined over {result.field.label}',
                               ProofStatus.PROVEN_BOTH))
    inert = {fd.p: weil_shape_odd_vanishing(fd) for fd in table
             if fd.p <= settings.b_irred and gmpy2.kronecker(d, fd.p) == -1}
    report.add_evidence(
        'field-of-definition', field=result.field.label, eliminated=[q.label for q in result.eliminated],
        bounds={str(k): v for k, v in result.evidence['bounds'].items()},
        inert_odd_vanishing={str(p): v for p, v in inert.items()},
    )


def _split(curve, settings, data, report, stage):
    """Geometrically reducible without QM: look for an (n, n)-splitting."""
    with stage('humbert'):
        point = igusa_clebsch(curve)
        oracle = _MembershipOracle(point, data, settings, report)
        n = _square_index(oracle, data)
    if n is not None:
        status = ProofStatus.PROVEN_LOWER if oracle.exact(n * n) else ProofStatus.HEURISTIC
        report.classify(Kind.DECOMPOSABLE, status, f'Jac(C) is ({n},{n})-split', n=n)
    else:
        report.classify(Kind.DECOMPOSABLE, ProofStatus.HEURISTIC,
                        f'Every twisted Frobenius polynomial up to {settings.b_irred} is reducible', n=None)


def _square_index(oracle, data):
    squares = [k for k in data.humbert.discriminants() if k >= 4 and gmpy2.is_square(k)]
    order = rm_order_from_membership(oracle.memberships(squares), 1)
    return None if order is None else order.index


def _quaternionic(curve, settings, data, report, stage, allow_split):
    """QM not excluded: deduce the quaternionic order from two non-square Humbert surfaces."""
    with stage('humbert'):
        point = igusa_clebsch(curve)
        oracle = _MembershipOracle(point, data, settings, report)
        on = [d for d in data.humbert.discriminants() if not gmpy2.is_square(d) and oracle(d)]
        if len(on) >= 2:
            d1, d2 = on[0], on[1]
            try:
                descriptor = deduce_qm_ring(d1, d2, oracle)
            except InconclusiveError as e:
                logger.error(f"Error deducing QM order for {curve}: {str(e)}")
                report.add_evidence('qm-deduction', d1=d1, d2=d2, survivors=e.survivors)
                descriptor = None
            if descriptor is not None:
                status = _qm_status(descriptor, oracle, settings)
                report.classify(Kind.QM, status, f'End(Jac(C)) over Q-bar is a quaternionic order of '
                                f'discriminant {descriptor.disc}', **descriptor.to_dict())
                return
        n = _square_index(oracle, data) if allow_split else None

    if n is not None:
        status = ProofStatus.PROVEN_LOWER if oracle.exact(n * n) else ProofStatus.HEURISTIC
        report.classify(Kind.DECOMPOSABLE, status, f'Jac(C) is ({n},{n})-split', n=n)
    else:
        report.classify(Kind.UNDETERMINED, ProofStatus.HEURISTIC,
                        'Quaternionic multiplication or a split Jacobian is not excluded')


def _qm_status(descriptor, oracle, settings):
    """ProvenBoth when every certifying surface was answered exactly and as predicted."""
    try:
        sets = certify_qm_sets(descriptor.reduced_form, settings.certify_cap)
    except G2EndoError as e:
        logger.error(f"Error certifying QM order {descriptor.reduced_form}: {str(e)}")
        return ProofStatus.HEURISTIC
    oracle.report.add_evidence('qm-certificate', **sets.to_dict())
    positive_ok = all(oracle(d) is True and oracle.exact(d) for d in sets.positive)
    negative_ok = all(oracle(d) is False and oracle.exact(d) for d in sets.negative)
    return ProofStatus.PROVEN_BOTH if positive_ok and negative_ok else ProofStatus.HEURISTIC
