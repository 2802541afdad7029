"""
Endomorphism Tests Module

Decision procedures working from Frobenius data:
- geometric and K-irreducibility of the Jacobian (with the no-QM test)
- the valuation-1 and Galois-group shortcuts proving End = Z
- the gcd bound on field discriminants of Frobenius fields
- the split-form recognizer for real multiplication by a given field
- the minimal field of definition of real multiplication
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from math import gcd

import gmpy2
from sympy import divisors

from g2endo.analysis.finitefield import frobenius_data, frobenius_stream
from g2endo.analysis.intpoly import (
    GaloisVerdict,
    galois_sn_certificate,
    is_irreducible,
    perfect_square_root,
    twist,
)
from g2endo.analysis.numfield import (
    QuadraticField,
    factor,
    field_discriminant,
    is_fundamental_discriminant,
    quadratic_fields_unramified_outside,
    splits_in,
)
from g2endo.errors import FactorizationIncomplete, InconclusiveError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroupTheoryConstants:
    exponent_bound: int = 12
    extension_degree_set: frozenset = frozenset({1, 2, 3, 4, 6, 12})
    field_case_degree_bound: int = 4


GROUP_CONSTANTS = GroupTheoryConstants()

# d(B) at or below this excludes both RM (disc^2 >= 25) and CM (disc >= 125)
EARLY_EXIT_THRESHOLD = 24

DEFAULT_FACTOR_CAP = 10 ** 30

DEFAULT_TRIAL_BOUND = 10 ** 6

DEFAULT_SCAN_BOUND = 59


class IrreducibilityStatus(Enum):
    ABS_IRREDUCIBLE = 'AbsIrreducible'
    ABS_IRREDUCIBLE_NO_QM = 'AbsIrreducibleNoQM'
    END_IS_Z = 'EndIsZ'
    NO_QM = 'NoQM'
    K_SIMPLE_NO_QM = 'KSimpleNoQM'
    K_NO_QM = 'KNoQM'
    INCONCLUSIVE = 'Inconclusive'


# twist_scan statuses read over the base field when the exponent is 1
_OVER_K = {
    IrreducibilityStatus.ABS_IRREDUCIBLE_NO_QM: IrreducibilityStatus.K_SIMPLE_NO_QM,
    IrreducibilityStatus.NO_QM: IrreducibilityStatus.K_NO_QM,
}


class Witness:
    IRREDUCIBLE_QUINTIC = 'irreducible-quintic'
    VALUATION_ONE = 'valuation-one'
    GALOIS = 'galois-sn-an'
    IRREDUCIBLE_TWIST = 'irreducible-twist'
    NON_SQUARE_TWIST = 'non-square-twist'


@dataclass(frozen=True)
class IrreducibilityVerdict:
    status: IrreducibilityStatus
    witness: str = None
    witness_prime: int = None
    bound_used: int = 0
    certificate: object = None
    no_qm_prime: int = None
    scan_prime: int = None

    @property
    def proves_end_is_z(self):
        return self.status == IrreducibilityStatus.END_IS_Z

    @property
    def proves_abs_irreducible(self):
        return self.status in (
            IrreducibilityStatus.ABS_IRREDUCIBLE,
            IrreducibilityStatus.ABS_IRREDUCIBLE_NO_QM,
            IrreducibilityStatus.END_IS_Z,
        )

    @property
    def proves_no_qm(self):
        return self.status in (
            IrreducibilityStatus.ABS_IRREDUCIBLE_NO_QM,
            IrreducibilityStatus.END_IS_Z,
            IrreducibilityStatus.NO_QM,
        )

    @property
    def proves_k_simple(self):
        return self.status == IrreducibilityStatus.K_SIMPLE_NO_QM or self.proves_abs_irreducible

    @property
    def proves_k_no_qm(self):
        return self.status in (
            IrreducibilityStatus.K_SIMPLE_NO_QM,
            IrreducibilityStatus.K_NO_QM,
        ) or self.proves_no_qm

    def to_dict(self):
        out = {
            'status': self.status.value,
            'witness': self.witness,
            'witness_prime': self.witness_prime,
            'bound_used': self.bound_used,
        }
        if self.no_qm_prime is not None:
            out['no_qm_prime'] = self.no_qm_prime
        if self.scan_prime is not None:
            out['scan_prime'] = self.scan_prime
        if self.certificate is not None:
            out['certificate'] = self.certificate.to_dict()
        return out


def _valuation_one_prime(curve, factor_cap, trial_bound=DEFAULT_TRIAL_BOUND):
    """Smallest odd prime with exact exponent 1 in disc(f), or None."""
    disc = curve.disc
    if abs(disc) > factor_cap:
        logger.info(f"Skipping valuation test: |disc| exceeds {factor_cap}")
        return None
    fac = factor(disc, trial_bound=trial_bound)
    if not fac.complete:
        logger.warning(f"Skipping valuation test for {curve}: disc only partially factored")
        return None
    for p, e in fac.pairs:
        if p != 2 and e == 1:
            return p
    return None


def trivial_endomorphism_certificate(curve, factor_cap=DEFAULT_FACTOR_CAP, galois_prime_budget=200,
                                     bound=DEFAULT_SCAN_BOUND, max_prime=2 ** 16,
                                     trial_bound=DEFAULT_TRIAL_BOUND):
    """
    Try the two shortcuts proving End = Z over Q-bar: an odd prime with
    exponent 1 in disc(f), then Gal(f) in {A_n, S_n}.

    The valuation shortcut is only accepted together with an irreducible
    f_p{12} for some good p <= bound. Split Jacobians can have an odd
    prime of exponent 1 in disc(f) (the degree-7 cover of 54.a2 does at 7),
    and every f_p{12} of a split Jacobian is reducible.

    Args:
        curve (CurveModel): Genus-2 model
        factor_cap (int): Skip the valuation test above this |disc|
        galois_prime_budget (int): Largest prime for cycle types
        bound (int): Largest prime for the agreement scan
        trial_bound (int): Trial division limit when factoring disc(f)

    Returns:
        IrreducibilityVerdict: END_IS_Z with its witness, or None
    """
    p = _valuation_one_prime(curve, factor_cap, trial_bound)
    if p is not None:
        scan_at, _ = _frobenius_scan(curve, bound, GROUP_CONSTANTS.exponent_bound, max_prime)
        if scan_at is not None:
            logger.info(f"Proved End = Z for {curve}: v_{p}(disc) = 1, f_{scan_at}{{12}} irreducible")
            return IrreducibilityVerdict(
                IrreducibilityStatus.END_IS_Z, Witness.VALUATION_ONE, p, bound, scan_prime=scan_at,
            )
        logger.warning(f"Skipping valuation shortcut for {curve}: no irreducible f_p{{12}} up to {bound}")

    cert = galois_sn_certificate(curve.f, galois_prime_budget)
    if cert.verdict != GaloisVerdict.UNKNOWN:
        logger.info(f"Proved End = Z for {curve}: Galois group {cert.verdict.value}")
        return IrreducibilityVerdict(IrreducibilityStatus.END_IS_Z, Witness.GALOIS, certificate=cert)
    return None


def _frobenius_scan(curve, bound, exponent, max_prime):
    """Scan twisted Frobenius polynomials for an irreducible one and a non-square one."""
    no_qm_prime = None
    for fd in frobenius_stream(curve, bound, max_prime):
        poly = twist(fd.weil_poly, exponent)
        if is_irreducible(poly):
            return fd.p, no_qm_prime or fd.p
        if no_qm_prime is None and perfect_square_root(poly) is None:
            no_qm_prime = fd.p
    return None, no_qm_prime


def twist_scan(curve, bound, exponent=12, max_prime=2 ** 16):
    """Verdict from f_p{exponent} over good p <= bound alone."""
    irreducible_at, no_qm_at = _frobenius_scan(curve, bound, exponent, max_prime)
    if irreducible_at is not None:
        return IrreducibilityVerdict(
            IrreducibilityStatus.ABS_IRREDUCIBLE_NO_QM,
            Witness.IRREDUCIBLE_TWIST, irreducible_at, bound, no_qm_prime=no_qm_at,
        )
    if no_qm_at is not None:
        return IrreducibilityVerdict(
            IrreducibilityStatus.NO_QM, Witness.NON_SQUARE_TWIST, no_qm_at, bound, no_qm_prime=no_qm_at,
        )
    return IrreducibilityVerdict(IrreducibilityStatus.INCONCLUSIVE, bound_used=bound)


def geometric_irreducibility(curve, bound, factor_cap=DEFAULT_FACTOR_CAP,
                             galois_prime_budget=200, max_prime=2 ** 16,
                             trial_bound=DEFAULT_TRIAL_BOUND):
    """
    Prove that Jac(C) is absolutely irreducible and/or has no potential QM.

    Steps, in order: irreducible quintic; odd prime of exponent 1 in
    disc(f) backed by an irreducible f_p{12}; Galois group A_n or S_n;
    irreducible or non-square f_p{12} for good p <= bound.

    Args:
        curve (CurveModel): Genus-2 model
        bound (int): Largest prime for the Frobenius scan, at least 3
        factor_cap (int): Skip the valuation test above this |disc|
        galois_prime_budget (int): Largest prime for cycle types
        trial_bound (int): Trial division limit when factoring disc(f)

    Returns:
        IrreducibilityVerdict: Status with its witness
    """
    if curve.f.degree == 5 and is_irreducible(curve.f):
        logger.info(f"Proved absolute irreducibility for {curve}: irreducible quintic")
        return IrreducibilityVerdict(IrreducibilityStatus.ABS_IRREDUCIBLE, Witness.IRREDUCIBLE_QUINTIC)

    shortcut = trivial_endomorphism_certificate(
        curve, factor_cap, galois_prime_budget, bound, max_prime, trial_bound,
    )
    if shortcut is not None:
        return shortcut

    verdict = twist_scan(curve, bound, GROUP_CONSTANTS.exponent_bound, max_prime)
    if verdict.status == IrreducibilityStatus.INCONCLUSIVE:
        logger.info(f"Checking {curve}: irreducibility inconclusive up to {bound}")
    else:
        logger.info(f"Proved {verdict.status.value} for {curve} at p = {verdict.witness_prime}")
    return verdict


def k_irreducibility(curve, bound, max_prime=2 ** 16):
    """
    Simplicity over Q (irreducible f_p) and no QM over Q (non-square f_p).

    The statuses say nothing about Q-bar: y^2 = x^5 - x is simple over Q
    with f_3 irreducible while its Jacobian splits geometrically.
    """
    verdict = twist_scan(curve, bound, 1, max_prime)
    if verdict.status in _OVER_K:
        return replace(verdict, status=_OVER_K[verdict.status])
    return verdict


def verify_witness(curve, verdict):
    """Re-run a verdict's witness on its own; True iff it reproduces the verdict."""
    if verdict.witness == Witness.IRREDUCIBLE_QUINTIC:
        return curve.f.degree == 5 and is_irreducible(curve.f)
    if verdict.witness == Witness.VALUATION_ONE:
        p, q = verdict.witness_prime, verdict.scan_prime
        if q is None or not is_irreducible(twist(frobenius_data(curve, q).weil_poly, GROUP_CONSTANTS.exponent_bound)):
            return False
        return p % 2 == 1 and curve.disc % p == 0 and curve.disc % (p * p) != 0
    if verdict.witness == Witness.GALOIS:
        return galois_sn_certificate(curve.f).verdict == verdict.certificate.verdict
    if verdict.witness in (Witness.IRREDUCIBLE_TWIST, Witness.NON_SQUARE_TWIST):
        exponent = 1 if verdict.status in _OVER_K.values() else GROUP_CONSTANTS.exponent_bound
        poly = twist(frobenius_data(curve, verdict.witness_prime).weil_poly, exponent)
        if verdict.witness == Witness.IRREDUCIBLE_TWIST:
            return is_irreducible(poly)
        return perfect_square_root(poly) is None
    return verdict.status == IrreducibilityStatus.INCONCLUSIVE


# -- discriminant bound -------------------------------------------------------

class DiscBoundMode(Enum):
    GEOMETRIC = 'Geometric'
    OVER_K = 'OverK'


class DiscBoundVerdict(Enum):
    END_IS_Z = 'EndIsZ'
    BOUND_ONLY = 'BoundOnly'


@dataclass(frozen=True)
class DiscBoundResult:
    d_of_B: int
    cm_excluded: bool
    verdict: DiscBoundVerdict
    rm_candidates: tuple = ()
    places_used: tuple = ()
    early_exit: bool = False
    discriminants: tuple = field(default=(), compare=False)

    def to_dict(self):
        return {
            'd_of_B': self.d_of_B,
            'cm_excluded': self.cm_excluded,
            'verdict': self.verdict.value,
            'rm_candidates': [q.fundamental_discriminant for q in self.rm_candidates],
            'places_used': list(self.places_used),
            'early_exit': self.early_exit,
        }


def rm_candidates_from(d):
    """Real quadratic fields with fundamental discriminant D and D^2 | d."""
    if d <= 0:
        return ()
    fac = factor(d)
    if not fac.complete:
        raise FactorizationIncomplete(f"Could not factor d(B) = {d}", fac)
    root = 1
    for p, e in fac.pairs:
        root *= p ** (e // 2)
    return tuple(QuadraticField(D) for D in divisors(root) if D > 1 and is_fundamental_discriminant(D))


def _admits(fd, mode):
    if mode == DiscBoundMode.GEOMETRIC:
        if not fd.in_omega_prime:
            return False
        assert fd.b % fd.p != 0 and is_irreducible(twist(fd.weil_poly, GROUP_CONSTANTS.field_case_degree_bound))
        return True
    return is_irreducible(fd.weil_poly)


def disc_bound(frob_stream, place_filter=None, mode=DiscBoundMode.GEOMETRIC, early_exit=True):
    """
    Running gcd of the discriminants of the fields Q(pi_v) over admissible places.

    Args:
        frob_stream: FrobeniusData in ascending prime order
        place_filter: Optional predicate restricting the places further
        mode (DiscBoundMode): GEOMETRIC admits places of Omega', OVER_K
            places with irreducible f_v
        early_exit (bool): Stop once d(B) <= 24

    Returns:
        DiscBoundResult: d(B) (0 when no place was admitted) with its verdict
    """
    d = 0
    seen = []
    places = []
    exited = False
    for fd in frob_stream:
        if place_filter is not None and not place_filter(fd):
            continue
        if not _admits(fd, mode):
            continue
        delta = field_discriminant(fd.weil_poly)
        places.append(fd.p)
        if delta not in seen:
            seen.append(delta)
        d = gcd(d, delta)
        if early_exit and d <= EARLY_EXIT_THRESHOLD:
            exited = True
            break

    if d == 0:
        logger.warning(f"No admissible place found for the {mode.value} discriminant bound")
        return DiscBoundResult(0, False, DiscBoundVerdict.BOUND_ONLY)

    cm_excluded = len(seen) >= 2
    if d <= EARLY_EXIT_THRESHOLD:
        verdict = DiscBoundVerdict.END_IS_Z
        candidates = ()
    else:
        verdict = DiscBoundVerdict.BOUND_ONLY
        candidates = rm_candidates_from(d) if cm_excluded else ()
    return DiscBoundResult(d, cm_excluded, verdict, candidates, tuple(places), exited, tuple(seen))


def restricted_gcd(curve, d, bound, max_prime=2 ** 16):
    """gcd of field discriminants over primes split in Q(sqrt d) with irreducible f_p, no early exit."""
    return disc_bound(
        frobenius_stream(curve, bound, max_prime),
        place_filter=lambda fd: fd.p % 2 == 1 and d % fd.p != 0 and splits_in(d, fd.p),
        mode=DiscBoundMode.OVER_K,
        early_exit=False,
    ).d_of_B


# -- real multiplication ------------------------------------------------------

def rm_split_form(fd, m):
    """
    Write f_p{2} as (x^2 - a x + p^2)(x^2 - a' x + p^2) with a = (W + Z sqrt m)/2
    conjugate to a'. W, Z even unless m = 1 mod 4, where they share parity.

    Returns:
        tuple: (W, Z) with Z >= 0, or None
    """
    if m <= 1:
        return None
    g = twist(fd.weil_poly, 2)
    c = g.coeffs
    q = fd.p * fd.p
    w2 = -c[3]
    num = 8 * q + w2 * w2 - 4 * c[2]
    if num < 0 or num % m:
        return None
    z_sq = num // m
    if not gmpy2.is_square(z_sq):
        return None
    z2 = int(gmpy2.isqrt(z_sq))
    if m % 4 == 1:
        if (w2 - z2) % 2:
            return None
    elif w2 % 2 or z2 % 2:
        return None
    middle = 2 * q + (w2 * w2 - m * z2 * z2) // 4
    if c != (q * q, -w2 * q, middle, -w2, 1):
        return None
    return w2, z2


def rm_split_test(fd, m):
    """True iff f_p{2} splits over Q(sqrt m) in the shape real multiplication forces."""
    return rm_split_form(fd, m) is not None


def weil_shape_odd_vanishing(fd):
    """True iff f_p = x^4 + 2a x^2 + p^2 for some integer a."""
    return fd.a == 0 and fd.b % 2 == 0


@dataclass(frozen=True)
class FieldOfDefinitionResult:
    field: QuadraticField
    eliminated: tuple
    evidence: dict


def _odd_semistability_failures(curve, trial_bound=DEFAULT_TRIAL_BOUND):
    fac = factor(curve.disc, trial_bound=trial_bound)
    if not fac.complete:
        raise FactorizationIncomplete(f"Could not factor disc of {curve}", fac)
    return [p for p, e in fac.pairs if p != 2 and e >= 2]


def rm_field_of_definition(curve, rm_disc, bound, max_prime=2 ** 16, trial_bound=DEFAULT_TRIAL_BOUND):
    """
    Find the quadratic field over which the real multiplication is defined.

    Candidates are the quadratic fields unramified outside 2 and the odd
    primes where disc(f) has valuation at least 2. A candidate is
    eliminated when the discriminant bound over its split primes proves
    End = Z over it.

    Args:
        curve (CurveModel): Curve with geometric RM and End over Q equal to Z
        rm_disc (int): Discriminant of the RM order, recorded in the evidence
        bound (int): Prime bound for each restricted run
        trial_bound (int): Trial division limit when factoring disc(f)

    Returns:
        FieldOfDefinitionResult: The unique survivor and the eliminated fields

    Raises:
        InconclusiveError: Zero or several survivors
    """
    support = {2, *_odd_semistability_failures(curve, trial_bound)}
    candidates = quadratic_fields_unramified_outside(support)
    table = list(frobenius_stream(curve, bound, max_prime))

    eliminated, survivors, evidence = [], [], {'rm_disc': rm_disc, 'support': sorted(support), 'bounds': {}}
    for qf in candidates:
        d = qf.fundamental_discriminant
        logger.info(f"Checking candidate field {qf} for {curve}")
        result = disc_bound(
            table,
            place_filter=lambda fd, d=d: d % fd.p != 0 and splits_in(d, fd.p),
            mode=DiscBoundMode.OVER_K,
        )
        evidence['bounds'][d] = result.d_of_B
        if result.verdict == DiscBoundVerdict.END_IS_Z:
            eliminated.append(qf)
        else:
            survivors.append(qf)

    if len(survivors) != 1:
        raise InconclusiveError(
            f"{len(survivors)} candidate fields survive at B = {bound}: {[str(s) for s in survivors]}",
            survivors,
        )
    logger.info(f"Proved field of definition {survivors[0]} for {curve}")
    return FieldOfDefinitionResult(survivors[0], tuple(eliminated), evidence)
