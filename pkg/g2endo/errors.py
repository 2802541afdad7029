"""Exception hierarchy for g2endo"""


class G2EndoError(Exception):
    """Base class for every error raised by the library."""


class PolynomialError(G2EndoError):
    """Zero, constant, non-monic or out-of-range polynomial input."""


class BadReductionError(G2EndoError):
    """Prime is even, divides 2·lc·disc, or produced inconsistent counts."""


class SingularCurveError(G2EndoError):
    """The model y^2 = f(x) has disc(f) = 0 or the wrong degree."""


class ReducibleInputError(G2EndoError):
    """An operation that needs an irreducible polynomial got a reducible one."""


class FactorizationIncomplete(G2EndoError):
    def __init__(self, message, factorization=None):
        super().__init__(message)
        self.factorization = factorization


class DataFileError(G2EndoError):
    """Malformed Humbert/CM/cover file, or a convention mismatch."""


class NumericPathwayError(G2EndoError):
    """Satake pathway could not run (missing transform, root finding failed)."""


class CertificationSearchError(G2EndoError):
    def __init__(self, message, form=None):
        super().__init__(message)
        self.form = form


class InconclusiveError(G2EndoError):
    def __init__(self, message, survivors=()):
        super().__init__(message)
        self.survivors = list(survivors)


class CoverError(G2EndoError):
    """Field mismatch, unverified map or non-regular pullback."""


class QuadraticFormError(G2EndoError):
    """Form is not positive definite, or an argument is not a discriminant."""
