"""Exception hierarchy.

Every error raised on purpose by this package derives from
:class:`SpectralBoundsError`, so callers (and the CLI) can separate
precondition failures from programming errors.
"""


class SpectralBoundsError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(SpectralBoundsError, ValueError):
    pass


class NotSymmetric(SpectralBoundsError, ValueError):
    pass


class NotPositiveDefinite(SpectralBoundsError):
    """A matrix that must admit a Cholesky factorization does not.

    ``which`` names the offending matrix (``"M"``, ``"K"``, ``"W"``, ...).
    """

    def __init__(self, which, detail=""):
        self.which = which
        msg = f"{which} is not positive definite"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class RankDeficient(SpectralBoundsError):
    pass


class SingularK(SpectralBoundsError):
    pass


class IndefiniteRightSide(SpectralBoundsError):
    pass


class BadSplit(SpectralBoundsError, ValueError):
    pass


class ShiftAtEigenvalue(SpectralBoundsError):
    """The shift is (numerically) an eigenvalue with eigenvector in the subspace."""


class ShiftAtRitzValue(SpectralBoundsError):
    pass


class WrongSide(SpectralBoundsError):
    pass


class BadKappa(SpectralBoundsError, ValueError):
    pass


class BadOmega(SpectralBoundsError, ValueError):
    pass


class BadShift(SpectralBoundsError, ValueError):
    pass


class ZeroStartVector(SpectralBoundsError, ValueError):
    pass


class SingularShiftedMatrix(SpectralBoundsError):
    pass
