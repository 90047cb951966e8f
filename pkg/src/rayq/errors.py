"""Exception hierarchy for rayq."""


class RayqError(Exception):
    """Base class for all rayq errors."""


class ZeroVector(RayqError):
    """A vector required to be nonzero was (numerically) zero."""


class NonPositiveDenominator(RayqError):
    """<v, Bv> was not positive; B is not symmetric positive definite."""


class DegenerateNormal(RayqError):
    """The sphere normal Bv vanished; cannot project onto the tangent space."""


class DenseRequired(RayqError):
    """A dense-only diagnostic was called with a matrix-free operator pair."""


class DegenerateSample(RayqError):
    """Repeated random draws produced numerically null vectors."""


class DimensionTooSmall(RayqError):
    """The tangent sphere is empty; the ambient dimension must be >= 2."""


class ZeroB(RayqError):
    """Step size requested with b = 0; the caller must route to termination."""


class NonPositiveD(RayqError):
    """Step size requested with d <= 0; B cannot be positive definite."""


class NotSquare(RayqError):
    """A square matrix was expected."""


class NotHermitianPD(RayqError):
    """Probe check for a Hermitian positive definite matrix failed."""


class CholeskyFailure(RayqError):
    """Cholesky factorization failed; B is not positive definite."""


class EigensolverFailure(RayqError):
    """The dense symmetric eigensolver did not converge."""


class ZeroMaxValue(RayqError):
    """Relative quotient error undefined because R(A, B) = 0."""


class SchemaMismatch(RayqError):
    """An ingested trace file does not match the trace CSV schema."""


class UnknownFigure(RayqError):
    """Unknown figure identifier passed to the reproduction entry point."""
