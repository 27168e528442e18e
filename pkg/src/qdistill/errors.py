"""Exception types raised across the package."""


class QDistillError(Exception):
    """Base class for all qdistill errors."""


class NotHermitianError(QDistillError):
    """Matrix deviates from Hermiticity beyond tolerance."""


class NotPSDError(QDistillError):
    """Matrix has a negative eigenvalue beyond tolerance."""


class BadTraceError(QDistillError):
    """Matrix trace deviates from 1 beyond tolerance."""


class ZeroProbabilityError(QDistillError):
    """Local filtering annihilates the state (success probability ~ 0)."""


class NotNormalizedError(QDistillError):
    """State amplitudes do not satisfy the normalization constraint."""


class OutOfRangeError(QDistillError):
    """Scalar parameter outside its allowed interval."""


class SingularOperatorError(QDistillError):
    """2x2 operator is numerically singular."""


class NotRotationError(QDistillError):
    """3x3 matrix is not a proper rotation."""


class MarginalsNotMixedError(QDistillError):
    """Single-qubit marginals are not maximally mixed."""


class EmptyCountsError(QDistillError):
    """Coincidence counts sum to zero where data is required."""


class SingularSystemError(QDistillError):
    """Linear reconstruction system is rank deficient."""


class AllZeroCountsError(QDistillError):
    """Measurement record contains no detected events at all."""


class ParameterMismatchError(QDistillError):
    """Report parameters do not match any reference configuration."""


class ConfigError(QDistillError):
    """Invalid experiment configuration."""
