"""Exception hierarchy shared by all qjoint modules."""


class QjointError(Exception):
    """Base class for all library-specific errors."""


class DimensionMismatch(QjointError):
    """Operands have incompatible shapes; nothing is ever broadcast silently."""


class NotHermitian(QjointError):
    """A matrix required to be Hermitian exceeds the symmetry tolerance."""


class NotPsd(QjointError):
    """A matrix required to be positive semidefinite has a negative eigenvalue."""


class NotProjector(QjointError):
    """A matrix required to be an orthogonal projector is not idempotent/Hermitian."""


class NotProjective(QjointError):
    """An operation restricted to binary projective measurements got something else."""


class ConvergenceFailure(QjointError):
    """An iterative numerical routine failed to converge."""


class ZeroProbabilityBranch(QjointError):
    """Conditioning on an outcome whose probability is below the zero threshold."""


class UnknownOutcome(QjointError):
    """An outcome label that does not belong to the measurement."""


class CombinatorialLimitExceeded(QjointError):
    """An enumeration would exceed the configured size caps."""


class PrerequisiteFailed(QjointError):
    """A check was invoked with an explicitly failed prerequisite report."""


class DegeneratePairingFailure(QjointError):
    """Two-projector block pairing could not be completed consistently."""


class NoFeasiblePointFound(QjointError):
    """No search restart produced a verified instance above the acceptance bar."""


class ParseError(QjointError):
    """Malformed JSON input (wrong shape, missing field, bad number encoding)."""
