"""Exception hierarchy shared by all modules."""


class ConsensusError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ConsensusError, ValueError):
    """Input does not describe a valid matrix-weighted graph or scenario."""


class AsymmetricWeight(ValidationError):
    pass


class NotPositiveSemidefinite(ValidationError):
    pass


class ZeroWeight(ValidationError):
    """An all-zero weight was given for an edge; absent edges must be omitted."""


class DuplicateEdge(ValidationError):
    pass


class SelfLoop(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class AmbientMismatch(ConsensusError, ValueError):
    """Two subspaces (or a subspace and a vector) live in different spaces."""


class EigensolverFailure(ConsensusError, ArithmeticError):
    pass


class NotConsensusGraph(ConsensusError):
    """The requested quantity is only defined when N(L) is the consensus space."""


class NotAPath(ConsensusError, ValueError):
    pass


class StepTooLarge(ConsensusError, ValueError):
    pass


class NotConverged(ConsensusError):
    pass


class NotUnitVector(ValidationError):
    pass


class InconsistentBearings(ValidationError):
    pass


class ParseError(ValidationError):
    """Scenario text could not be parsed; ``location`` points at the offending field or line."""

    def __init__(self, message, location=None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class AgreementFailure(ConsensusError):
    """Independent predictions (spectral, graph-theoretic, dynamical) disagree."""


class PathBudgetWarning(UserWarning):
    """Path enumeration hit ``max_paths``; the membership answer is conservative."""
