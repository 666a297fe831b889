"""Exception hierarchy.

Two families matter for exit codes: DomainError covers bad inputs and
violated preconditions (CLI exit 1), InternalConsistencyError covers
conditions that indicate a bug in this package (CLI exit 2).
"""


class MaxdetError(Exception):
    pass


class DomainError(MaxdetError):
    """Invalid input or violated precondition."""


class DimensionError(DomainError):
    pass


class RankError(DomainError):
    pass


class DegenerateDirectionError(DomainError):
    pass


class InstanceTooLargeError(DomainError):
    pass


class GenerationError(DomainError):
    pass


class CertificateUnavailableError(DomainError):
    pass


class IterationLimitError(MaxdetError):
    """Design iteration cap hit before the leverage bound was met."""

    def __init__(self, message, best_leverage=None, iterations=None):
        super().__init__(message)
        self.best_leverage = best_leverage
        self.iterations = iterations


class InternalConsistencyError(MaxdetError):
    """A guaranteed-by-construction condition failed; indicates a bug."""


class TightnessViolationError(InternalConsistencyError):
    pass


class CorrespondenceViolationError(InternalConsistencyError):
    pass
