"""Exception hierarchy. Every library error is a ``DomainError`` so the CLI can map it to exit code 1."""


class DomainError(ValueError):
    """A precondition of an operation was violated."""


class InvalidRangeError(DomainError):
    pass


class RangeTooLargeError(DomainError):
    pass


class OutOfRangeError(DomainError):
    pass


class NoCandidateError(DomainError):
    pass


class InsufficientSurvivorsError(DomainError):
    pass


class NonAdmissibleError(DomainError):
    pass


class ParameterInconsistencyError(DomainError):
    pass


class CertificationFailure(DomainError):
    """A sliding walk found no exact-m interval; some upstream precondition is broken."""


class DuplicateStartError(DomainError):
    """Two slide results share the same interval start; windows were not disjoint."""
