"""Exception hierarchy shared by every module of the package."""


class DiffreeError(Exception):
    """Base class for all package errors."""


class DuplicateSet(DiffreeError, ValueError):
    pass


class ElementOutOfRange(DiffreeError, ValueError):
    pass


class UniverseTooLarge(DiffreeError, ValueError):
    pass


class NotPrime(DiffreeError, ValueError):
    pass


class SplitDegenerate(DiffreeError, ValueError):
    pass


class BadBand(DiffreeError, ValueError):
    pass


class BadBlockStructure(DiffreeError, ValueError):
    pass


class FamilyOutsideBand(DiffreeError, ValueError):
    pass


class PreconditionViolated(DiffreeError, ValueError):
    pass


class ParseError(DiffreeError, ValueError):
    """Raised by the constraint DSL parser; ``position`` is the 0-based offset."""

    def __init__(self, message, position=0):
        super().__init__(f"{message} (at position {position})")
        self.position = position
