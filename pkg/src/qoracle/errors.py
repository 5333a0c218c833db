"""Exception types shared across the package.

Two families exist because the command-line front end maps them to
different exit codes: bad user input (``ValueError`` subclasses, exit 2)
versus a violated mathematical contract (:class:`ContractViolation`, exit 1).
"""


class QOracleError(Exception):
    """Base class for every error raised by qoracle."""


class ContractViolation(QOracleError):
    """A precondition or postcondition of an operation does not hold."""


class PreconditionError(ContractViolation):
    """Input is well formed but outside the domain the construction supports."""


class SizeCapError(QOracleError, ValueError):
    """A dense object would exceed the 1024-dimension cap."""


class NotAPermutationError(QOracleError, ValueError):
    pass


class BandConditionError(QOracleError, ValueError):
    pass
