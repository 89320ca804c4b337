"""Exception hierarchy. Every error raised on purpose derives from PBTMError."""


class PBTMError(Exception):
    """Base class for package errors."""

    #: short machine-readable status used by the CLI error record
    status = "error"


class InputError(PBTMError, ValueError):
    """Malformed or inconsistent input file, config, or argument."""

    status = "input error"


class UnknownItem(InputError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class ZeroWeight(PBTMError, ZeroDivisionError):
    pass


class UniverseTooLarge(PBTMError):
    pass


class UndefinedConfidence(PBTMError, ZeroDivisionError):
    pass


class EmptyTraining(PBTMError, ValueError):
    pass


class UnknownLabel(PBTMError, ValueError):
    pass


class ZeroEvidence(PBTMError, ArithmeticError):
    """Every class has zero joint likelihood for the instance."""


class SchemaMismatch(PBTMError, ValueError):
    pass


class InfeasibleConfig(PBTMError, ValueError):
    status = "input error"


class OracleMismatch(PBTMError):
    """The level-wise miner and the brute-force oracle disagree."""
