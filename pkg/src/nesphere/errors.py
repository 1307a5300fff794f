"""Exception hierarchy shared by the library and the CLI.

Each error carries the process exit code the CLI reports for it.
"""


class NesphereError(Exception):
    exit_code = 1


class UsageError(NesphereError):
    exit_code = 1


class ConfigError(NesphereError):
    """The settings file does not match the settings schema."""

    exit_code = 1


class DataError(NesphereError, ValueError):
    """Input files or values that cannot be used as given."""

    exit_code = 2


class EmbeddingFormatError(DataError):
    pass


class DictionaryError(DataError):
    pass


class DimensionMismatchError(DataError):
    pass


class SeedPairError(DataError):
    pass


class NumericError(NesphereError, ArithmeticError):
    """A numerical routine failed to produce a usable answer."""

    exit_code = 3


class SingularSystemError(NumericError):
    pass


class ConvergenceError(NumericError):
    pass


class FitError(NumericError):
    pass
