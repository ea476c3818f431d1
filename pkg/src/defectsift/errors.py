"""Exception hierarchy.

``DataError`` subclasses signal malformed or insufficient input (CLI exit
code 3); ``NumericError`` subclasses signal a numerical failure (exit code 4).
"""


class DefectSiftError(Exception):
    exit_code = 3


class DataError(DefectSiftError, ValueError):
    exit_code = 3


class NumericError(DefectSiftError, ArithmeticError):
    exit_code = 4


class MalformedHeader(DataError):
    pass


class UnsupportedMaxval(DataError):
    pass


class TruncatedPayload(DataError):
    pass


class InvalidImage(DataError):
    pass


class EvenKernel(DataError):
    pass


class UpsampleRequested(DataError):
    pass


class EmptyInput(DataError):
    pass


class AllZeroCounts(DataError):
    pass


class TooFewSamples(DataError):
    pass


class BinMismatch(DataError):
    pass


class EmptyClass(DataError):
    pass


class EmptyGrid(DataError):
    pass


class SingleClassTraining(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


class IndexOutOfRegistry(DataError):
    pass


class MissingFile(DataError):
    pass


class NonPositiveSamples(NumericError):
    pass


class NonPositiveDefinite(NumericError):
    pass


class UnwritableDir(DataError):
    pass


class UsageError(DefectSiftError):
    exit_code = 2
