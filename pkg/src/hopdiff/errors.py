"""Exception hierarchy; each class carries the CLI exit code it maps to."""


class HopDiffError(Exception):
    exit_code = 1


class ParameterError(HopDiffError, ValueError):
    exit_code = 2


class DataError(HopDiffError, ValueError):
    exit_code = 3


class ParseError(DataError):
    pass


class ShapeError(DataError):
    pass


class RangeError(DataError, IndexError):
    pass


class FormatError(DataError):
    pass


class InvariantError(HopDiffError, AssertionError):
    exit_code = 4
