"""Exception types shared across the package."""


class CoabenchError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(CoabenchError):
    """Invalid experiment configuration (bad field, missing value)."""


class DataError(CoabenchError):
    """Input data is missing or malformed."""


# image I/O
class BadMagic(DataError):
    pass


class UnsupportedMaxval(DataError):
    pass


class Truncated(DataError):
    pass


class EmptyDataset(DataError):
    pass


# keyed PRNG
class InvalidBound(CoabenchError):
    pass


# pixel-wise cipher
class InvalidPermIndex(CoabenchError):
    pass


# block-wise cipher
class BadBlockShape(CoabenchError):
    pass


class BadKeyLength(CoabenchError):
    pass


class NotAPermutation(CoabenchError):
    pass


class NibbleOutOfRange(CoabenchError):
    pass


class DimensionNotMultipleOfBlock(DataError):
    pass


# attacks
class InvalidParams(ConfigError):
    pass


class InsufficientPairs(DataError):
    pass


class SingularSystem(CoabenchError):
    pass


class MissingPairs(DataError):
    pass


class DisjointnessViolation(DataError):
    pass


class MissingN(ConfigError):
    pass


# numerics
class ShapeMismatch(CoabenchError):
    pass


class DimensionMismatch(DataError):
    pass


class TooSmall(DataError):
    pass


class EmptyList(DataError):
    pass


class NumericalDivergence(CoabenchError):
    """A loss or gradient became NaN/Inf during training."""
