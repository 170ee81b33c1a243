"""Exception hierarchy for plrmc"""

from typing import Optional


class PlrmcError(Exception):
    """Base class for every error raised by the library"""


class F2DimensionError(PlrmcError):
    """Matrix or vector shapes do not agree, or exceed the column cap"""


class NotInvertibleError(PlrmcError):
    """A square GF(2) matrix expected to be invertible is singular"""


class LatticeMismatchError(PlrmcError):
    """Operands live on different lattices"""


class PauliSyntaxError(PlrmcError):
    """Pauli text could not be parsed"""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownSiteError(PlrmcError):
    """A coordinate does not name a site of the lattice"""


class NonAbelianError(PlrmcError):
    """Generators of a stabilizer group fail to commute"""

    def __init__(self, message: str, witness: Optional[tuple] = None):
        super().__init__(message)
        self.witness = witness


class PreconditionError(PlrmcError):
    """An operation was called outside its documented domain"""


class NotReversibleError(PreconditionError):
    """A transition expected to be reversible is not"""


class MarginError(PlrmcError):
    """Index cuts are too close to each other or to the window edges"""


class PeriodMapError(PlrmcError):
    """The period automorphism could not be assembled on the interface"""


class WindowTooSmallError(PlrmcError):
    """The requested window cannot host the model with its margins"""


class GlueError(PlrmcError):
    """A glue specification is inconsistent"""


class DecompositionError(PlrmcError):
    """The 1D structure decomposition failed its own consistency checks"""


class ConfigError(PlrmcError):
    """A model configuration is invalid"""

    def __init__(self, message: str, errors: Optional[list] = None):
        super().__init__(message)
        self.errors = errors or []
