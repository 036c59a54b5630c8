# modlie/errors.py
"""
Exception hierarchy

Every error carries a human-readable ``detail`` and the CLI ``exit_code``
it maps to (2 = bad input or format, 1 = mathematical mismatch).
"""
from typing import Optional


class ModLieError(ValueError):
    """Base class for all modlie errors"""

    exit_code: int = 2

    def __init__(self, detail: str = "", exit_code: Optional[int] = None):
        super().__init__(detail or self.__class__.__name__)
        self.detail = detail or self.__class__.__name__
        if exit_code is not None:
            self.exit_code = exit_code


# scalars
class ParseError(ModLieError):
    pass


class MixedParity(ModLieError):
    pass


class OddParity(ModLieError):
    pass


class MissingAssignment(ModLieError):
    pass


class ZeroForInvertible(ModLieError):
    pass


class NotAUnit(ModLieError):
    pass


class RingMismatch(ModLieError):
    pass


# superalg
class DimensionMismatch(ModLieError):
    pass


class InhomogeneousElement(ModLieError):
    pass


class SymbolicNotSupported(ModLieError):
    pass


class NotDiagonal(ModLieError):
    pass


class NonCommutingTorus(ModLieError):
    pass


class EvenElement(ModLieError):
    pass


class CharacteristicTwo(ModLieError):
    pass


# pstruct
class NoSolution(ModLieError):
    exit_code = 1


class SymbolicUnderdetermined(ModLieError):
    pass


class NotWeightBasis(ModLieError):
    pass


# divpow
class DescriptorMismatch(ModLieError):
    pass


class WrongDescriptor(ModLieError):
    pass


class OddIndex(ModLieError):
    pass


# families
class EpsilonZero(ModLieError):
    pass


class ExpansionFailure(ModLieError):
    exit_code = 1


class NotACocycle(ModLieError):
    exit_code = 1


class JacobiFailure(ModLieError):
    exit_code = 1


class NamingConvention(ModLieError):
    pass


class FixtureInvalid(ModLieError):
    pass


# cli
class UnknownTarget(ModLieError):
    pass
