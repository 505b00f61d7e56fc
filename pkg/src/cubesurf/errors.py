"""Exception types shared across the package."""


class CubeSurfError(Exception):
    """Base class for all package errors."""


class CellError(CubeSurfError, ValueError):
    pass


class WrongLength(CellError):
    pass


class BadSymbol(CellError):
    pass


class InvalidK(CellError):
    pass


class MixedDimension(CellError):
    pass


class MixedAmbient(CellError):
    pass


class NotAVertex(CubeSurfError, ValueError):
    pass


class NotAClosedSurface(CubeSurfError, ValueError):
    pass


class BudgetExceeded(CubeSurfError):
    pass


class ExhaustiveTooLarge(CubeSurfError, ValueError):
    pass


class BehindCamera(CubeSurfError, ValueError):
    pass


class DegenerateFace(CubeSurfError, ValueError):
    pass


class DegenerateEdge(CubeSurfError, ValueError):
    pass


class ZeroClearanceTotal(CubeSurfError, ValueError):
    pass


class InvalidInitialState(CubeSurfError, ValueError):
    pass
