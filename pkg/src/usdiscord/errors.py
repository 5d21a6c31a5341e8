"""Exception hierarchy. Every error is also a ValueError so callers can catch broadly."""


class USDError(ValueError):
    """Base class for validation failures raised by this package."""


class DimensionMismatch(USDError):
    pass


class NotHermitian(USDError):
    pass


class NotPSD(USDError):
    pass


class NotDensityMatrix(USDError):
    pass


class BadPriors(USDError):
    pass


class DegenerateEnsemble(USDError):
    """Some failure amplitude has modulus 0 or 1 (identical or orthogonal inputs)."""


class SingularGram(USDError):
    pass


class UnsupportedDimension(USDError):
    pass


class ConditionNotMet(USDError):
    pass


class ReconstructionFailure(USDError):
    pass


class Infeasible(USDError):
    pass
