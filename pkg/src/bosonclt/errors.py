"""Exception types raised across the package."""


class BosonCLTError(Exception):
    """Base class; ``stage`` tags the pipeline stage when raised from an orchestrated run."""

    stage = None


class InputShapeError(BosonCLTError, ValueError):
    pass


class NumericError(BosonCLTError, ArithmeticError):
    """A computed quantity violates a structural property (realness, trace, positivity)."""


class NumericOverflowError(NumericError, FloatingPointError):
    pass


class AssemblyError(BosonCLTError):
    """An assembled operator violates a structural invariant (Hermiticity, symmetry)."""


class PropagationDivergedError(BosonCLTError):
    pass


class CapacityError(BosonCLTError, MemoryError):
    pass


class ToleranceError(BosonCLTError):
    """An iterative method failed to meet its tolerance; ``diagnostics`` holds details."""

    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


class TruncationRiskError(BosonCLTError):
    pass


class DomainError(BosonCLTError, ValueError):
    pass


class IntegrityError(BosonCLTError):
    pass


class ConfigError(BosonCLTError, ValueError):
    pass
