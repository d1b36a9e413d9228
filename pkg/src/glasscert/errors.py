"""Exception hierarchy.

Every error raised on purpose by the library derives from ``GlassError`` so
callers (the CLI in particular) can map them to exit codes.
"""


class GlassError(Exception):
    """Base class for all library errors."""


class ModelError(GlassError, ValueError):
    """The model description is malformed or violates a structural invariant."""


class AutoregulationError(ModelError):
    def __init__(self, variable: str):
        super().__init__(f"autoregulation detected: production of '{variable}' depends on '{variable}'")
        self.variable = variable


class OnThresholdError(GlassError, ValueError):
    def __init__(self, variable: int, value: float):
        super().__init__(f"on threshold: x[{variable}] = {value!r} sits on a threshold")
        self.variable = variable
        self.value = value


class InteriorEquilibriumError(GlassError):
    """The domain's focal point lies inside it, so the flow never exits."""


class SingularDomainError(GlassError):
    """Two exit times tie: the trajectory reaches a codimension-2 switching domain."""


class WallNormalDegeneracyError(GlassError):
    """The focal coordinate coincides with the state in the exit direction."""


class BlackWallError(GlassError):
    """The trajectory reached a black wall (sliding dynamics are not modelled)."""


class OrbitLeftCycleError(GlassError):
    """A point iterated along a cycle left the cycle's walls."""


class AssumptionViolation(GlassError):
    """A structural hypothesis of the certification theorem fails for a cycle."""


class ConvergenceError(GlassError):
    """An iterative procedure ran out of iterations."""


class InsufficientCrossingsError(GlassError):
    """A trajectory crossed the requested wall fewer than three times."""
