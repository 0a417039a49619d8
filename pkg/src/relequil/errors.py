"""Exception hierarchy shared by all modules."""


class RelequilError(Exception):
    """Base class. ``stage`` names the pipeline step that failed, when known."""

    stage: str | None = None


class InvalidState(RelequilError, ValueError):
    pass


class ZeroSeparation(RelequilError):
    pass


class NotARotation(RelequilError, ValueError):
    pass


class NonPositiveInput(RelequilError, ValueError):
    pass


class ChargeCoincidence(RelequilError):
    pass


class StepSizeUnderflow(RelequilError):
    pass


class NonPositiveRadius(RelequilError, ValueError):
    pass


class NoCircularOrbit(RelequilError):
    pass


class StationarityResidual(RelequilError):
    pass


class DegenerateOrbit(RelequilError):
    pass


class UnexpectedKernelDimension(RelequilError):
    pass


class BlockStructureViolation(RelequilError):
    pass


class ConfigError(RelequilError, ValueError):
    pass
