"""Exception hierarchy shared by all modules."""


class BogLabError(Exception):
    """Base class; ``module`` names the subsystem that raised."""

    module = "boglab"


class NonPositiveRadius(BogLabError, ValueError):
    module = "geometry"


class RatioOutOfRange(BogLabError, ValueError):
    module = "geometry"


class ResolutionTooSmall(BogLabError, ValueError):
    module = "geometry"


class SigmaOutOfRange(BogLabError, ValueError):
    module = "geometry"


class QOutOfRange(BogLabError, ValueError):
    module = "fields"


class FrameMismatch(BogLabError, ValueError):
    module = "fields"


class DomainMismatch(BogLabError, ValueError):
    module = "transforms"


class BoundaryViolation(BogLabError, ValueError):
    module = "transforms"


class NonZeroMean(BogLabError, ValueError):
    module = "divsolve"


class SingularSystem(BogLabError, RuntimeError):
    module = "divsolve"


class NoConvergence(BogLabError, RuntimeError):
    module = "divsolve"


class DeltaOutOfRange(BogLabError, ValueError):
    module = "exponents"


class AlphaOutOfRange(BogLabError, ValueError):
    module = "exponents"


class SupportNotCovered(BogLabError, ValueError):
    module = "energy"


class ConfigInvalid(BogLabError, ValueError):
    module = "cli"
