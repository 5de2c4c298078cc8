"""
Exception hierarchy shared by the library, the pipelines and the CLI.

Library code raises these; the CLI maps any HyperlabError to exit code 1.
"""


class HyperlabError(Exception):
    """Base class for every error raised by the utils package."""


# ---------------------------------------------------------
# Geometry
# ---------------------------------------------------------
class InvalidGroupElement(HyperlabError):
    pass


# ---------------------------------------------------------
# Transforms / fields
# ---------------------------------------------------------
class GridMismatch(HyperlabError):
    pass


class NonDecayedBoundary(HyperlabError):
    pass


class NonFiniteMultiplier(HyperlabError):
    pass


class ScaleTooSmall(HyperlabError):
    pass


# ---------------------------------------------------------
# Time stepping
# ---------------------------------------------------------
class BoundaryMassExceeded(HyperlabError):
    def __init__(self, t: float, value: float, tolerance: float):
        self.t = t
        self.value = value
        self.tolerance = tolerance
        super().__init__(
            f"relative boundary mass {value:.3e} exceeds {tolerance:.1e} at t={t:.6g}"
        )


class NonFiniteState(HyperlabError):
    pass


class TimeOutOfRange(HyperlabError):
    pass


# ---------------------------------------------------------
# Profiles
# ---------------------------------------------------------
class LengthMismatch(HyperlabError):
    pass


class NoConcentration(HyperlabError):
    pass


# ---------------------------------------------------------
# CLI / configuration
# ---------------------------------------------------------
class ConfigParseError(HyperlabError):
    pass


class ScenarioUnknown(HyperlabError):
    pass
