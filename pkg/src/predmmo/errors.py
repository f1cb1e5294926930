"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class PredMMOError(Exception):
    """Base class for domain errors (CLI exit status 1)."""


class InvalidParameters(PredMMOError, ValueError):
    pass


class NoInteriorEquilibrium(PredMMOError):
    """No positive equilibrium; boundary equilibria are attached."""

    def __init__(self, message, boundary=()):
        super().__init__(message)
        self.boundary = list(boundary)


# integrator
class IntegrationError(PredMMOError):
    """Integration aborted; the partial trajectory is attached when available."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class StepSizeUnderflow(IntegrationError):
    pass


class MaxStepsExceeded(IntegrationError):
    pass


class Diverged(IntegrationError):
    pass


# slowfast
class EmptyFold(PredMMOError):
    pass


class NoCrossing(PredMMOError):
    pass


class NoReturn(PredMMOError):
    pass


# normalform
class NoRootInBracket(PredMMOError):
    pass


class MultipleRoots(PredMMOError):
    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = list(candidates)


class FeasibilityViolated(PredMMOError):
    pass


class InfeasiblePoint(PredMMOError):
    pass


class OmegaComplex(PredMMOError):
    pass


class DegenerateHopf(PredMMOError):
    pass


class NotSaddleFocus(PredMMOError):
    pass


# analysis
class NoPeaks(PredMMOError):
    pass


class InsufficientReturns(PredMMOError):
    def __init__(self, message, crossings=()):
        super().__init__(message)
        self.crossings = list(crossings)


# cli
class UnknownRecipe(PredMMOError):
    def __init__(self, name, available):
        super().__init__(f"unknown recipe {name!r}; available: {', '.join(available)}")
        self.available = list(available)


class ConfigError(Exception):
    """Config parse/validation failure (CLI exit status 2)."""

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
