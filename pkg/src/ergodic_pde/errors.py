"""Exception hierarchy shared by every module of the package."""


class ErgodicPDEError(Exception):
    """Base class for all errors raised by :mod:`ergodic_pde`."""


# -- model -----------------------------------------------------------------

class ParameterError(ErgodicPDEError, ValueError):
    """An equation parameter violates its admissibility constraint.

    ``field`` names the offending parameter so front ends can point at it.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class AlphaOutOfRange(ParameterError):
    pass


class BetaOutOfRange(ParameterError):
    pass


class BadEllipticity(ParameterError):
    pass


class NegativeLambda(ParameterError):
    pass


class TraceNeedsEqualConstants(ParameterError):
    pass


class ForcingError(ErgodicPDEError, ValueError):
    """A forcing term violates its growth or sign requirements."""


class DomainError(ErgodicPDEError, ValueError):
    pass


class SingularGradient(ErgodicPDEError, ArithmeticError):
    """|grad|**alpha with alpha < 0 evaluated at a vanishing gradient."""


# -- barriers --------------------------------------------------------------

class OutsideDomain(ErgodicPDEError, ValueError):
    pass


class UnsetPrefactor(ErgodicPDEError, ValueError):
    pass


class RegionEmpty(ErgodicPDEError, ValueError):
    pass


# -- grid ------------------------------------------------------------------

class GridTooCoarse(ErgodicPDEError, ValueError):
    pass


class SingularForcingAtNode(ErgodicPDEError, ValueError):
    pass


# -- solve -----------------------------------------------------------------

class SolverError(ErgodicPDEError, RuntimeError):
    """Base for solver failures; carries the partial report when available."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NotConverged(SolverError):
    pass


class NaNDetected(SolverError):
    pass


class LadderNotSettled(SolverError):
    pass


# -- ergodic / verify --------------------------------------------------------

class LadderUnstable(SolverError):
    pass


class WindowTooNarrow(ErgodicPDEError, ValueError):
    pass


class HypothesisUnmet(ErgodicPDEError, ValueError):
    pass


# -- cli ---------------------------------------------------------------------

class ConfigError(ErgodicPDEError, ValueError):
    """Invalid experiment configuration; ``where`` is ``section.key`` or a line."""

    def __init__(self, message, where=None):
        super().__init__(message if where is None else f"{where}: {message}")
        self.where = where
