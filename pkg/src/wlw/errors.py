"""Exception types shared across the package."""


class WlwError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameter(WlwError, ValueError):
    """A constructor argument or precondition is invalid."""


class NonPositiveRadius(InvalidParameter):
    """The profile radius x must be strictly positive."""


class NonPositiveScale(InvalidParameter):
    """A homothety factor must be strictly positive."""


class NotPureLinear(WlwError):
    """Operation requires b = 0 (pure linear curvature relation)."""


class DegenerateLine(WlwError):
    """sin(theta) = 0: the first integral degenerates (m = 0, a line)."""


class NoFullTurn(WlwError):
    """Trajectory's tangent angle never spans a full turn."""


class VerificationFailed(WlwError):
    """A claimed geometric property failed its numerical verification."""


class NotVertical(WlwError):
    """Requested location is not a vertical-tangent point."""


class NoBracket(WlwError):
    """Shooting bracket endpoints classify identically."""


class DegenerateEigenvalue(WlwError):
    """A linearization eigenvalue vanishes; type is not determined."""


class WrongSignRegime(WlwError):
    """Operation applies only to the opposite sign of the parameter a."""


class QuadratureFailure(WlwError):
    """Adaptive quadrature failed to meet its tolerance."""


class NearSingular(WlwError):
    """Energy exponent base |theta' - mu| too small everywhere on the span."""


class NotApplicable(WlwError):
    """Profile is outside the domain of the requested variational check."""


class Unsupported(WlwError):
    """The umbilical case a = 1, b = 0 has no associated energy."""


class NoPeriod(WlwError):
    """No period is available for the closure integral."""


class DivergentIntegrand(WlwError):
    """Energy integrand is undefined or non-finite on the span."""


class SignChange(WlwError):
    """theta' - mu changes sign; the critical-curve form does not apply."""


class DegenerateProfile(WlwError):
    """Too few usable profile samples to build a mesh."""


class Inconclusive(WlwError):
    """Integration budget exhausted before any classification criterion fired."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
