"""Exception hierarchy.

Everything numerical derives from :class:`NumericalError` so the CLI can map
it to a single exit code. Domain violations of a bound formula are *not*
exceptions; they are reported through ``BoundResult.valid``.
"""


class CeoBoundsError(Exception):
    pass


class ConfigError(CeoBoundsError, ValueError):
    pass


class NumericalError(CeoBoundsError, ArithmeticError):
    pass


class NonIntegrableDensity(NumericalError):
    pass


class ConvolutionUnderresolved(NumericalError):
    pass


class DerivativeUnstable(NumericalError):
    """Finite-difference and de Bruijn estimates of kappa disagree."""

    def __init__(self, message, finite_difference=None, de_bruijn=None):
        super().__init__(message)
        self.finite_difference = finite_difference
        self.de_bruijn = de_bruijn


class KappaUnavailable(NumericalError):
    pass


class PosteriorUnderflow(NumericalError):
    pass


class LogDomain(NumericalError):
    pass


class Infeasible(NumericalError):
    pass


class DistortionUnreachable(NumericalError):
    pass


class SamplerUnavailable(CeoBoundsError):
    pass


class EmptySubset(CeoBoundsError, ValueError):
    pass


class AlphaOutOfRange(CeoBoundsError, ValueError):
    def __init__(self, alpha, upper_limits):
        self.alpha = alpha
        self.upper_limits = tuple(upper_limits)
        lim = ", ".join(f"{u:.6g}" for u in self.upper_limits)
        super().__init__(
            f"alpha={alpha!r} outside (1, min{{{lim}}}]"
        )
