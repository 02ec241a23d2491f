"""Exception hierarchy shared by all greybound modules."""

from __future__ import annotations


class GreyboundError(Exception):
    """Base class for every error raised by this package."""


class DomainError(GreyboundError, ValueError):
    """An argument lies outside the region where a formula is defined."""


class NotSubExtremal(DomainError):
    """The operation needs two distinct horizons (G M^2 > Q^2)."""


class NearExtremal(DomainError):
    """Horizon splitting is too small for double-precision evaluation."""


class WrongFamily(DomainError):
    """A Schwarzschild-only routine was handed a charged black hole."""


class NegativePotential(DomainError):
    """The h = omega bound needs V >= 0 on the integration domain."""


class InvalidH(DomainError):
    """The auxiliary function h is non-positive or does not approach omega."""


class ToleranceNotMet(GreyboundError):
    """Adaptive quadrature exhausted its subdivision budget.

    The best available estimate is kept on the exception.
    """

    def __init__(self, message: str, value: float, error: float):
        super().__init__(message)
        self.value = value
        self.error = error


class IntegrandError(GreyboundError):
    """The integrand produced a NaN or infinity."""


class IntegrationFailure(GreyboundError):
    """The ODE integrator could not reach the end of its domain."""

    def __init__(self, message: str, x_reached: float, steps: int):
        super().__init__(f"{message} (reached x={x_reached!r} after {steps} steps)")
        self.x_reached = x_reached
        self.steps = steps


class NotConverged(GreyboundError):
    """A scattering solve finished but failed its unitarity check."""

    def __init__(self, message: str, result):
        super().__init__(message)
        self.result = result
