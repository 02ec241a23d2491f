"""Generic numerical kernels: adaptive quadrature and a complex ODE integrator."""

from .ode import OdeSpec, PairSolution, SecondOrderSolution, integrate_pair, solve_second_order
from .quadrature import QuadratureResult, QuadratureSpec, TailStrategy, integrate

__all__ = [
    "OdeSpec",
    "PairSolution",
    "QuadratureResult",
    "QuadratureSpec",
    "SecondOrderSolution",
    "TailStrategy",
    "integrate",
    "integrate_pair",
    "solve_second_order",
]
