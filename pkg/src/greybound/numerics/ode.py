"""Dormand-Prince 5(4) integration of complex second-order linear ODEs.

The workhorse is :func:`integrate_pair`, which advances a two-component
complex first-order system ``(y, z)'= F(x, y, z)``.  It is written with
plain Python scalars because the state is tiny and numpy call overhead
would dominate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from ..errors import IntegrationFailure

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth-order minus embedded fourth-order weights
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)

METHOD_NAME = "dormand-prince-5(4)"


@dataclass(frozen=True)
class OdeSpec:
    """Tolerances and limits for :func:`integrate_pair`.

    ``fixed_step=True`` disables error control and marches with equal
    steps no longer than ``initial_step``; meant for debugging and
    convergence studies.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 1_000_000
    initial_step: Optional[float] = None
    fixed_step: bool = False

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("ODE tolerances must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.fixed_step and not self.initial_step:
            raise ValueError("fixed-step mode needs initial_step")


@dataclass(frozen=True)
class PairSolution:
    x: float
    y: complex
    z: complex
    steps: int
    rejected: int
    evaluations: int
    method: str = METHOD_NAME


def _initial_step(rhs, x, y, z, f_y, f_z, direction, spec, span):
    # Hairer, Norsett & Wanner, Solving ODEs I, sec. II.4
    sy = spec.abs_tol + spec.rel_tol * abs(y)
    sz = spec.abs_tol + spec.rel_tol * abs(z)
    d0 = math.sqrt(0.5 * ((abs(y) / sy) ** 2 + (abs(z) / sz) ** 2))
    d1 = math.sqrt(0.5 * ((abs(f_y) / sy) ** 2 + (abs(f_z) / sz) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    g_y, g_z = rhs(x + direction * h0, y + direction * h0 * f_y, z + direction * h0 * f_z)
    d2 = math.sqrt(0.5 * ((abs(g_y - f_y) / sy) ** 2 + (abs(g_z - f_z) / sz) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def integrate_pair(
    rhs: Callable[[float, complex, complex], tuple[complex, complex]],
    x_start: float,
    x_end: float,
    y: complex,
    z: complex,
    spec: OdeSpec | None = None,
) -> PairSolution:
    """Advance ``(y, z)`` from ``x_start`` to ``x_end`` (either direction).

    Local error per step is held below ``abs_tol + rel_tol * |state|``
    component-wise in an RMS norm.

    Raises
    ------
    IntegrationFailure
        Step size underflow, non-finite state or ``max_steps`` exceeded.
    """
    spec = spec or OdeSpec()
    y, z = complex(y), complex(z)
    x = float(x_start)
    x_end = float(x_end)
    span = abs(x_end - x)
    if span == 0.0:
        return PairSolution(x, y, z, 0, 0, 0)
    direction = 1.0 if x_end > x else -1.0
    rtol, atol = spec.rel_tol, spec.abs_tol

    k1y, k1z = rhs(x, y, z)
    evals = 1
    if spec.fixed_step:
        # equal steps that land exactly on x_end
        h = span / math.ceil(span / abs(spec.initial_step) * (1.0 - 1e-12))
    elif spec.initial_step:
        h = min(abs(spec.initial_step), span)
    else:
        h = _initial_step(rhs, x, y, z, k1y, k1z, direction, spec, span)
        evals += 1

    steps = rejected = 0
    last = False
    while not last:
        if steps + rejected >= spec.max_steps:
            raise IntegrationFailure("max_steps exceeded", x, steps)
        remaining = abs(x_end - x)
        if h >= remaining or (spec.fixed_step and h >= remaining * (1.0 - 1e-9)):
            h = remaining
            last = True
        if h <= 1e-14 * max(abs(x), 1.0) and not last:
            raise IntegrationFailure("step size underflow", x, steps)
        hs = direction * h

        k2y, k2z = rhs(x + _C2 * hs, y + hs * _A21 * k1y, z + hs * _A21 * k1z)
        k3y, k3z = rhs(x + _C3 * hs,
                       y + hs * (_A31 * k1y + _A32 * k2y),
                       z + hs * (_A31 * k1z + _A32 * k2z))
        k4y, k4z = rhs(x + _C4 * hs,
                       y + hs * (_A41 * k1y + _A42 * k2y + _A43 * k3y),
                       z + hs * (_A41 * k1z + _A42 * k2z + _A43 * k3z))
        k5y, k5z = rhs(x + _C5 * hs,
                       y + hs * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y),
                       z + hs * (_A51 * k1z + _A52 * k2z + _A53 * k3z + _A54 * k4z))
        k6y, k6z = rhs(x + hs,
                       y + hs * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y),
                       z + hs * (_A61 * k1z + _A62 * k2z + _A63 * k3z + _A64 * k4z + _A65 * k5z))
        y_new = y + hs * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
        z_new = z + hs * (_B1 * k1z + _B3 * k3z + _B4 * k4z + _B5 * k5z + _B6 * k6z)
        x_new = x_end if last else x + hs
        k7y, k7z = rhs(x_new, y_new, z_new)
        evals += 6

        if spec.fixed_step:
            x, y, z = x_new, y_new, z_new
            k1y, k1z = k7y, k7z
            steps += 1
            continue

        ey = hs * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
        ez = hs * (_E1 * k1z + _E3 * k3z + _E4 * k4z + _E5 * k5z + _E6 * k6z + _E7 * k7z)
        sy = atol + rtol * max(abs(y), abs(y_new))
        sz = atol + rtol * max(abs(z), abs(z_new))
        err = math.sqrt(0.5 * ((abs(ey) / sy) ** 2 + (abs(ez) / sz) ** 2))
        if not math.isfinite(err):
            raise IntegrationFailure("non-finite state", x, steps)

        if err <= 1.0:
            x, y, z = x_new, y_new, z_new
            k1y, k1z = k7y, k7z  # first-same-as-last
            steps += 1
            factor = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
            h *= factor
        else:
            rejected += 1
            last = False
            h *= max(0.2, 0.9 * err ** -0.2)
    return PairSolution(x, y, z, steps, rejected, evals)


@dataclass(frozen=True)
class SecondOrderSolution:
    """Value and first derivative at the end of the domain."""

    x: float
    value: complex
    derivative: complex
    steps: int
    evaluations: int
    method: str = METHOD_NAME


def solve_second_order(
    q: Callable[[float], complex],
    domain: tuple[float, float],
    initial_value: complex,
    initial_derivative: complex,
    spec: OdeSpec | None = None,
) -> SecondOrderSolution:
    """Integrate ``psi'' + q(x) psi = 0`` across ``domain = (start, end)``.

    ``start > end`` integrates backwards.
    """
    start, end = domain
    if not (math.isfinite(start) and math.isfinite(end)):
        raise ValueError("domain must be finite")

    def rhs(x, psi, dpsi):
        return dpsi, -q(x) * psi

    sol = integrate_pair(rhs, start, end, initial_value, initial_derivative, spec)
    return SecondOrderSolution(sol.x, sol.y, sol.z, sol.steps, sol.evaluations)
