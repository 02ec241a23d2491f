"""Rigorous greybody bounds from the 2x2 transfer-matrix inequality.

For a positive auxiliary function ``h`` that tends to ``omega`` at both ends,

    T >= sech^2( int theta dr* ),   R <= tanh^2( int theta dr* ),
    theta = sqrt(h'^2 + (omega^2 - V - h^2)^2) / (2 h).

With ``h = omega`` the argument reduces to ``(1 / 2 omega) int V dr*``, which
has closed forms for Schwarzschild and sub-extremal Reissner-Nordstrom holes.
The quadrature routines evaluate the same integrals numerically in the
radial variable, using ``dr* = dr / Delta``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np

from . import spacetime as st
from .errors import DomainError, InvalidH, NegativePotential, NotSubExtremal, WrongFamily
from .numerics import QuadratureSpec, integrate
from .spacetime import BlackHole, Mode

#: closest approach to r_plus allowed when sampling a general-h integrand
HORIZON_GUARD = 1e-10
#: relative mismatch allowed between h and omega at the domain ends
H_MATCH_TOL = 1e-6


class BoundMethod(str, enum.Enum):
    CLOSED_FORM_SCHWARZSCHILD = "closed-form-schwarzschild"
    CLOSED_FORM_RN = "closed-form-rn"
    QUADRATURE_H_OMEGA = "quadrature-h-omega"
    QUADRATURE_GENERAL_H = "quadrature-general-h"


def sech2_tanh2(x: float) -> tuple[float, float]:
    """``(sech^2 x, tanh^2 x)``, each to full relative precision.

    ``sech^2`` goes through ``exp(-2|x|)`` so it underflows gracefully
    instead of overflowing ``cosh``; ``tanh^2`` uses ``math.tanh`` so it
    stays accurate for tiny ``x``.
    """
    e = math.exp(-2.0 * abs(x))
    d = 1.0 + e
    return 4.0 * e / (d * d), math.tanh(x) ** 2


@dataclass(frozen=True)
class BoundResult:
    """Bound pair built from the dimensionless integral ``int theta dr*``.

    In double precision ``r_upper`` rounds to 1 once ``integral_value``
    exceeds about 18, and ``t_lower`` underflows to 0 beyond about 370.
    """

    integral_value: float
    t_lower: float
    r_upper: float
    method: BoundMethod
    metadata: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_integral(cls, value: float, method: BoundMethod, **metadata) -> "BoundResult":
        if not value >= 0:
            raise ValueError(f"bound integral must be non-negative, got {value!r}")
        t, r = sech2_tanh2(value)
        return cls(float(value), t, r, method, dict(metadata))


def schwarzschild_bound(bh: BlackHole, mode: Mode) -> BoundResult:
    """``(2 l(l+1) + 1) / (8 G M omega)`` and its sech^2/tanh^2 pair."""
    if bh.charge != 0:
        raise WrongFamily("schwarzschild_bound needs Q = 0; use rn_bound for charged holes")
    l, w = mode.l, mode.omega
    value = (2 * l * (l + 1) + 1) / (8.0 * bh.gm * w)
    return BoundResult.from_integral(value, BoundMethod.CLOSED_FORM_SCHWARZSCHILD)


def rn_bound(bh: BlackHole, mode: Mode) -> BoundResult:
    """Closed form for a sub-extremal Reissner-Nordstrom hole.

    ``(1 / 2 omega) [l(l+1)/(GM + A) + (GM + 2A) / (3 (GM + A)^2)]``; reduces
    to :func:`schwarzschild_bound` at ``Q = 0`` where ``A = GM``.
    """
    if not bh.is_sub_extremal:
        raise NotSubExtremal(f"rn_bound needs G M^2 > Q^2; got a {bh.extremality.value} hole")
    l, w = mode.l, mode.omega
    gm, a = bh.gm, math.sqrt(bh.a_squared)
    r_plus = gm + a
    bracket = l * (l + 1) / r_plus + (gm + 2.0 * a) / (3.0 * r_plus * r_plus)
    return BoundResult.from_integral(bracket / (2.0 * w), BoundMethod.CLOSED_FORM_RN)


def _radial_tail(bh: BlackHole, l: int) -> Callable[[float], float]:
    # exact int_R^inf V/Delta dr
    gm, gq2 = bh.gm, bh.newton_g * bh.charge**2
    return lambda R: l * (l + 1) / R + gm / R**2 - 2.0 * gq2 / (3.0 * R**3)


def bound_by_quadrature(bh: BlackHole, mode: Mode, spec: QuadratureSpec | None = None) -> BoundResult:
    """``(1 / 2 omega) int_{r_plus}^inf V/Delta dr`` by adaptive quadrature.

    Raises
    ------
    NegativePotential
        If any quadrature sample has ``V < 0`` (the ``h = omega`` reduction
        assumes a non-negative barrier).
    """
    if not bh.is_sub_extremal:
        raise NotSubExtremal(f"bound_by_quadrature needs a sub-extremal hole, got {bh.extremality.value}")
    spec = spec or QuadratureSpec()
    l, w = mode.l, mode.omega
    r_plus = bh.r_plus

    def integrand(r):
        v = st.potential_over_delta(bh, l, r)
        if np.any(np.asarray(v) < 0):
            raise NegativePotential(f"V < 0 encountered near r={np.min(r)!r}")
        return v

    res = integrate(integrand, r_plus, math.inf, spec, scale=r_plus,
                    tail_radius=1000.0 * r_plus, tail=_radial_tail(bh, l))
    return BoundResult.from_integral(res.value / (2.0 * w), BoundMethod.QUADRATURE_H_OMEGA,
                                     **res.metadata())


@dataclass(frozen=True)
class HFunction:
    """Positive auxiliary function for the general transfer-matrix bound.

    ``value`` and ``derivative`` take the same argument, either the tortoise
    coordinate (``argument="r_star"``, the default) or the areal radius
    (``argument="r"``).  ``derivative`` is always ``dh/dr*``.  When it is
    omitted a central finite difference with r* step
    ``1e-6 * max(1, |r*|)`` is used and flagged in the result metadata.
    """

    value: Callable[[float], float]
    derivative: Optional[Callable[[float], float]] = None
    argument: Literal["r_star", "r"] = "r_star"

    @classmethod
    def constant(cls, omega: float) -> "HFunction":
        return cls(lambda x: omega, lambda x: 0.0)

    @classmethod
    def local_wavenumber(cls, bh: BlackHole, l: int, omega: float) -> "HFunction":
        """``h = sqrt(omega^2 - V)``, valid when ``omega^2 > max V``."""
        w2 = omega * omega

        def h(r):
            return math.sqrt(w2 - float(st.potential(bh, l, r)))

        def dh(r):
            return -float(st.delta(bh, r) * st.potential_derivative(bh, l, r)) / (2.0 * h(r))

        return cls(h, dh, argument="r")


def _finite_difference(h: HFunction, bh: BlackHole, r: float, r_star: float) -> float:
    step = 1e-6 * max(1.0, abs(r_star))
    if h.argument == "r_star":
        return (h.value(r_star + step) - h.value(r_star - step)) / (2.0 * step)
    # the same r* step mapped to r, capped to stay outside the horizon
    dr = min(step * float(st.delta(bh, r)), 0.5 * (r - bh.r_plus))
    return float(st.delta(bh, r)) * (h.value(r + dr) - h.value(r - dr)) / (2.0 * dr)


def _check_asymptotics(h: HFunction, bh: BlackHole, omega: float) -> None:
    r_plus = bh.r_plus
    for r in (r_plus * (1.0 + 1e-12), r_plus * 1e8):
        x = float(st.tortoise(bh, r)) if h.argument == "r_star" else r
        hv = h.value(x)
        if not (hv > 0) or abs(hv - omega) > H_MATCH_TOL * omega:
            raise InvalidH(f"h must tend to omega={omega!r} at both ends; h({h.argument}={x!r}) = {hv!r}")


def bound_general_h(bh: BlackHole, mode: Mode, h: HFunction, spec: QuadratureSpec | None = None) -> BoundResult:
    """``int theta dr*`` for an arbitrary positive ``h``.

    The integral is taken over ``r`` in ``(r_plus, inf)`` as
    ``int theta / Delta dr`` with every term divided by Delta before
    squaring, so that ``h = omega`` reproduces :func:`bound_by_quadrature`.
    Samples never come closer than ``r_plus (1 + 1e-10)``.

    Raises
    ------
    InvalidH
        ``h`` is non-positive somewhere or does not approach omega at both
        ends of the domain.
    """
    if not bh.is_sub_extremal:
        raise NotSubExtremal(f"bound_general_h needs a sub-extremal hole, got {bh.extremality.value}")
    spec = spec or QuadratureSpec()
    l, w = mode.l, mode.omega
    w2 = w * w
    r_plus = bh.r_plus
    r_floor = r_plus * (1.0 + HORIZON_GUARD)
    _check_asymptotics(h, bh, w)

    def theta_over_delta(r: float) -> float:
        r = max(r, r_floor)
        d = float(st.delta(bh, r))
        x = float(st.tortoise(bh, r)) if h.argument == "r_star" else r
        hv = h.value(x)
        if not hv > 0:
            raise InvalidH(f"h must be positive; h({h.argument}={x!r}) = {hv!r}")
        if h.derivative is not None:
            hp = h.derivative(x)
        else:
            r_star = x if h.argument == "r_star" else float(st.tortoise(bh, r))
            hp = _finite_difference(h, bh, r, r_star)
        mismatch = (w2 - hv * hv) / d - float(st.potential_over_delta(bh, l, r))
        return math.hypot(hp / d, mismatch) / (2.0 * hv)

    res = integrate(theta_over_delta, r_plus, math.inf, spec, scale=r_plus,
                    tail_radius=1000.0 * r_plus)
    meta = res.metadata()
    meta["h_prime"] = "analytic" if h.derivative is not None else "finite-difference"
    return BoundResult.from_integral(res.value, BoundMethod.QUADRATURE_GENERAL_H, **meta)


def reflection_from_transmission(t_lower: float) -> float:
    """Upper reflection bound paired with a lower transmission bound: ``1 - T``."""
    if not (0 < t_lower <= 1):
        raise DomainError(f"transmission bound must lie in (0, 1], got {t_lower!r}")
    return 1.0 - t_lower
