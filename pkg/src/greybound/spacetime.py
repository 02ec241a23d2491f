"""Static spherically symmetric black holes: metric function, horizons,
scalar-type effective potential and tortoise coordinate.

Everything here works in geometric units with an explicit Newton constant
``G`` (default 1).  The metric function is

    Delta(r) = 1 - 2 G M / r + G Q^2 / r^2

which is the Schwarzschild ``f(r)`` when ``Q = 0``.  Radial functions accept
floats or numpy arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DomainError, NearExtremal, NotSubExtremal

ArrayLike = Union[float, np.ndarray]

#: smallest supported horizon splitting, as a fraction of G M
NEAR_EXTREMAL_FRACTION = 1e-6


class Extremality(str, enum.Enum):
    SUB_EXTREMAL = "sub-extremal"
    EXTREMAL = "extremal"
    SUPER_EXTREMAL = "super-extremal"


@dataclass(frozen=True)
class BlackHole:
    """Reissner-Nordstrom parameters (Schwarzschild when ``charge == 0``).

    Parameters
    ----------
    mass : float
        M > 0.
    charge : float
        Q >= 0.
    newton_g : float
        Gravitational constant, 1 in geometric units.

    Raises
    ------
    DomainError
        For non-positive mass or G, or negative charge.
    NearExtremal
        When ``0 < |A| < 1e-6 G M`` (or the same for ``B``): the tortoise
        coefficients would lose all precision.
    """

    mass: float
    charge: float = 0.0
    newton_g: float = 1.0
    a_squared: float = field(init=False, repr=False)

    def __post_init__(self):
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise DomainError(f"mass must be positive and finite, got {self.mass!r}")
        if not (self.charge >= 0 and math.isfinite(self.charge)):
            raise DomainError(f"charge must be non-negative and finite, got {self.charge!r}")
        if not (self.newton_g > 0 and math.isfinite(self.newton_g)):
            raise DomainError(f"newton_g must be positive, got {self.newton_g!r}")
        g, m, q = self.newton_g, self.mass, self.charge
        # G (G M^2 - Q^2) keeps the sign identical to the classification test
        a2 = g * (g * m * m - q * q)
        object.__setattr__(self, "a_squared", a2)
        floor = (NEAR_EXTREMAL_FRACTION * g * m) ** 2
        if a2 != 0.0 and abs(a2) < floor:
            raise NearExtremal(
                f"|G^2 M^2 - G Q^2| = {abs(a2):.3e} is below ({NEAR_EXTREMAL_FRACTION} G M)^2; "
                "near-extremal holes are not supported"
            )

    @classmethod
    def schwarzschild(cls, mass: float, newton_g: float = 1.0) -> "BlackHole":
        return cls(mass=mass, charge=0.0, newton_g=newton_g)

    @property
    def gm(self) -> float:
        return self.newton_g * self.mass

    @property
    def extremality(self) -> Extremality:
        if self.a_squared > 0:
            return Extremality.SUB_EXTREMAL
        if self.a_squared < 0:
            return Extremality.SUPER_EXTREMAL
        return Extremality.EXTREMAL

    @property
    def is_sub_extremal(self) -> bool:
        return self.a_squared > 0

    @property
    def a_param(self) -> float | None:
        """sqrt(G^2 M^2 - G Q^2), or None when that is not real."""
        return math.sqrt(self.a_squared) if self.a_squared >= 0 else None

    @property
    def b_param(self) -> float | None:
        """sqrt(G Q^2 - G^2 M^2), or None when that is not real."""
        return math.sqrt(-self.a_squared) if self.a_squared <= 0 else None

    @property
    def r_plus(self) -> float:
        return horizons(self)[0]

    @property
    def r_minus(self) -> float:
        return horizons(self)[1]

    def with_charge(self, charge: float) -> "BlackHole":
        return BlackHole(mass=self.mass, charge=charge, newton_g=self.newton_g)


def horizons(bh: BlackHole) -> tuple[float, float]:
    """Outer and inner horizon radii ``(G M + A, G M - A)``."""
    if not bh.is_sub_extremal:
        raise NotSubExtremal(f"{bh} is {bh.extremality.value}; no horizon pair")
    a = math.sqrt(bh.a_squared)
    r_plus = bh.gm + a
    # G Q^2 / r_plus avoids cancellation in G M - A for small charge
    r_minus = bh.newton_g * bh.charge**2 / r_plus
    return r_plus, r_minus


def outer_boundary(bh: BlackHole) -> float:
    """Radius where the exterior region begins: ``r_plus``, ``G M`` or 0."""
    kind = bh.extremality
    if kind is Extremality.SUB_EXTREMAL:
        return horizons(bh)[0]
    if kind is Extremality.EXTREMAL:
        return bh.gm
    return 0.0


def _as_radius(r: ArrayLike) -> ArrayLike:
    return np.asarray(r, dtype=float) if np.ndim(r) else float(r)


def _check(mask, message: str) -> None:
    if np.any(mask):
        raise DomainError(message)


def delta(bh: BlackHole, r: ArrayLike) -> ArrayLike:
    """Metric function ``1 - 2GM/r + GQ^2/r^2``."""
    r = _as_radius(r)
    _check(~(np.asarray(r) > 0), "delta needs r > 0")
    # nested form: r**2 would underflow for tiny r
    return 1.0 - (2.0 * bh.gm - bh.newton_g * bh.charge**2 / r) / r


def delta_prime(bh: BlackHole, r: ArrayLike) -> ArrayLike:
    """Radial derivative ``2GM/r^2 - 2GQ^2/r^3``."""
    r = _as_radius(r)
    _check(~(np.asarray(r) > 0), "delta_prime needs r > 0")
    return 2.0 * bh.gm / r**2 - 2.0 * bh.newton_g * bh.charge**2 / r**3


def potential_over_delta(bh: BlackHole, l: int, r: ArrayLike) -> ArrayLike:
    """``V / Delta = l(l+1)/r^2 + Delta'/r``, regular across the horizon.

    This is the integrand of ``int V dr*`` once ``dr* = dr / Delta`` is used.
    """
    _check_l(l)
    r = _as_radius(r)
    _check(~(np.asarray(r) > 0), "potential_over_delta needs r > 0")
    return l * (l + 1) / r**2 + delta_prime(bh, r) / r


def potential(bh: BlackHole, l: int, r: ArrayLike) -> ArrayLike:
    """Effective potential ``l(l+1) Delta / r^2 + Delta Delta' / r``.

    Valid on the exterior, including the outer horizon itself where it
    vanishes.  For ``Q = 0`` this is the Regge-Wheeler form
    ``f(r) [l(l+1)/r^2 + 2GM/r^3]``.
    """
    r = _as_radius(r)
    edge = outer_boundary(bh)
    _check(~(np.asarray(r) >= edge) | ~(np.asarray(r) > 0),
           f"potential needs r >= {edge!r} (exterior region)")
    return delta(bh, r) * potential_over_delta(bh, l, r)


def potential_derivative(bh: BlackHole, l: int, r: ArrayLike) -> ArrayLike:
    """Radial derivative ``dV/dr`` of :func:`potential` (not ``dV/dr*``)."""
    _check_l(l)
    r = _as_radius(r)
    _check(~(np.asarray(r) > 0), "potential_derivative needs r > 0")
    gm, gq2 = bh.gm, bh.newton_g * bh.charge**2
    d1 = delta_prime(bh, r)
    d2 = -4.0 * gm / r**3 + 6.0 * gq2 / r**4
    p = potential_over_delta(bh, l, r)
    dp = -2.0 * l * (l + 1) / r**3 + d2 / r - d1 / r**2
    return d1 * p + delta(bh, r) * dp


def _check_l(l: int) -> None:
    if int(l) != l or l < 0:
        raise DomainError(f"l must be a non-negative integer, got {l!r}")


def tortoise(bh: BlackHole, r: ArrayLike) -> ArrayLike:
    """Closed-form tortoise coordinate, with ``u = r - G M``.

    sub-extremal:   r + GM ln|u^2 - A^2| + (G^2M^2 + A^2)/(2A) ln|(u - A)/(u + A)|
    super-extremal: r + GM ln(u^2 + B^2) + (G^2M^2 - B^2)/B arctan(u/B)
    extremal:       r + GM ln(u^2) - G^2M^2/u

    No integration constant is added.  Physical outputs only depend on
    differences of r*, so the choice is immaterial.  For ``Q = 0`` the
    result equals ``r + 2GM ln(r/2GM - 1)`` shifted by ``2GM ln(2GM)``.
    """
    r = _as_radius(r)
    gm = bh.gm
    kind = bh.extremality
    edge = outer_boundary(bh)
    _check(~(np.asarray(r) > edge), f"tortoise needs r > {edge!r} for a {kind.value} hole")
    u = r - gm
    if kind is Extremality.SUB_EXTREMAL:
        a = math.sqrt(bh.a_squared)
        # u^2 - A^2 = (r - r_plus)(r - r_minus), factored to keep precision near r_plus
        r_plus, r_minus = horizons(bh)
        return (
            r
            + gm * np.log(np.abs((r - r_plus) * (r - r_minus)))
            + (gm * gm + a * a) / (2.0 * a) * np.log(np.abs((r - r_plus) / (u + a)))
        )
    if kind is Extremality.SUPER_EXTREMAL:
        b = math.sqrt(-bh.a_squared)
        return r + gm * np.log(u * u + b * b) + (gm * gm - b * b) / b * np.arctan(u / b)
    return r + gm * np.log(u * u) - gm * gm / u


def tortoise_branch(bh: BlackHole) -> str:
    return bh.extremality.value


def schwarzschild_tortoise(bh: BlackHole, r: ArrayLike) -> ArrayLike:
    """Textbook ``r + 2GM ln(r/(2GM) - 1)``; requires ``Q = 0``."""
    if bh.charge != 0:
        raise DomainError("schwarzschild_tortoise is defined for Q = 0 only")
    r = _as_radius(r)
    rs = 2.0 * bh.gm
    _check(~(np.asarray(r) > rs), f"schwarzschild_tortoise needs r > {rs!r}")
    return r + rs * np.log(r / rs - 1.0)


def radius_from_tortoise(bh: BlackHole, r_star: float) -> float:
    """Invert :func:`tortoise` on the exterior by bracketed root finding.

    Solves in ``s = ln(r - edge)`` where r* is smooth and monotone over the
    whole real line.
    """
    edge = outer_boundary(bh)
    scale = max(edge, bh.gm)

    def resid(s: float) -> float:
        return float(tortoise(bh, edge + math.exp(s))) - r_star

    lo = hi = math.log(scale)
    step = 1.0
    while resid(lo) > 0:
        lo -= step
        step *= 2.0
        if edge + math.exp(lo) <= edge:
            raise DomainError(f"r* = {r_star!r} is too close to the horizon to resolve")
    step = 1.0
    while resid(hi) < 0:
        hi += step
        step *= 2.0
        if hi > 700:
            raise DomainError(f"r* = {r_star!r} is out of range")
    s = brentq(resid, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return edge + math.exp(s)


#: smallest frequency accepted anywhere (the h = omega bound diverges at 0)
MIN_OMEGA = 1e-6


@dataclass(frozen=True)
class Mode:
    """Multipole number ``l`` and angular frequency ``omega`` of a wave."""

    l: int
    omega: float

    def __post_init__(self):
        _check_l(self.l)
        if not (self.omega >= MIN_OMEGA and math.isfinite(self.omega)):
            raise DomainError(f"omega must be finite and >= {MIN_OMEGA}, got {self.omega!r}")


@dataclass(frozen=True)
class PotentialProfile:
    """Samples of ``(r, r*, V)`` for one black hole and multipole."""

    bh: BlackHole
    l: int
    r: np.ndarray
    r_star: np.ndarray
    V: np.ndarray

    @property
    def samples(self) -> list[tuple[float, float, float]]:
        return list(zip(self.r.tolist(), self.r_star.tolist(), self.V.tolist()))

    def __len__(self) -> int:
        return len(self.r)

    def peak(self) -> tuple[float, float]:
        i = int(np.argmax(self.V))
        return float(self.r[i]), float(self.V[i])


def sample_profile(bh: BlackHole, l: int, r_min: float, r_max: float, n: int) -> PotentialProfile:
    """Sample the potential on ``n`` points spaced uniformly in r*.

    Endpoints are ``r_min`` and ``r_max`` exactly; interior radii come from
    inverting the tortoise map.
    """
    _check_l(l)
    edge = outer_boundary(bh)
    if int(n) != n or n < 2:
        raise DomainError(f"need at least two samples, got n={n!r}")
    if not (edge < r_min < r_max) or not math.isfinite(r_max):
        raise DomainError(f"need {edge!r} < r_min < r_max, got r_min={r_min!r}, r_max={r_max!r}")
    s_lo, s_hi = float(tortoise(bh, r_min)), float(tortoise(bh, r_max))
    r_star = np.linspace(s_lo, s_hi, int(n))
    r = np.empty(int(n))
    r[0], r[-1] = r_min, r_max
    for i in range(1, int(n) - 1):
        r[i] = radius_from_tortoise(bh, r_star[i])
    # keep the stored r* consistent with the stored r
    r_star = np.asarray(tortoise(bh, r), dtype=float)
    return PotentialProfile(bh=bh, l=int(l), r=r, r_star=r_star, V=np.asarray(potential(bh, l, r)))


def potential_peak(bh: BlackHole, l: int) -> tuple[float, float]:
    """Location and height of the potential barrier maximum.

    Dense logarithmic scan for the bracket, then bounded Brent refinement.
    """
    _check_l(l)
    edge = outer_boundary(bh)
    scale = max(edge, bh.gm)
    r = edge + scale * np.logspace(-6, 3, 4001)
    v = np.asarray(potential(bh, l, r))
    i = int(np.argmax(v))
    lo, hi = r[max(i - 1, 0)], r[min(i + 1, len(r) - 1)]
    res = minimize_scalar(lambda x: -float(potential(bh, l, x)), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12 * scale})
    r_peak = float(res.x)
    return r_peak, float(potential(bh, l, r_peak))
