"""Direct numerical scattering through the black-hole potential barrier.

Solves ``psi'' + (omega^2 - V) psi = 0`` (primes are d/dr*) with a purely
ingoing wave at the horizon and reads off the amplitudes at large radius:

    psi -> e^{-i omega r*}                        near r_plus
    psi -> A_in e^{-i omega r*} + A_out e^{+i omega r*}   far away

so that ``T = 1 / |A_in|^2`` and ``R = |A_out|^2 / |A_in|^2``.

The equation is integrated in ``x = r - r_plus`` with ``d/dr* = Delta d/dr``;
this avoids inverting the tortoise map.  Boundary data on both sides carry
the leading corrections to the free waves (a Taylor expansion of the
regular envelope at the horizon and the asymptotic ``1/r`` series of the
Jost solutions at the far cut) so that modest cuts give converged
amplitudes despite the slowly decaying ``l(l+1)/r^2`` tail.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from . import spacetime as st
from .bounds import BoundResult, rn_bound, schwarzschild_bound
from .errors import DomainError, GreyboundError, NotConverged, NotSubExtremal
from .numerics import OdeSpec, integrate_pair
from .spacetime import BlackHole, Mode

#: converged results must conserve flux to this level
UNITARITY_TOL = 1e-6
#: beyond this defect the solve is reported as NotConverged
FAILURE_TOL = 1e-4
#: horizon-side potential allowed at the inner cut, relative to omega^2
HORIZON_V_RATIO = 1e-8
DEFAULT_EPS_HORIZON = 1e-6
MAX_SERIES_TERMS = 80


@dataclass(frozen=True)
class ScatteringCuts:
    """Where the horizon and far-field boundary data are imposed.

    ``eps_horizon`` is relative to ``r_plus``.  ``None`` selects the
    defaults: the largest ``eps <= 1e-6`` with ``V <= 1e-8 omega^2`` at the
    inner cut, and ``r_far = max(50 r_plus, 20 (l + 1) / omega)``.
    """

    eps_horizon: Optional[float] = None
    r_far: Optional[float] = None


@dataclass(frozen=True)
class ScatteringResult:
    transmission: float
    reflection: float
    unitarity_defect: float
    domain: tuple[float, float]
    converged: bool
    metadata: dict = field(default_factory=dict, compare=False)


def _default_eps(bh: BlackHole, l: int, omega: float) -> float:
    r_plus = bh.r_plus
    limit = HORIZON_V_RATIO * omega * omega
    eps = DEFAULT_EPS_HORIZON
    # V is linear in r - r_plus here, so one rescale nearly suffices
    for _ in range(60):
        v = float(st.potential(bh, l, r_plus * (1.0 + eps)))
        if v <= limit:
            return eps
        eps *= 0.5 * limit / v if v > 2 * limit else 0.5
    raise DomainError("could not place the horizon cut; omega is too small")


def resolve_cuts(bh: BlackHole, mode: Mode, cuts: ScatteringCuts | None = None) -> tuple[float, float]:
    """Concrete ``(eps_horizon, r_far)`` for a solve, validated."""
    cuts = cuts or ScatteringCuts()
    r_plus = bh.r_plus
    l, w = mode.l, mode.omega
    if cuts.eps_horizon is None:
        eps = _default_eps(bh, l, w)
    else:
        eps = float(cuts.eps_horizon)
        if not eps > 0:
            raise DomainError("eps_horizon must be positive")
        v = float(st.potential(bh, l, r_plus * (1.0 + eps)))
        if v > HORIZON_V_RATIO * w * w:
            raise DomainError(
                f"eps_horizon={eps!r} leaves V={v:.3e} at the inner cut; "
                f"need V <= {HORIZON_V_RATIO} omega^2 = {HORIZON_V_RATIO * w * w:.3e}"
            )
    r_far = cuts.r_far if cuts.r_far is not None else max(50.0 * r_plus, 20.0 * (l + 1) / w)
    if not r_far > r_plus * (1.0 + eps):
        raise DomainError("r_far must lie outside the horizon cut")
    return eps, float(r_far)


def _horizon_data(bh: BlackHole, l: int, omega: float, x: float) -> tuple[complex, complex]:
    """``(y, dy/dr)`` for the ingoing envelope ``psi = e^{-i omega r*} y``.

    ``y`` is regular at the horizon with ``y(r_plus) = 1``; it satisfies
    ``Delta y'' + (Delta' - 2 i omega) y' - (V/Delta) y = 0``.
    """
    r_plus = bh.r_plus
    gm, gq2 = bh.gm, bh.newton_g * bh.charge**2
    d1 = float(st.delta_prime(bh, r_plus))
    d2 = -4.0 * gm / r_plus**3 + 6.0 * gq2 / r_plus**4
    p = float(st.potential_over_delta(bh, l, r_plus))
    # d/dr of V/Delta
    dp = -2.0 * l * (l + 1) / r_plus**3 + d2 / r_plus - d1 / r_plus**2
    y1 = p / complex(d1, -2.0 * omega)
    y2 = (dp + (p - d2) * y1) / complex(2.0 * d1, -2.0 * omega)
    return 1.0 + x * (y1 + 0.5 * y2 * x), y1 + y2 * x


def jost_series(bh: BlackHole, l: int, omega: float, r: float, sign: int) -> tuple[complex, complex, int]:
    """Asymptotic envelope of ``psi = e^{+-i omega r*} y`` at radius ``r``.

    ``y = sum_k a_k r^-k`` with ``a_0 = 1`` and

        (+-2 i omega k) a_k = (k(k-1) - l(l+1)) a_{k-1}
                              - 2GM (k-1)^2 a_{k-2} + GQ^2 (k-1)(k-2) a_{k-3}.

    The series is asymptotic; it is summed up to its smallest term.
    Returns ``(y, dy/dr, terms_used)``.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    L = l * (l + 1)
    gm, gq2 = bh.gm, bh.newton_g * bh.charge**2
    denom = sign * 2j * omega
    a = [1.0 + 0j]
    inv_r = 1.0 / r
    y, dy = 1.0 + 0j, 0j
    power = 1.0
    last = math.inf
    used = 1
    for k in range(1, MAX_SERIES_TERMS):
        ak = (k * (k - 1) - L) * a[k - 1]
        if k >= 2:
            ak -= 2.0 * gm * (k - 1) ** 2 * a[k - 2]
        if k >= 3:
            ak += gq2 * (k - 1) * (k - 2) * a[k - 3]
        ak /= denom * k
        a.append(ak)
        power *= inv_r
        term = ak * power
        size = abs(term)
        # a_1 vanishes for l = 0, so the stopping tests start at k = 3
        if k >= 3 and size > last:
            break
        y += term
        dy -= k * term * inv_r
        used = k + 1
        if k >= 3 and size <= 1e-17 * abs(y):
            break
        last = size
    return y, dy, used


def _far_basis(bh: BlackHole, l: int, omega: float, r: float, r_star: float, order: Optional[int]):
    """Values and r*-derivatives of the in/out Jost solutions at ``r``."""
    d = float(st.delta(bh, r))
    out = []
    for sign in (-1, 1):
        phase = cmath.exp(sign * 1j * omega * r_star)
        if order == 0:
            y, dy, used = 1.0 + 0j, 0j, 1
        else:
            y, dy, used = jost_series(bh, l, omega, r, sign)
        out.append((phase * y, phase * (sign * 1j * omega * y + d * dy), used))
    return out


def _decompose(psi: complex, dpsi: complex, basis) -> tuple[complex, complex]:
    (f_in, df_in, _), (f_out, df_out, _) = basis
    wronskian = f_in * df_out - f_out * df_in
    a_in = (psi * df_out - f_out * dpsi) / wronskian
    a_out = (f_in * dpsi - psi * df_in) / wronskian
    return a_in, a_out


def _result(a_in: complex, a_out: complex, domain, strict: bool, **meta) -> ScatteringResult:
    norm = abs(a_in) ** 2
    t = 1.0 / norm
    r = abs(a_out) ** 2 / norm
    defect = abs(1.0 - (t + r))
    res = ScatteringResult(t, r, defect, domain, defect <= UNITARITY_TOL,
                           dict(meta, a_in=a_in, a_out=a_out))
    if strict and defect > FAILURE_TOL:
        raise NotConverged(f"unitarity defect {defect:.3e} exceeds {FAILURE_TOL}", res)
    return res


def transmission_numeric(
    bh: BlackHole,
    mode: Mode,
    ode_spec: OdeSpec | None = None,
    cuts: ScatteringCuts | None = None,
    *,
    far_order: Optional[int] = None,
    formulation: str = "amplitude",
    potential_override: Callable[[float], float] | None = None,
    breakpoints: Sequence[float] = (),
    strict: bool = False,
) -> ScatteringResult:
    """Transmission and reflection probabilities for one mode.

    Parameters
    ----------
    formulation
        ``"amplitude"`` (default) integrates the slowly varying in/out
        amplitudes of the free-wave basis; ``"direct"`` integrates
        ``(psi, dpsi/dr*)`` and serves as an independent cross-check.
    far_order
        ``None`` sums the far-field asymptotic series to its smallest term;
        ``0`` uses bare plane waves ``e^{+-i omega r*}``.
    potential_override
        Test hook: replace ``V`` by a function of r* on the same r* domain
        (the hole only sets the cuts).  Integration then runs in r* with
        plane-wave boundary data, split at ``breakpoints``; see
        :func:`transmission_for_potential`.
    strict
        Raise :class:`NotConverged` when the unitarity defect exceeds
        ``1e-4``.  Otherwise the result is returned with
        ``converged=False``.
    """
    if not bh.is_sub_extremal:
        raise NotSubExtremal(f"scattering needs a sub-extremal hole, got {bh.extremality.value}")
    ode_spec = ode_spec or OdeSpec()
    l, w = mode.l, mode.omega
    eps, r_far = resolve_cuts(bh, mode, cuts)
    r_plus = bh.r_plus
    x_start = r_plus * eps
    r_star_h = float(st.tortoise(bh, r_plus + x_start))
    r_star_far = float(st.tortoise(bh, r_far))
    domain = (r_star_h, r_star_far)

    if potential_override is not None:
        return transmission_for_potential(potential_override, w, domain, ode_spec,
                                          breakpoints=breakpoints, formulation=formulation,
                                          strict=strict)

    if formulation not in ("amplitude", "direct"):
        raise ValueError(f"unknown formulation {formulation!r}")
    w2 = w * w
    L = float(l * (l + 1))
    gm = bh.gm
    gm2 = 2.0 * gm
    gq2x2 = 2.0 * bh.newton_g * bh.charge**2
    r_minus = bh.r_minus
    split = r_plus - r_minus
    a = math.sqrt(bh.a_squared)
    log_coeff = (gm * gm + a * a) / (2.0 * a)
    x_end = r_far - r_plus

    y, dy = _horizon_data(bh, l, w, x_start)
    phase = cmath.exp(-1j * w * r_star_h)
    d_h = x_start * (x_start + split) / (r_plus + x_start) ** 2
    psi0 = phase * y
    dpsi0 = phase * (-1j * w * y + d_h * dy)

    if formulation == "direct":
        def rhs(x, psi, dpsi):
            r = r_plus + x
            inv_r = 1.0 / r
            inv_r2 = inv_r * inv_r
            d = x * (x + split) * inv_r2
            p = (L + (gm2 - gq2x2 * inv_r) * inv_r) * inv_r2
            return dpsi / d, (p - w2 / d) * psi

        sol = integrate_pair(rhs, x_start, x_end, psi0, dpsi0, ode_spec)
        psi_far, dpsi_far = sol.y, sol.z
    else:
        # psi = alpha e^{-i w r*} + beta e^{+i w r*}; the amplitudes obey
        # d(alpha)/dr = -(V/Delta)/(2iw) (alpha + beta e^{2iwr*}), and
        # d(beta)/dr = (V/Delta)/(2iw) (alpha e^{-2iwr*} + beta)
        coupling = 1.0 / (2j * w)
        two_w = 2.0 * w

        def rhs(x, alpha, beta):
            r = r_plus + x
            inv_r = 1.0 / r
            p = (L + (gm2 - gq2x2 * inv_r) * inv_r) * inv_r * inv_r * coupling
            r_star = r + gm * math.log(x * (r - r_minus)) + log_coeff * math.log(x / (r - r_minus))
            e = cmath.exp(1j * two_w * r_star)
            return -p * (alpha + beta * e), p * (alpha / e + beta)

        alpha0 = (psi0 - dpsi0 / (1j * w)) * 0.5 / phase
        beta0 = (psi0 + dpsi0 / (1j * w)) * 0.5 * phase
        sol = integrate_pair(rhs, x_start, x_end, alpha0, beta0, ode_spec)
        e_far = cmath.exp(-1j * w * r_star_far)
        psi_far = sol.y * e_far + sol.z / e_far
        dpsi_far = 1j * w * (sol.z / e_far - sol.y * e_far)

    basis = _far_basis(bh, l, w, r_far, r_star_far, far_order)
    a_in, a_out = _decompose(psi_far, dpsi_far, basis)
    return _result(a_in, a_out, domain, strict,
                   eps_horizon=eps, r_far=r_far, steps=sol.steps,
                   evaluations=sol.evaluations, method=sol.method,
                   formulation=formulation, far_series_terms=basis[0][2])


def transmission_for_potential(
    potential: Callable[[float], float],
    omega: float,
    domain: tuple[float, float],
    ode_spec: OdeSpec | None = None,
    *,
    breakpoints: Sequence[float] = (),
    formulation: str = "amplitude",
    strict: bool = False,
) -> ScatteringResult:
    """1-D scattering through ``potential(x)`` supported inside ``domain``.

    The wave is purely left-moving at ``domain[0]``; plane-wave amplitudes
    are read off at ``domain[1]``.  Discontinuities of the potential should
    be listed in ``breakpoints`` so no step straddles them.  As in
    :func:`transmission_numeric`, ``"amplitude"`` integrates the plane-wave
    amplitudes (exact where the potential vanishes) and ``"direct"``
    integrates ``(psi, dpsi/dx)``.
    """
    a, b = domain
    if not b > a:
        raise DomainError("domain must be increasing")
    if not omega > 0:
        raise DomainError("omega must be positive")
    if formulation not in ("amplitude", "direct"):
        raise ValueError(f"unknown formulation {formulation!r}")
    ode_spec = ode_spec or OdeSpec()
    w2 = omega * omega
    coupling = 1.0 / (2j * omega)

    if formulation == "direct":
        def rhs(x, psi, dpsi):
            return dpsi, (potential(x) - w2) * psi

        y = cmath.exp(-1j * omega * a)
        z = -1j * omega * y
    else:
        def rhs(x, alpha, beta):
            p = potential(x) * coupling
            e = cmath.exp(2j * omega * x)
            return -p * (alpha + beta * e), p * (alpha / e + beta)

        y, z = 1.0 + 0j, 0j

    edges = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    steps = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        sol = integrate_pair(rhs, lo, hi, y, z, ode_spec)
        y, z = sol.y, sol.z
        steps += sol.steps
    if formulation == "amplitude":
        a_in, a_out = y, z
    else:
        e_in = cmath.exp(-1j * omega * b)
        e_out = 1.0 / e_in
        basis = ((e_in, -1j * omega * e_in, 1), (e_out, 1j * omega * e_out, 1))
        a_in, a_out = _decompose(y, z, basis)
    return _result(a_in, a_out, (a, b), strict, steps=steps, formulation=formulation)


@dataclass(frozen=True)
class SweepPoint:
    """One frequency of a sweep: numeric result plus both closed-form bounds.

    ``schwarzschild`` is the bound for the uncharged hole of equal mass.
    Failures leave the affected fields ``None`` and set ``error``.
    """

    omega: float
    scattering: Optional[ScatteringResult]
    bound: Optional[BoundResult]
    schwarzschild: Optional[BoundResult]
    error: Optional[str] = None


def _sweep_one(args) -> SweepPoint:
    bh, l, w, ode_spec, cuts, override = args
    bound = schw = res = None
    try:
        mode = Mode(l, w)
        schw = schwarzschild_bound(bh.with_charge(0.0), mode)
        bound = rn_bound(bh, mode)
        res = transmission_numeric(bh, mode, ode_spec, cuts, potential_override=override)
    except GreyboundError as exc:
        return SweepPoint(w, res, bound, schw, f"{type(exc).__name__}: {exc}")
    return SweepPoint(w, res, bound, schw)


def sweep(
    bh: BlackHole,
    l: int,
    omegas: Sequence[float],
    ode_spec: OdeSpec | None = None,
    cuts: ScatteringCuts | None = None,
    workers: int = 1,
    potential_override: Callable[[float], float] | None = None,
) -> list[SweepPoint]:
    """Scatter at every frequency in ``omegas`` (positive, ascending).

    Per-frequency failures are recorded on the point and the sweep goes on.
    Output order follows ``omegas`` regardless of ``workers``.
    ``potential_override`` is passed to :func:`transmission_numeric` and
    must be picklable when ``workers > 1``.
    """
    omegas = [float(w) for w in omegas]
    if any(not w > 0 for w in omegas):
        raise DomainError("all frequencies must be positive")
    if any(b < a for a, b in zip(omegas, omegas[1:])):
        raise DomainError("frequencies must be sorted ascending")
    jobs = [(bh, l, w, ode_spec, cuts, potential_override) for w in omegas]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, jobs))
    return [_sweep_one(job) for job in jobs]


def monotonicity_violations(points: Sequence[SweepPoint], slack: float = 1e-9) -> list[float]:
    """Frequencies where the numeric transmission drops below its predecessor.

    A soft diagnostic: single-barrier transmission is expected, not proven,
    to be non-decreasing in omega.
    """
    done = [p for p in points if p.scattering is not None and p.scattering.converged]
    return [b.omega for a, b in zip(done, done[1:])
            if b.scattering.transmission < a.scattering.transmission - slack]
