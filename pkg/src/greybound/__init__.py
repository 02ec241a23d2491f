"""Rigorous lower bounds on black-hole greybody factors.

The transmission probability through the effective potential of a
Schwarzschild or sub-extremal Reissner-Nordstrom black hole is bounded below
by ``sech^2`` of a potential integral.  This package evaluates that bound in
closed form and by quadrature, and checks it against a direct numerical
solution of the scattering problem.
"""

from .bounds import (
    BoundMethod,
    BoundResult,
    HFunction,
    bound_by_quadrature,
    bound_general_h,
    reflection_from_transmission,
    rn_bound,
    schwarzschild_bound,
)
from .scattering import ScatteringCuts, ScatteringResult, SweepPoint, sweep, transmission_numeric
from .spacetime import (
    BlackHole,
    Extremality,
    Mode,
    PotentialProfile,
    delta,
    horizons,
    potential,
    potential_over_delta,
    sample_profile,
    tortoise,
)

__version__ = "0.1.0"
