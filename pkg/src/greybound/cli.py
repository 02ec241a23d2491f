"""Command-line interface: ``greybound <potential|bounds|verify|tortoise>``.

Every command writes plain CSV whose first line is a ``#`` comment carrying
the effective configuration.  Exit codes: 0 success, 1 invalid input or I/O
failure, 2 numerical non-convergence, 3 a converged scattering point
violates the transmission/reflection bounds.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import spacetime as st
from .bounds import BoundMethod, BoundResult, rn_bound, schwarzschild_bound
from .config import (
    PRESETS,
    ConfigError,
    RunConfig,
    build_config,
    parse_triplet,
    read_config_file,
    validate,
)
from .errors import GreyboundError
from .numerics import OdeSpec
from .scattering import ScatteringCuts, monotonicity_violations, sweep
from .spacetime import Extremality, Mode

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_BOUND_VIOLATION = 0, 1, 2, 3
#: solver noise absorbed when checking the bounds against numerics
DOMINANCE_SLACK = 1e-9


class Output:
    """Collects CSV rows and report lines for one command run."""

    def __init__(self, columns: Sequence[str]):
        self.columns = list(columns)
        self.rows: list[list] = []
        self.report: list[str] = []
        self.exit_code = EXIT_OK

    def add(self, *values) -> None:
        self.rows.append(list(values))

    def render(self, header: str) -> str:
        buf = io.StringIO()
        buf.write(header + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return "" if value is None else str(value)


def _zero_potential(r_star: float) -> float:
    return 0.0


def _r_grid(cfg: RunConfig, default_lo: float, default_hi: float, default_n: int):
    if cfg.r_grid is None:
        return default_lo, default_hi, default_n
    return parse_triplet(cfg.r_grid, "r grid")


def cmd_potential(cfg: RunConfig) -> Output:
    """Potential of the configured hole next to the equal-mass uncharged one.

    Samples are uniform in r*.  ``V_schwarzschild`` is ``nan`` on rows that
    lie inside the uncharged horizon ``2GM``.
    """
    bh = cfg.black_hole()
    schw = bh.with_charge(0.0)
    r_plus = bh.r_plus
    lo, hi, n = _r_grid(cfg, r_plus * (1.0 + 1e-10), 50.0 * bh.gm, 400)
    if not lo > r_plus:
        raise ConfigError(f"r grid must start outside r_plus={r_plus!r}")
    profile = st.sample_profile(bh, cfg.l, lo, hi, n)
    schw_edge = st.outer_boundary(schw)
    out = Output(["r", "r_star", "V_rn", "V_schwarzschild"])
    v_schw = []
    for r, r_star, v in profile.samples:
        vs = float(st.potential(schw, cfg.l, r)) if r >= schw_edge else math.nan
        v_schw.append(vs)
        out.add(r, r_star, v, vs)
    r_pk, v_pk = st.potential_peak(bh, cfg.l)
    rs_pk, vs_pk = st.potential_peak(schw, cfg.l)
    relation = "higher" if v_pk > vs_pk else "lower" if v_pk < vs_pk else "equal"
    out.report.append(f"peak V_rn={v_pk:.10g} at r={r_pk:.10g}; "
                      f"peak V_schwarzschild={vs_pk:.10g} at r={rs_pk:.10g}; "
                      f"charged peak is {relation}")
    return out


def cmd_bounds(cfg: RunConfig) -> Output:
    bh = cfg.black_hole()
    schw = bh.with_charge(0.0)
    out = Output(["omega", "T_bound_rn", "T_bound_schw", "R_bound_rn", "R_bound_schw"])
    ordered = True
    for w in cfg.omegas():
        mode = Mode(cfg.l, float(w))
        b_rn, b_s = rn_bound(bh, mode), schwarzschild_bound(schw, mode)
        ordered &= b_rn.t_lower <= b_s.t_lower and b_rn.r_upper >= b_s.r_upper
        out.add(float(w), b_rn.t_lower, b_s.t_lower, b_rn.r_upper, b_s.r_upper)
    out.report.append(f"charged bounds {'never exceed' if ordered else 'EXCEED'} "
                      "the uncharged transmission bound on this grid")
    return out


def cmd_verify(cfg: RunConfig) -> Output:
    """Numerical scattering against the closed-form bounds."""
    bh = cfg.black_hole()
    ode_spec = OdeSpec(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol)
    cuts = ScatteringCuts(eps_horizon=cfg.eps_horizon, r_far=cfg.r_far)
    override = _zero_potential if cfg.inject == "zero" else None
    points = sweep(bh, cfg.l, cfg.omegas(), ode_spec, cuts, workers=cfg.workers,
                   potential_override=override)
    out = Output(["omega", "T_num", "R_num", "T_bound", "R_bound", "unitarity_defect",
                  "bound_margin", "converged", "error"])
    margins, defects, violations, failures = [], [], [], []
    for p in points:
        bound = p.bound
        if override is not None and bound is not None:
            # the injected potential has a vanishing bound integral
            bound = BoundResult.from_integral(0.0, BoundMethod.QUADRATURE_H_OMEGA)
        if p.scattering is None or bound is None:
            failures.append(p.omega)
            out.add(p.omega, None, None, None, None, None, None, False, p.error)
            continue
        s = p.scattering
        t_bound = bound.t_lower + cfg.bound_offset
        r_bound = bound.r_upper
        margin = s.transmission - t_bound
        out.add(p.omega, s.transmission, s.reflection, t_bound, r_bound,
                s.unitarity_defect, margin, s.converged, None)
        defects.append(s.unitarity_defect)
        if not s.converged:
            failures.append(p.omega)
            continue
        margins.append(margin)
        if margin < -DOMINANCE_SLACK or s.reflection > r_bound + DOMINANCE_SLACK:
            violations.append(p.omega)
    min_margin = min(margins) if margins else math.nan
    max_defect = max(defects) if defects else math.nan
    out.report.append(f"min bound_margin={min_margin:.6e} max unitarity_defect={max_defect:.3e} "
                      f"points={len(points)} converged={len(margins)} "
                      f"violations={len(violations)} failures={len(failures)}")
    for w in failures:
        out.report.append(f"not converged at omega={w!r}")
    for w in violations:
        out.report.append(f"BOUND VIOLATION at omega={w!r}")
    soft = monotonicity_violations(points)
    if soft:
        out.report.append(f"note: T_num decreases at omega={soft} (soft check)")
    if violations:
        out.exit_code = EXIT_BOUND_VIOLATION
    elif failures:
        out.exit_code = EXIT_NOT_CONVERGED
    return out


def cmd_tortoise(cfg: RunConfig) -> Output:
    """Tortoise coordinate on a geometric r grid with a derivative residual.

    The residual is ``|Delta * dr*/dr - 1|`` with a central difference of
    step ``1e-4 (r - r_edge)``.
    """
    bh = cfg.black_hole()
    kind = bh.extremality
    edge = st.outer_boundary(bh)
    scale = edge if edge > 0 else bh.gm
    lo, hi, n = _r_grid(cfg, 1.01 * scale, 100.0 * scale, 200)
    if not lo > edge:
        raise ConfigError(f"r grid must start beyond r={edge!r} for a {kind.value} hole")
    out = Output(["r", "r_star", "branch", "residual"])
    if kind is Extremality.SUPER_EXTREMAL:
        out.report.append("warning: G M^2 < Q^2 has no horizon (naked singularity); "
                          "values are for inspection only and no bounds apply")
    for r in np.geomspace(lo, hi, n):
        out.add(float(r), float(st.tortoise(bh, r)), kind.value, tortoise_residual(bh, float(r)))
    return out


def tortoise_residual(bh: st.BlackHole, r: float) -> float:
    edge = st.outer_boundary(bh)
    h = 1e-4 * (r - edge)
    slope = (float(st.tortoise(bh, r + h)) - float(st.tortoise(bh, r - h))) / (2.0 * h)
    return abs(float(st.delta(bh, r)) * slope - 1.0)


COMMANDS = {
    "potential": cmd_potential,
    "bounds": cmd_bounds,
    "verify": cmd_verify,
    "tortoise": cmd_tortoise,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greybound",
        description="Greybody-factor bounds for Schwarzschild and Reissner-Nordstrom black holes",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""examples:
  greybound potential --preset fig2 --out fig2.csv
  greybound bounds --preset fig3 --out fig3.csv
  greybound verify --preset fig3 --l 2 --out verify.csv
  greybound tortoise --m 1 --q 1 --out extremal.csv
""",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--preset", choices=sorted(PRESETS))
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--family", choices=["schwarzschild", "reissner-nordstrom"])
    parser.add_argument("--g", type=float, help="gravitational constant (default 1)")
    parser.add_argument("--m", type=float, help="mass M")
    parser.add_argument("--q", type=float, help="charge Q")
    parser.add_argument("--l", type=int, help="multipole number")
    parser.add_argument("--omega", help="start:stop:count or comma-separated list")
    parser.add_argument("--r-grid", dest="r_grid", help="min:max:count radii")
    parser.add_argument("--out", help="CSV path (default: stdout)")
    parser.add_argument("--rel-tol", dest="rel_tol", type=float)
    parser.add_argument("--abs-tol", dest="abs_tol", type=float)
    parser.add_argument("--eps-horizon", dest="eps_horizon", type=float)
    parser.add_argument("--r-far", dest="r_far", type=float)
    parser.add_argument("--workers", type=int, help="processes for verification sweeps")
    parser.add_argument("--inject", choices=["none", "zero"], help=argparse.SUPPRESS)
    parser.add_argument("--bound-offset", dest="bound_offset", type=float, help=argparse.SUPPRESS)
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


_FLAG_KEYS = ("family", "g", "m", "q", "l", "omega", "r_grid", "out", "rel_tol", "abs_tol",
              "eps_horizon", "r_far", "workers", "inject", "bound_offset")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = build_config(args.preset, file_values, {k: getattr(args, k) for k in _FLAG_KEYS})
        cfg = validate(cfg, args.command)
        out = COMMANDS[args.command](cfg)
    except (ConfigError, st.DomainError) as exc:
        print(f"greybound: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except GreyboundError as exc:
        print(f"greybound: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED

    text = out.render(cfg.header(args.command))
    if cfg.out:
        path = Path(cfg.out)
        try:
            path.write_text(text)
        except OSError as exc:
            print(f"greybound: error: cannot write {path}: {exc}", file=sys.stderr)
            return EXIT_INVALID
        report_stream = sys.stdout
    else:
        sys.stdout.write(text)
        report_stream = sys.stderr
    for line in out.report:
        print(line, file=report_stream)
    return out.exit_code


if __name__ == "__main__":
    sys.exit(main())
