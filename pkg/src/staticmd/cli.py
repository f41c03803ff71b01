"""Command-line front end.

Every command prints ``# ...`` provenance lines (defaults and tolerances in
force) followed by ``key=value`` report lines. Exit codes: 0 pass,
1 verified negative, 2 numerical failure, 64 usage error, 65 bad input data.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import kernels
from .axisym import (ChargeReport, MonopoleLedger, coulomb_extract, electric_charge,
                     electric_flux_series, magnetic_charge, monopole_ledger)
from .errors import DataError, DegenerateFitError, NumericalError
from .grids import (PhysicalConstants, fmt, parse_header, read_axipot, read_grid,
                    read_samples)
from .spherical import (FluxSeries, ShootingConfig, neutrality_flux, read_radial,
                        solve_spherical, tail_fits, write_radial)
from .spinor import mesh_l2, reality_residuals
from .weighted import (ExteriorDomain, WeightedNormSpec, decay_exponent_fit,
                       weighted_lp_norm, weighted_sobolev_norm)

EXIT_PASS, EXIT_NEGATIVE, EXIT_NUMERICAL, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 64, 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _threads():
    try:
        return max(1, int(os.environ.get("STATICMD_THREADS", "1")))
    except ValueError:
        return 1


def _map(func, items):
    """Order-preserving map, parallel up to STATICMD_THREADS workers."""
    items = list(items)
    n = min(_threads(), len(items))
    if n <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))


def _emit(lines, out):
    for line in lines:
        print(line, file=out)


def _kind(path):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    with path.open() as fh:
        first = fh.readline()
    return parse_header(first)[0]


def _radii(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad radius list {text!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise UsageError("radii must be positive")
    return vals


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _write_csv(path, header, rows):
    lines = [header] + [",".join(fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# commands

def cmd_solve_spherical(args, out):
    constants = PhysicalConstants(args.m, args.e)
    cfg = ShootingConfig(r_inner=args.r_inner, r_outer=args.r_outer, r_match=args.r_match,
                         n_nodes=args.n_nodes, tolerance=args.tolerance, rtol=args.rtol)
    lo, hi = args.fit_window
    _emit([f"# solve-spherical backend={kernels.BACKEND} rtol={args.rtol:g} "
           f"shoot_tol={args.tolerance:g} n_nodes={args.n_nodes}",
           f"# tolerances chi_tail_rel={args.chi_tol:g} A0_r2_rel={args.a0_tol:g} "
           f"Q_slope_abs={args.slope_tol:g} fit_window={lo:g}/m..{hi:g}/m"], out)
    sol = solve_spherical(constants, cfg, eps=args.eps, n=args.n)
    m, e = constants.m, constants.e
    fits = tail_fits(sol, (lo / m, hi / m))
    write_radial(args.out, sol)
    if args.csv:
        flux = neutrality_flux(sol)
        _write_csv(args.csv, "r,Q", zip(flux.r, flux.values))
    c1_exp = -args.eps / m
    a2_exp = 1 / (e * m)
    c1_ok = abs(fits["chi_tail_coeff"] - c1_exp) <= args.chi_tol * abs(c1_exp)
    a2_ok = abs(fits["A0_r2_coeff"] - a2_exp) <= args.a0_tol * abs(a2_exp)
    q_ok = abs(fits["Q_slope"] + 1) <= args.slope_tol
    lines = [
        f"m={m:.12g}", f"e={e:.12g}", f"eps={args.eps:+d}", f"n={args.n}",
        f"shooting_iterations={sol.info['iterations']}",
        f"match_residual={sol.info['match_residual']:.3e}",
        f"chi_tail_coeff={fits['chi_tail_coeff']:.6f}",
        f"chi_tail_expected={c1_exp:.6f}",
        f"chi_tail_tol={args.chi_tol * abs(c1_exp):.6f}",
        f"chi_r3_coeff={fits['chi_r3_coeff']:.6e}",
        f"A0_r2_coeff={fits['A0_r2_coeff']:.6f}",
        f"A0_r2_expected={a2_exp:.6f}",
        f"A0_r4_coeff={fits['A0_r4_coeff']:.6e}",
        f"Q_at_window_edge={fits['Q_outer']:.6e}",
        f"Q_slope={fits['Q_slope']:.4f}",
        f"R_decay={fits['R_decay']:.4f}",
        f"sin_chi_decay={fits['sin_chi_decay']:.4f}",
        f"radial_file={args.out}",
        f"verdict={'PASS' if c1_ok and a2_ok and q_ok else 'FAIL'}",
    ]
    _emit(lines, out)
    return EXIT_PASS if c1_ok and a2_ok and q_ok else EXIT_NEGATIVE


def _flux_series_from_file(path):
    kind = _kind(path)
    if kind == "radial":
        sol = read_radial(path)
        return neutrality_flux(sol), float(np.max(np.abs(sol.A0)))
    if kind == "axipot":
        grid = read_axipot(path)
        return electric_flux_series(grid), float(np.max(np.abs(grid.A0)))
    raise DataError(f"{path}: expected a radial or axipot file, found {kind}")


def cmd_verify_neutrality(args, out):
    flux, scale = _flux_series_from_file(args.input)
    _emit([f"# verify-neutrality slope_max={args.slope_max:g} zero_floor={args.zero_floor:g}"], out)
    if args.csv:
        _write_csv(args.csv, "r,Q", zip(flux.r, flux.values))
    qmax = float(np.max(np.abs(flux.values)))
    lines = [f"Q_outer={flux.values[-1]:.12g}", f"Q_max_abs={qmax:.6e}"]
    if qmax <= args.zero_floor * max(scale, 1.0):
        lines += ["Q_slope=na", "neutrality=PASS", "reason=flux_identically_zero"]
        _emit(lines, out)
        return EXIT_PASS
    try:
        fit = decay_exponent_fit(flux.r, flux.values)
    except DegenerateFitError:
        lines += ["Q_slope=na", "neutrality=PASS", "reason=flux_vanishes_on_outer_half"]
        _emit(lines, out)
        return EXIT_PASS
    ok = fit.delta <= args.slope_max
    lines += [f"Q_slope={fit.delta:.4f}", f"Q_slope_band={fit.band:.4f}",
              f"neutrality={'PASS' if ok else 'FAIL'}"]
    _emit(lines, out)
    return EXIT_PASS if ok else EXIT_NEGATIVE


def _axipot_from_file(path):
    kind = _kind(path)
    if kind == "axipot":
        return read_axipot(path)
    if kind == "grid":
        from .axisym import axipot_from_static
        return axipot_from_static(read_grid(path))
    raise DataError(f"{path}: expected an axipot or grid file, found {kind}")


def _default_radius(grid):
    return float(grid.r[grid.r.size // 2])


def cmd_flux_electric(args, out):
    kind = _kind(args.input)
    if kind == "radial":
        flux, _ = _flux_series_from_file(args.input)
        radii = args.r or [float(flux.r[flux.r.size // 2])]
        values = [flux.at(r) for r in radii]
    else:
        grid = _axipot_from_file(args.input)
        radii = args.r or [_default_radius(grid)]
        values = _map(lambda r: electric_charge(grid, r), radii)
        flux = electric_flux_series(grid)
    _emit([f"# flux-electric radii={','.join(f'{r:g}' for r in radii)} "
           f"threads={_threads()}"], out)
    if args.csv:
        _write_csv(args.csv, "r,Q", zip(flux.r, flux.values))
    for r, Q in zip(radii, values):
        if len(radii) > 1:
            print(f"# r={r:.12g}", file=out)
        _emit(ChargeReport(electric_Q=Q).lines(), out)
    return EXIT_PASS


def cmd_flux_magnetic(args, out):
    grid = _axipot_from_file(args.input)
    radii = args.r or [_default_radius(grid)]
    values = _map(lambda r: magnetic_charge(grid, r, args.pole_tol), radii)
    _emit([f"# flux-magnetic pole_tol={args.pole_tol:g} threads={_threads()}"], out)
    if args.csv:
        from .axisym import magnetic_charge_series
        series = magnetic_charge_series(grid, args.pole_tol)
        _write_csv(args.csv, "r,b", zip(series.r, series.values))
    target = 1 / (2 * abs(grid.constants.e))
    for r, b in zip(radii, values):
        if len(radii) > 1:
            print(f"# r={r:.12g}", file=out)
        dist = abs(abs(b) - target)
        verdict = "PASS" if dist < args.tol else "FAIL"
        rep = ChargeReport(magnetic_b=b, quantization_verdict=verdict,
                           extra={"dirac_distance": f"{dist:.3e}"})
        _emit(rep.lines(), out)
    return EXIT_PASS


def cmd_coulomb(args, out):
    grid = _axipot_from_file(args.input)
    _emit([f"# coulomb-extract rho={args.rho:g} rho1={args.rho1} "
           f"noise_floor={args.noise_floor:g}"], out)
    fit = coulomb_extract(grid, args.rho, args.rho1, args.noise_floor)
    if args.csv:
        sel = grid.r <= args.rho * (1 + 1e-12)
        from .grids import theta_integral
        shell = 0.5 * theta_integral(grid.theta, grid.A0[sel])
        _write_csv(args.csv, "r,A0_shell_mean,coulomb_part",
                   zip(grid.r[sel], shell, fit.q / grid.r[sel]))
    _emit(fit.lines(), out)
    return EXIT_PASS


def cmd_ledger(args, out):
    ledger = MonopoleLedger.parse(args.signs, args.eps)
    res = monopole_ledger(ledger, args.e)
    _emit([f"# ledger e={args.e:g} eps={args.eps:+d}"], out)
    _emit(res.lines(), out)
    return EXIT_PASS if res.feasible else EXIT_NEGATIVE


def cmd_decay_fit(args, out):
    r, f = read_samples(args.input)
    fit = decay_exponent_fit(r, f, outer_fraction=args.outer_fraction)
    _emit([f"# decay-fit outer_fraction={args.outer_fraction:g} band=2_stderr"], out)
    if args.csv:
        live = f != 0
        _write_csv(args.csv, "log_r,log_abs_f", zip(np.log(r[live]), np.log(np.abs(f[live]))))
    lines = fit.lines()
    if args.expect is not None:
        ok = abs(fit.delta - args.expect) <= args.tol
        lines.append(f"verdict={'PASS' if ok else 'FAIL'}")
        _emit(lines, out)
        return EXIT_PASS if ok else EXIT_NEGATIVE
    _emit(lines, out)
    return EXIT_PASS


def cmd_check_reality(args, out):
    grid = read_grid(args.input)
    rep = reality_residuals(grid, interior=args.interior)
    sl = (slice(args.interior, grid.r.size - args.interior),
          slice(args.interior, grid.theta.size - args.interior))
    scale = mesh_l2(2 * grid.constants.m * grid.R[sl], grid.r[sl[0]], grid.theta[sl[1]])
    rel = rep.div_l2 / scale if scale > 0 else math.inf
    _emit([f"# check-reality interior={args.interior} tol={args.tol:g}"], out)
    if args.csv:
        rr, tt = grid.mesh()
        _write_csv(args.csv, "r,theta,div_residual",
                   zip(rr.ravel(), tt.ravel(), rep.div_residual.ravel()))
    ok = rel <= args.tol and rep.eps_constant
    _emit(rep.lines() + [f"div_residual_rel={rel:.6e}",
                         f"reality={'PASS' if ok else 'FAIL'}"], out)
    return EXIT_PASS if ok else EXIT_NEGATIVE


def cmd_wnorm(args, out):
    r, f = read_samples(args.input)
    domain = ExteriorDomain(float(r[0]), float(r[-1]), r)
    spec = WeightedNormSpec(args.k, args.p, args.delta, args.sigma)
    _emit([f"# wnorm k={spec.k} p={spec.p:g} delta={spec.delta:g} sigma={spec.sigma} "
           f"quadrature=simpson_ln_r tail=power_law"], out)
    lines = []
    if spec.k == 0:
        res = weighted_lp_norm(f, domain, spec)
        lines += [f"norm={res.value:.12g}", f"truncated={res.truncated:.12g}",
                  f"tail={res.tail:.6e}",
                  f"tail_exponent={'na' if res.tail_exponent is None else f'{res.tail_exponent:.6f}'}"]
    else:
        lines.append(f"norm={weighted_sobolev_norm(f, domain, spec):.12g}")
    _emit(lines, out)
    return EXIT_PASS


# ---------------------------------------------------------------------------
# parser

def _window(text):
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO,HI") from None
    if not 0 < lo < hi:
        raise argparse.ArgumentTypeError("need 0 < LO < HI")
    return lo, hi


def _sign(text):
    v = int(text)
    if v not in (1, -1):
        raise argparse.ArgumentTypeError("must be +1 or -1")
    return v


def build_parser():
    p = _Parser(prog="staticmd", description="Static Maxwell-Dirac numerical diagnostics.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve-spherical", help="solve the spherically symmetric system")
    s.add_argument("--m", type=_positive, required=True)
    s.add_argument("--e", type=float, required=True)
    s.add_argument("--eps", type=_sign, default=1)
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--r-inner", type=_positive)
    s.add_argument("--r-outer", type=_positive)
    s.add_argument("--r-match", type=_positive)
    s.add_argument("--n-nodes", type=int, default=2001)
    s.add_argument("--rtol", type=_positive, default=1e-10)
    s.add_argument("--tolerance", type=_positive, default=1e-10)
    s.add_argument("--fit-window", type=_window, default=(20.0, 100.0),
                   help="fit window in units of 1/m (default 20,100)")
    s.add_argument("--chi-tol", type=_positive, default=0.01)
    s.add_argument("--a0-tol", type=_positive, default=0.02)
    s.add_argument("--slope-tol", type=_positive, default=0.2)
    s.add_argument("--out", default="radial.csv")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_solve_spherical)

    s = sub.add_parser("verify-neutrality", help="electric flux decay on a radial or axipot file")
    s.add_argument("input")
    s.add_argument("--slope-max", type=float, default=-0.8)
    s.add_argument("--zero-floor", type=_positive, default=1e-12)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_verify_neutrality)

    s = sub.add_parser("flux-electric", help="electric flux Q(r)")
    s.add_argument("input")
    s.add_argument("--r", type=_radii)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_flux_electric)

    s = sub.add_parser("flux-magnetic", help="magnetic charge b(r)")
    s.add_argument("input")
    s.add_argument("--r", type=_radii)
    s.add_argument("--pole-tol", type=_positive, default=1e-6)
    s.add_argument("--tol", type=_positive, default=1e-8)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_flux_magnetic)

    s = sub.add_parser("coulomb-extract", help="fit A0 = q/r + h inside a ball")
    s.add_argument("input")
    s.add_argument("--rho", type=_positive, required=True)
    s.add_argument("--rho1", type=_positive)
    s.add_argument("--noise-floor", type=_positive, default=1e-9)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_coulomb)

    s = sub.add_parser("ledger", help="total magnetic charge of N charged monopoles")
    s.add_argument("--signs", required=True, help="comma list of +/- signs")
    s.add_argument("--eps", type=_sign, default=1)
    s.add_argument("--e", type=float, default=1.0)
    s.set_defaults(func=cmd_ledger)

    s = sub.add_parser("decay-fit", help="power-law decay exponent of r,value samples")
    s.add_argument("input")
    s.add_argument("--outer-fraction", type=float, default=0.5)
    s.add_argument("--expect", type=float)
    s.add_argument("--tol", type=_positive, default=0.02)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_decay_fit)

    s = sub.add_parser("check-reality", help="reality residuals of a spinor grid")
    s.add_argument("input")
    s.add_argument("--interior", type=int, default=1)
    s.add_argument("--tol", type=_positive, default=1e-2)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_check_reality)

    s = sub.add_parser("wnorm", help="weighted norm of r,value samples")
    s.add_argument("input")
    s.add_argument("--k", type=int, default=0)
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--delta", type=float, default=0.0)
    s.add_argument("--sigma", choices=("r", "sqrt1r2"), default="r")
    s.set_defaults(func=cmd_wnorm)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DataError, ValueError, OSError) as exc:
        print(f"data error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
