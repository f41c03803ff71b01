"""Acceptance criteria, one check per criterion.

Each check returns ``(ok, detail)``; the tests print one ``PASS``/``FAIL``
line per criterion. Run ``python tests/test_acceptance.py`` for the lines alone.
"""
import math
import time

import numpy as np
import pytest

from staticmd import PhysicalConstants, solve_spherical
from staticmd.axisym import (electric_charge, ledger_brute_force, magnetic_charge,
                             magnetic_charge_series, monopole_limit)
from staticmd.grids import AxiPotentialGrid, StaticFieldGrid, gauss_theta
from staticmd.spherical import fit_inverse_powers, neutrality_flux, sample_solution
from staticmd.spinor import (current, dyad_from_angles, minkowski, null_tetrad,
                             reality_residuals)
from staticmd.weighted import (ExteriorDomain, WeightedNormSpec, decay_exponent_fit,
                               multiplication_bound_check, sobolev_inequality_check,
                               weighted_lp_norm)

pytestmark = pytest.mark.acceptance

UNIT = PhysicalConstants(1.0, 1.0)
_cache = {}


def _solved():
    if "sol" not in _cache:
        t0 = time.perf_counter()
        sol = solve_spherical(UNIT)
        _cache["sol"] = sol
        _cache["elapsed"] = time.perf_counter() - t0
    return _cache["sol"], _cache["elapsed"]


def _window(sol, lo=20.0, hi=100.0):
    sel = (sol.r >= lo) & (sol.r <= hi)
    return sol.r[sel], sel


def check_chi_tail():
    sol, elapsed = _solved()
    r, sel = _window(sol)
    c = fit_inverse_powers(r, sol.chi[sel] - math.pi, (1, 3, 5))
    ok = (abs(c[1] + 1) <= 0.01 and abs(c[3] + 1 / 168) <= 0.2 / 168 and elapsed < 10)
    return ok, f"c1={c[1]:.6f} c3={c[3]:.6e} (target -1/168={-1 / 168:.6e}) solve_s={elapsed:.3f}"


def check_potential_tail():
    sol, elapsed = _solved()
    r, sel = _window(sol)
    c = fit_inverse_powers(r, sol.A0[sel] + 1.0, (2, 4, 6))
    ok = abs(c[2] - 1) <= 0.02 and abs(c[4] + 3 / 112) <= 0.25 * 3 / 112 and elapsed < 10
    return ok, f"a2={c[2]:.6f} a4={c[4]:.6e} (target -3/112={-3 / 112:.6e})"


def check_neutrality():
    sol, _ = _solved()
    flux = neutrality_flux(sol)
    far = sol.r >= 3.0
    fit = decay_exponent_fit(sol.r[far], flux.values[far], outer_fraction=1.0)
    q100 = flux.at(100.0)
    ok = abs(fit.delta + 1) <= 0.2 and abs(q100) < 0.025
    return ok, f"slope={fit.delta:.4f} Q(100/m)={q100:.6e}"


def _tau_family(rs, th, a, flip):
    rr, tt = np.meshgrid(rs, th, indexing="ij")
    tau = np.arccos((1 - a * rr) * np.cos(tt))
    return np.pi - tau if flip else tau


def check_monopole_quantization():
    worst_exact = 0.0
    for e in (1.0, -0.5, 2.0):
        r = np.geomspace(0.5, 50.0, 41)
        g = StaticFieldGrid.from_functions(r, gauss_theta(24)[0], lambda r, t: r**-2.0,
                                           lambda r, t: t, math.pi,
                                           constants=PhysicalConstants(1.0, e))
        b = magnetic_charge_series(g).values
        off = [magnetic_charge(g, x) for x in (0.7, 3.3, 27.0)]
        worst_exact = max(worst_exact, float(np.max(np.abs(np.r_[b, off] + 1 / (2 * e)))))
    rs, th = np.geomspace(1e-4, 1e-1, 40), gauss_theta(16)[0]
    worst_limit = 0.0
    for e in (1.0, -0.5, 2.0):
        c = PhysicalConstants(1.0, e)
        for flip, eps in ((False, 1), (True, -1)):
            res = monopole_limit(rs, th, _tau_family(rs, th, 0.8, flip), c, epsilon=eps, epsilon1=1)
            worst_limit = max(worst_limit, abs(res.b0 - (-eps / (2 * e))))
    ok = worst_exact < 1e-8 and worst_limit < 1e-3
    return ok, f"tau=theta max|b+1/(2e)|={worst_exact:.2e} limit max|b0-target|={worst_limit:.2e}"


def check_ledger():
    t0 = time.perf_counter()
    count, bad = ledger_brute_force(12)
    elapsed = time.perf_counter() - t0
    return bad == 0 and count == 8190 and elapsed < 1.0, \
        f"vectors={count} violations={bad} seconds={elapsed:.3f}"


def _spinor_properties(n=1000):
    rng = np.random.default_rng(100)
    tau, eta = rng.uniform(0, np.pi, n), rng.uniform(-10, 10, n)
    d = dyad_from_angles(tau, eta)
    t = null_tetrad(d)
    err = [np.max(np.abs(d.contraction() - 1))]
    for a, b, want in [(t.l, t.l, 0), (t.n, t.n, 0), (t.m, t.m, 0), (t.l, t.n, 1),
                       (t.m, t.mbar, -1), (t.l, t.m, 0), (t.n, t.m, 0)]:
        err.append(np.max(np.abs(minkowski(a, b) - want)))
    err.append(np.max(np.abs(t.m[..., 0])))
    R = 10.0 ** rng.uniform(-6, 6, n)
    from staticmd.grids import SpinorPoint
    j = current(SpinorPoint(R, tau, 0.0, eta))
    err.append(np.max(np.abs(minkowski(j, j) / (2 * R * R) - 1)))
    return max(err)


def _reality_slope(sol):
    res, hs = [], []
    for n in (21, 41, 81, 161):
        r = np.linspace(2.0, 6.0, n)
        th = np.linspace(0.3, np.pi - 0.3, 9)
        R, chi, _ = sample_solution(sol, r)
        tt = np.broadcast_to(th, (n, th.size))
        g = StaticFieldGrid(r, th, R[:, None] * np.ones_like(tt), tt,
                            chi[:, None] * np.ones_like(tt), 0.0)
        res.append(reality_residuals(g).div_l2)
        hs.append(4.0 / (n - 1))
    return float(np.polyfit(np.log(hs), np.log(res), 1)[0])


def _norm_properties():
    dom = ExteriorDomain.geometric(1.0, 100.0, per_decade=64)
    rng = np.random.default_rng(101)
    spec = WeightedNormSpec(0, 2, -1)
    ok = True
    for _ in range(100):
        f = dom.sample(lambda r: r ** rng.uniform(-3, -1.2) * (1 + 0.5 * np.sin(np.log(r))))
        g = dom.sample(lambda r: r ** rng.uniform(-3, -1.2))
        c = rng.uniform(-5, 5)
        nf, ng = (weighted_lp_norm(x, dom, spec).value for x in (f, g))
        ok &= abs(weighted_lp_norm(c * f, dom, spec).value - abs(c) * nf) <= 1e-12 * abs(c) * nf
        ok &= weighted_lp_norm(f + g, dom, spec).value <= (nf + ng) * (1 + 1e-6)
        d1, d2 = sorted(rng.uniform(-1, 0.5, 2))
        ok &= (weighted_lp_norm(f, dom, WeightedNormSpec(0, 2, d2)).value
               <= weighted_lp_norm(f, dom, WeightedNormSpec(0, 2, d1)).value)
    return bool(ok)


def _decay_recovery():
    rng = np.random.default_rng(102)
    r = np.geomspace(1, 1000, 80)
    return max(abs(decay_exponent_fit(r, rng.uniform(0.5, 5) * r**a).delta - a)
               for a in rng.uniform(-4, 0, 50))


def _families():
    dom = ExteriorDomain.geometric(1.0, 100.0, per_decade=200)
    rng = np.random.default_rng(103)

    def member():
        a, c, w = rng.uniform(-3, 0), rng.uniform(1.5, 20), rng.uniform(0.5, 4)
        return dom.sample(lambda r: r**a * np.exp(-((r - c) / w) ** 2))

    sob = sobolev_inequality_check([member() for _ in range(100)], dom, k=2, p=2, delta=-1.0)
    mult = max(multiplication_bound_check(member(), member(), dom, (2, -1.0), (2, -1.0), (1, -1.5))
               for _ in range(100))
    return sob.worst, mult


def check_property_suites():
    sol, _ = _solved()
    spin = _spinor_properties()
    slope = _reality_slope(sol)
    norms = _norm_properties()
    decay = _decay_recovery()
    sob, mult = _families()
    ok = (spin < 1e-12 and abs(slope - 2) <= 0.2 and norms and decay <= 0.02
          and np.isfinite(sob) and sob < 1 and np.isfinite(mult) and mult < 1)
    return ok, (f"spinor_max_err={spin:.2e} reality_slope={slope:.3f} norm_props={norms} "
                f"decay_max_err={decay:.2e} sobolev_worst={sob:.3e} mult_worst={mult:.3e}")


def check_flux_sign():
    r, th = np.geomspace(1.0, 10.0, 21), gauss_theta(16)[0]
    errs = []
    for q in (-3.0, -1.0, 0.5, 2.0):
        g = AxiPotentialGrid.from_functions(r, th, lambda r, t: q / r)
        errs += [abs(electric_charge(g, x) + q) for x in (1.0, 2.5, 10.0)]
    worst = max(errs)
    return worst <= 1e-12, f"max|Q+q|={worst:.2e}"


CRITERIA = [
    ("1 chi tail", check_chi_tail),
    ("2 potential tail", check_potential_tail),
    ("3 neutrality slope", check_neutrality),
    ("4 monopole quantization", check_monopole_quantization),
    ("5 ledger brute force", check_ledger),
    ("6 property suites", check_property_suites),
    ("7 flux sign convention", check_flux_sign),
]


def _line(name, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {name}: {detail}"


@pytest.mark.parametrize("name,check", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(name, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + _line(name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    for name, check in CRITERIA:
        print(_line(name, *check()))
