"""Spherically symmetric static solutions by inward shooting from the asymptotic tail.

Reduction (tau = theta, R = R(r), chi = chi(r), V = eps R r_hat)::

    div V = -2 m R sin(chi)        ->  R'/R = -2/r - 2 m eps sin(chi)
    A0 = (m/e) cos(chi) + eps chi'/(2e)
    lap A0 = 4 pi e j0, j0 = sqrt(2) R  ->  (r^2 A0')' = 4 sqrt(2) pi e r^2 R

With F = r^2 A0' the last two lines give a first-order system for
y = (mu, mu', R, F), chi = n pi + mu::

    mu''  = eps (2 e F / r^2 + 2 m sin(chi) mu')
    R'    = R (-2/r - 2 m eps sin(chi))
    F'    = 4 sqrt(2) pi e r^2 R

eps = +1 is the branch with V along r_hat; eps = -1 is its mirror image
(chi -> -chi, V -> -V). A decaying tail with R > 0 exists only for odd n.

Scaling: with rho = m r the solution is mu(r) = eps * mu1(rho),
R(r) = (m^3/e^2) R1(rho), F(r) = F1(rho)/e, where (mu1, R1, F1) solve the
m = e = 1 system. The tail coefficients below are the exact rational
coefficients of that system's large-rho expansion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DataError, NoConvergenceError, SingularityError
from .grids import (PhysicalConstants, StaticFieldGrid, d_du, fmt, format_header,
                    _read_table, _constants)
from .weighted import decay_exponent_fit

SQRT2 = math.sqrt(2.0)

# mu1(rho) = sum c_k rho^-k, F1 = sum f_k rho^-k, R1 = sum a_k rho^-k
MU_COEFFS = {1: -1.0, 3: -1 / 168, 5: -3 / 16640, 7: 43361 / 6885552128,
             9: 34309363 / 1056044545081344}
F_COEFFS = {1: -2.0, 3: 3 / 28, 5: -1023 / 163072, 7: 569701 / 1721388032,
            9: -24604883865 / 1525397676228608}
R_COEFFS = {4: SQRT2 / (4 * math.pi), 6: -9 * SQRT2 / (224 * math.pi),
            8: 5115 * SQRT2 / (1304576 * math.pi),
            10: -569701 * SQRT2 / (1967300608 * math.pi),
            12: 221443954785 * SQRT2 / (12203181409828864 * math.pi)}


# ---------------------------------------------------------------------------
# reduced system

@dataclass(frozen=True)
class RadialSystem:
    """Right-hand side of the reduced radial ODE for given constants and branch."""

    constants: PhysicalConstants
    eps: int = 1
    n: int = 1

    @property
    def parity(self):
        return -1.0 if self.n % 2 else 1.0

    def rhs(self, r, y):
        m, e = self.constants.m, self.constants.e
        mu, dmu, R, F = y
        s = self.parity * np.sin(mu)
        return np.array([
            dmu,
            self.eps * (2 * e * F / r**2 + 2 * m * s * dmu),
            R * (-2 / r - 2 * m * self.eps * s),
            4 * SQRT2 * math.pi * e * r**2 * R,
        ])

    def __call__(self, r, y):
        return self.rhs(r, y)

    def chi(self, mu):
        return self.n * math.pi + np.asarray(mu)

    def potential(self, mu, dmu):
        """A0 = (m/e) cos(chi) + eps chi' / (2e)."""
        m, e = self.constants.m, self.constants.e
        return (m / e) * self.parity * np.cos(mu) + self.eps * np.asarray(dmu) / (2 * e)


def reduce_spherical(constants, eps=1, n=1):
    if eps not in (1, -1):
        raise DataError("eps must be +1 or -1")
    return RadialSystem(constants, eps, int(n))


def _terms(coeffs, terms):
    return list(coeffs.items())[:terms]


def tail_state(constants, r, eps=1, terms=5):
    """State (mu, mu', R, F) from the first ``terms`` orders of the tail series."""
    if not 1 <= terms <= len(MU_COEFFS):
        raise DataError(f"terms must lie in 1..{len(MU_COEFFS)}")
    m, e = constants.m, constants.e
    rho = m * np.asarray(r, dtype=float)
    mu = sum(c * rho**-k for k, c in _terms(MU_COEFFS, terms))
    dmu = m * sum(-k * c * rho ** (-k - 1) for k, c in _terms(MU_COEFFS, terms))
    R = (m**3 / e**2) * sum(a * rho**-k for k, a in _terms(R_COEFFS, terms))
    F = sum(f * rho**-k for k, f in _terms(F_COEFFS, terms)) / e
    return np.array([eps * mu, eps * dmu, R, F])


def asymptotic_tail(constants, r, order=2):
    """Truncated large-r series ``(chi, A0)`` for the default (eps = +1, n = 1) branch.

    order 1: chi = pi - 1/(m r),                  A0 = -m/e + 1/(e m r^2)
    order 2: adds -1/(168 m^3 r^3) and -3/(112 e m^3 r^4)
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    m, e = constants.m, constants.e
    r = np.asarray(r, dtype=float)
    chi = math.pi - 1 / (m * r)
    A0 = -m / e + 1 / (e * m * r**2)
    if order == 2:
        chi = chi - 1 / (168 * m**3 * r**3)
        A0 = A0 - 3 / (112 * e * m**3 * r**4)
    return chi, A0


# ---------------------------------------------------------------------------
# solution container and IO

@dataclass
class RadialSolution:
    r: np.ndarray
    R: np.ndarray
    chi: np.ndarray
    A0: np.ndarray
    constants: PhysicalConstants
    epsilon_sign: int = 1
    n: int = 1
    dchi: np.ndarray | None = None
    F: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        if self.r.ndim != 1 or self.r.size < 2 or not np.all(np.diff(self.r) > 0):
            raise DataError("radial nodes must be strictly increasing")
        for name in ("R", "chi", "A0"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != self.r.shape:
                raise DataError(f"{name} must match the radial nodes")
            setattr(self, name, arr)
        if not np.all(self.R > 0):
            raise DataError("R must be positive")

    @property
    def mu(self):
        return self.chi - self.n * math.pi

    def to_grid(self, theta, idx=slice(None)):
        """Sample as a StaticFieldGrid (tau = theta, or its mirror for eps = -1)."""
        r = self.r[idx]
        rr, tt = np.meshgrid(r, np.asarray(theta, float), indexing="ij")
        R = np.repeat(self.R[idx][:, None], tt.shape[1], axis=1)
        chi = np.repeat(self.chi[idx][:, None], tt.shape[1], axis=1)
        if self.epsilon_sign > 0:
            tau, eta = tt, np.zeros_like(tt)
        else:
            tau, eta = np.pi - tt, np.full_like(tt, np.pi)
        return StaticFieldGrid(r, theta, R, tau, chi, eta, self.constants)


def write_radial(path, sol):
    c = sol.constants
    lines = [format_header("radial", m=c.m, e=c.e, eps=int(sol.epsilon_sign)), "r,R,chi,A0"]
    for row in zip(sol.r, sol.R, sol.chi, sol.A0):
        lines.append(",".join(fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_radial(path):
    kind, params, data = _read_table(path, ["r", "R", "chi", "A0"])
    if kind != "radial":
        raise DataError(f"{path}: expected staticmd-radial, found staticmd-{kind}")
    try:
        eps = int(float(params.get("eps", "1")))
    except ValueError:
        raise DataError(f"{path}: bad eps in header") from None
    order = np.argsort(data[:, 0], kind="stable")
    data = data[order]
    n = int(round((data[-1, 2]) / math.pi)) if data.size else 1
    return RadialSolution(data[:, 0], data[:, 1], data[:, 2], data[:, 3],
                          _constants(params, path), eps, n)


# ---------------------------------------------------------------------------
# shooting

@dataclass
class ShootingConfig:
    """Shooting window and integrator controls.

    Radii left as None default to multiples of 1/m: r_inner 0.05, r_outer 200,
    r_match r_outer / 2. ``tail_terms`` sets how many series orders seed the
    initial data at r_outer; the match target always uses all of them.
    """

    r_inner: float | None = None
    r_outer: float | None = None
    r_match: float | None = None
    tail_terms: int = 5
    n_nodes: int = 2001
    tolerance: float = 1e-10
    max_iterations: int = 30
    rtol: float = 1e-10
    atol: float = 1e-30
    max_step: float = 0.0
    chi_prime_max: float = 1e8
    max_steps: int = 2_000_000

    def resolved(self, m):
        r_inner = self.r_inner if self.r_inner is not None else 0.05 / m
        r_outer = self.r_outer if self.r_outer is not None else 200.0 / m
        r_match = self.r_match if self.r_match is not None else 0.5 * r_outer
        if not (0 < r_inner < r_outer):
            raise DataError("need 0 < r_inner < r_outer")
        if not (r_inner <= r_match < r_outer):
            raise DataError("r_match must lie in [r_inner, r_outer)")
        if self.tolerance <= 0 or self.rtol <= 0 or self.n_nodes < 3:
            raise DataError("tolerances must be positive and n_nodes >= 3")
        return r_inner, r_outer, r_match


def _run(nodes, y0, system, cfg, integrator):
    m, e = system.constants.m, system.constants.e
    Y, status, reached, steps, rejected, r_stop = integrator(
        nodes, y0, m, e, float(system.eps), system.parity, cfg.rtol, cfg.atol, 0.0,
        cfg.max_step, cfg.max_steps, cfg.chi_prime_max * m)
    if status == kernels.STATUS_SINGULAR:
        raise SingularityError(f"R -> 0 or chi' blow-up near r = {r_stop:.6g}")
    if status == kernels.STATUS_UNDERFLOW:
        raise SingularityError(f"step size underflow near r = {r_stop:.6g}")
    if status == kernels.STATUS_MAX_STEPS:
        raise NoConvergenceError(f"integrator step budget exhausted near r = {r_stop:.6g}")
    return Y, steps, rejected


def solve_spherical(constants=None, config=None, eps=1, n=1, integrator=None):
    """Solve the spherically symmetric system by inward shooting.

    The tail amplitude of R at ``r_outer`` is the shooting parameter: it is
    scaled by (1 + s) and s is adjusted by secant iteration until mu at
    ``r_match`` agrees with the asymptotic series to ``config.tolerance``
    (relative). This removes the free recessive tail mode, which the series
    does not contain. The accepted solution is then integrated down to
    ``r_inner``; R must stay positive and chi' bounded on the whole window.
    """
    constants = constants or PhysicalConstants()
    cfg = config or ShootingConfig()
    system = reduce_spherical(constants, eps, n)
    if system.parity > 0:
        raise DataError("no decaying tail with R > 0 for even n")
    integrator = integrator or kernels.integrate_radial
    r_inner, r_outer, r_match = cfg.resolved(constants.m)
    y_tail = tail_state(constants, r_outer, eps, cfg.tail_terms)
    target = tail_state(constants, r_match, eps)[0]
    pair = np.array([r_outer, r_match])

    def mismatch(s):
        y0 = y_tail.copy()
        y0[2] *= 1.0 + s
        Y, _, _ = _run(pair, y0, system, cfg, integrator)
        return (Y[-1, 0] - target) / abs(target)

    s0, g0 = 0.0, mismatch(0.0)
    s, g = s0, g0
    iterations = 0
    if abs(g0) > cfg.tolerance:
        s1 = 1e-6
        g1 = mismatch(s1)
        while abs(g1) > cfg.tolerance:
            iterations += 1
            if iterations > cfg.max_iterations or g1 == g0:
                raise NoConvergenceError(
                    f"shooting did not converge: mismatch {g1:.3e} after {iterations} steps")
            s0, g0, s1 = s1, g1, s1 - g1 * (s1 - s0) / (g1 - g0)
            g1 = mismatch(s1)
        s, g = s1, g1

    nodes = np.geomspace(r_outer, r_inner, cfg.n_nodes)
    y0 = y_tail.copy()
    y0[2] *= 1.0 + s
    Y, steps, rejected = _run(nodes, y0, system, cfg, integrator)
    Y = Y[::-1]
    r = nodes[::-1]
    mu, dmu, R, F = Y.T
    A0 = system.potential(mu, dmu)
    info = {"tail_amplitude_shift": s, "match_residual": g, "iterations": iterations,
            "steps": steps, "rejected": rejected, "backend": kernels.BACKEND}
    return RadialSolution(r, R, system.chi(mu), A0, constants, eps, n, dmu, F, info)


def sample_solution(sol_or_constants, r, eps=1, n=1, config=None, integrator=None):
    """Accurate solution values at arbitrary radii (integrates through ``r`` directly).

    Returns arrays ``(R, chi, dchi)`` aligned with ``r``.
    """
    constants = getattr(sol_or_constants, "constants", sol_or_constants)
    cfg = config or ShootingConfig()
    base = solve_spherical(constants, cfg, eps, n, integrator) \
        if not isinstance(sol_or_constants, RadialSolution) else sol_or_constants
    system = reduce_spherical(constants, eps, n)
    r = np.asarray(r, dtype=float)
    _, r_outer, _ = cfg.resolved(constants.m)
    if np.any(r >= r_outer):
        raise DataError("sample radii must lie inside r_outer")
    order = np.argsort(r)[::-1]
    nodes = np.concatenate(([r_outer], r[order]))
    y0 = tail_state(constants, r_outer, eps, cfg.tail_terms)
    y0[2] *= 1.0 + base.info.get("tail_amplitude_shift", 0.0)
    Y, _, _ = _run(nodes, y0, system, cfg, integrator or kernels.integrate_radial)
    out = np.empty((r.size, 4))
    out[order] = Y[1:]
    return out[:, 2], system.chi(out[:, 0]), out[:, 1]


# ---------------------------------------------------------------------------
# flux and tail fits

@dataclass
class FluxSeries:
    """Charge Q(r) (or magnetic charge b(r)) on a family of spheres."""

    r: np.ndarray
    values: np.ndarray
    kind: str = "electric"

    def decay_slope(self, window=None):
        r, v = self.r, self.values
        if window is not None:
            sel = (r >= window[0]) & (r <= window[1])
            r, v = r[sel], v[sel]
        return decay_exponent_fit(r, v)

    def at(self, radius):
        return float(np.interp(np.log(radius), np.log(self.r), self.values))

    def write_csv(self, path):
        lines = [f"r,{'Q' if self.kind == 'electric' else 'b'}"]
        lines += [f"{fmt(a)},{fmt(b)}" for a, b in zip(self.r, self.values)]
        Path(path).write_text("\n".join(lines) + "\n")


def neutrality_flux(sol):
    """Q(r) = r^2 dA0/dr = -dA0/du with u = 1/r.

    Differencing in u keeps Coulomb (q/r) and 1/r^2 terms exact.
    """
    r = np.asarray(sol.r, dtype=float)
    if r.size < 3:
        raise DataError("need at least three radii")
    Q = -d_du(np.asarray(sol.A0, dtype=float), 1.0 / r)
    return FluxSeries(r, Q, "electric")


def fit_inverse_powers(r, y, powers):
    """Least-squares coefficients of ``y ~ sum_k c_k r^-k`` for ``k`` in ``powers``."""
    r = np.asarray(r, dtype=float)
    basis = np.stack([r ** -float(k) for k in powers], axis=1)
    # column scaling keeps the normal equations well conditioned
    scale = np.max(np.abs(basis), axis=0)
    coef, *_ = np.linalg.lstsq(basis / scale, np.asarray(y, dtype=float), rcond=None)
    return dict(zip(powers, coef / scale))


DECAY_START = 3.0


def tail_fits(sol, window=None):
    """Tail coefficients, neutrality and decay diagnostics on the outer window.

    Window defaults to [20/m, 100/m]. Decay exponents are fitted on every
    node with r >= DECAY_START/m instead, which spans enough decades with the
    default outer radius. The chi fit uses powers (1, 3, 5) of 1/r and the A0
    fit powers (2, 4, 6); the last power in each is a guard term absorbing
    the next order of the series.
    """
    m, e = sol.constants.m, sol.constants.e
    lo, hi = window or (20.0 / m, 100.0 / m)
    sel = (sol.r >= lo * (1 - 1e-12)) & (sol.r <= hi * (1 + 1e-12))
    if np.count_nonzero(sel) < 16:
        raise DataError("fewer than 16 nodes in the fit window")
    r = sol.r[sel]
    base = sol.n * math.pi
    cmu = fit_inverse_powers(r, sol.chi[sel] - base, (1, 3, 5))
    cA = fit_inverse_powers(r, sol.A0[sel] - (m / e) * math.cos(base), (2, 4, 6))
    flux = neutrality_flux(sol)
    # decay region fixed in units of 1/m so the inner radius cannot drag in the core
    far = sol.r >= DECAY_START / m
    decay = lambda f: decay_exponent_fit(sol.r[far], f[far], outer_fraction=1.0)
    qfit = decay(flux.values)
    Rfit = decay(sol.R)
    sfit = decay(np.sin(sol.chi))
    return {
        "chi_tail_coeff": cmu[1],
        "chi_r3_coeff": cmu[3],
        "A0_r2_coeff": cA[2],
        "A0_r4_coeff": cA[4],
        "Q_outer": flux.at(hi),
        "Q_slope": qfit.delta,
        "Q_slope_err": qfit.band,
        "R_decay": Rfit.delta,
        "sin_chi_decay": sfit.delta,
    }
