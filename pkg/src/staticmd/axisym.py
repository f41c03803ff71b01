"""Axially symmetric diagnostics: vector potential, flux integrals, Coulomb fits,
monopole charge and the multi-monopole sign ledger.

Fields live on the phi = 0 meridian of an (r, theta) mesh. The only nonzero
vector-potential component is A_phi, so

    b(r) = (1/2) [r sin(theta) A_phi]_{theta=0}^{pi}       (magnetic charge)
    Q(r) = (r^2/2) int_0^pi dA0/dr sin(theta) dtheta       (electric flux)

With this flux convention A0 = q/r gives Q = -q; reports also carry
``physical_charge = -Q``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (DataError, FitError, MeshError, NonCauchyError,
                     PoleExtrapolationError, StationaryPointError)
from .grids import (AxiPotentialGrid, StaticFieldGrid, check_axis, d_du, pole_extrapolate,
                    theta_integral)
from .spherical import FluxSeries
from .spinor import _require_positive, mesh_l2

POLE_TOL = 1e-6


# ---------------------------------------------------------------------------
# potentials

def _effective_tau(grid):
    """tau measured from the meridian plane; eta = phi + pi flips its sign."""
    psi = np.mod(grid.eta, 2 * np.pi)
    near0 = np.minimum(psi, 2 * np.pi - psi) < 1e-9
    nearpi = np.abs(psi - np.pi) < 1e-9
    if not np.all(near0 | nearpi):
        raise DataError("vector potential formula needs eta = phi (mod pi)")
    return np.where(nearpi, -grid.tau, grid.tau)


def vector_potential_axisym(grid: StaticFieldGrid):
    """A_phi = (1/2e) {cos tau / (r sin theta)
                      - (1/(r R)) [d_r(r R sin(tau-theta)) - d_theta(R cos(tau-theta))]}."""
    check_axis(grid.r, "r")
    check_axis(grid.theta, "theta")
    R = _require_positive(grid.R)
    e = grid.constants.e
    rr, th = grid.mesh()
    tau = _effective_tau(grid)
    s, c = np.sin(tau - th), np.cos(tau - th)
    radial = np.gradient(rr * R * s, grid.r, axis=0, edge_order=2)
    polar = np.gradient(R * c, grid.theta, axis=1, edge_order=2)
    return (np.cos(tau) / (rr * np.sin(th)) - (radial - polar) / (rr * R)) / (2 * e)


def axipot_from_static(grid: StaticFieldGrid, A0=None):
    """AxiPotentialGrid with A_phi from :func:`vector_potential_axisym`.

    ``A0`` defaults to (m/e) cos chi + grad(chi).V / (2 e R).
    """
    from .spinor import potential_static
    if A0 is None:
        A0 = potential_static(grid)[0]
    return AxiPotentialGrid(grid.r, grid.theta, A0, vector_potential_axisym(grid),
                            grid.constants)


def lorenz_gauge_residual(grid: AxiPotentialGrid, A_r=None, A_theta=None):
    """Mesh RMS of div A.

    A = A_phi(r, theta) phi_hat has no phi dependence, so its divergence
    vanishes identically; optional A_r, A_theta samples are included so that
    non-axial components are detected.
    """
    check_axis(grid.r, "r")
    check_axis(grid.theta, "theta")
    rr, th = np.meshgrid(grid.r, grid.theta, indexing="ij")
    div = np.zeros_like(rr)
    if A_r is not None:
        div = div + np.gradient(rr**2 * np.asarray(A_r), grid.r, axis=0, edge_order=2) / rr**2
    if A_theta is not None:
        div = div + (np.gradient(np.sin(th) * np.asarray(A_theta), grid.theta, axis=1,
                                 edge_order=2) / (rr * np.sin(th)))
    return mesh_l2(div, grid.r, grid.theta)


# ---------------------------------------------------------------------------
# radial sampling helpers

def _row_at(r_nodes, values, radius):
    """Values on the sphere ``radius``: the matching row, or a cubic spline in ln r."""
    r_nodes = np.asarray(r_nodes, dtype=float)
    if not (r_nodes[0] * (1 - 1e-12) <= radius <= r_nodes[-1] * (1 + 1e-12)):
        raise DataError(f"radius {radius} outside the grid range")
    hit = np.flatnonzero(np.isclose(r_nodes, radius, rtol=1e-12, atol=0))
    if hit.size:
        return values[hit[0]]
    return CubicSpline(np.log(r_nodes), values, axis=0)(math.log(radius))


def _pole_value(theta, row, pole, tol=POLE_TOL):
    v0 = pole_extrapolate(theta, row, pole)
    v1 = pole_extrapolate(theta, row, pole, shift=1)
    if not np.all(np.abs(v0 - v1) <= tol * np.maximum(1.0, np.abs(v0))):
        raise PoleExtrapolationError(f"{pole} pole limit does not stabilize "
                                     f"(|shift difference| = {np.max(np.abs(v0 - v1)):.3e})")
    return v0


# ---------------------------------------------------------------------------
# charges

def _as_axipot(grid):
    return axipot_from_static(grid) if isinstance(grid, StaticFieldGrid) else grid


def magnetic_charge_series(grid, tol=POLE_TOL):
    """b at every radius of the grid by pole endpoint evaluation."""
    grid = _as_axipot(grid)
    f = grid.r[:, None] * np.sin(grid.theta)[None, :] * grid.Aphi
    b = 0.5 * (_pole_value(grid.theta, f, "south", tol) - _pole_value(grid.theta, f, "north", tol))
    return FluxSeries(grid.r.copy(), b, "magnetic")


def magnetic_charge(grid, r, tol=POLE_TOL):
    """b(r) = (1/2) [r sin(theta) A_phi] from theta = 0 to pi (pole-extrapolated)."""
    grid = _as_axipot(grid)
    check_axis(grid.theta, "theta", min_nodes=4)
    # interpolating b itself keeps r-independent charges exact between nodes
    return float(_row_at(grid.r, magnetic_charge_series(grid, tol).values, r))


def magnetic_charge_quadrature(aphi, r, n=64):
    """b(r) as (1/2) int_0^pi d_theta(r sin(theta) A_phi) dtheta for a callable ``aphi(r, theta)``.

    The theta derivative is a five-point difference with a step that shrinks
    near the poles; the integral is Gauss-Legendre in theta.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    th = 0.5 * np.pi * (x + 1)
    h = np.minimum(1e-3, np.minimum(th, np.pi - th) / 4)
    f = lambda t: r * np.sin(t) * aphi(r, t)
    df = (f(th - 2 * h) - 8 * f(th - h) + 8 * f(th + h) - f(th + 2 * h)) / (12 * h)
    return float(0.25 * np.pi * np.sum(w * df))


def electric_flux_series(grid: AxiPotentialGrid):
    """Q at every radius: r^2 dA0/dr = -dA0/du (u = 1/r), integrated over theta."""
    check_axis(grid.r, "r")
    dA = -d_du(grid.A0, 1.0 / grid.r, axis=0)
    Q = 0.5 * theta_integral(grid.theta, dA)
    return FluxSeries(grid.r.copy(), Q, "electric")


def electric_charge(grid: AxiPotentialGrid, r):
    """Q(r) = (r^2/2) int dA0/dr sin(theta) dtheta (Gauss quadrature on Gauss nodes)."""
    series = electric_flux_series(grid)
    return float(_row_at(grid.r, series.values, r))


# ---------------------------------------------------------------------------
# Coulomb extraction

@dataclass
class CoulombFit:
    q: float
    h_sup: float
    h_mean: float
    residual_rms: float
    n_shells: int
    q_is_zero: bool

    def lines(self):
        return [f"coulomb_q={self.q:.12g}", f"h_sup={self.h_sup:.6e}",
                f"h_mean={self.h_mean:.6e}", f"fit_residual_rms={self.residual_rms:.6e}",
                f"shells={self.n_shells}", f"q_is_zero={str(self.q_is_zero).lower()}"]


def coulomb_extract(grid: AxiPotentialGrid, rho, rho1=None, noise_floor=1e-9, growth_slope=0.5):
    """Fit the angle-averaged A0 on shells rho1 < r <= rho to q/r + b0 + b1 r + b2 r^2.

    h = A0 - q/r is the bounded remainder. FitError when sup|h| over the inner
    half of the shells grows faster than r^-growth_slope toward the centre.
    """
    sel = (grid.r <= rho * (1 + 1e-12))
    if rho1 is not None:
        sel &= grid.r > rho1
    r = grid.r[sel]
    if r.size < 6:
        raise MeshError("need at least six shells inside the ball")
    A0 = grid.A0[sel]
    shell = 0.5 * theta_integral(grid.theta, A0)
    basis = np.stack([1 / r, np.ones_like(r), r, r * r], axis=1)
    scale = np.max(np.abs(basis), axis=0)
    coef, *_ = np.linalg.lstsq(basis / scale, shell, rcond=None)
    coef = coef / scale
    q = float(coef[0])
    fit_rms = float(np.sqrt(np.mean((basis @ coef - shell) ** 2)))
    mag = float(np.max(np.abs(A0)))
    zero = abs(q) / r[0] <= noise_floor * max(mag, 1e-300)
    if zero:
        q = 0.0
    h = A0 - q / r[:, None]
    hsup_r = np.max(np.abs(h), axis=1)
    # unbounded remainder: sup|h| rises like a power of 1/r toward the centre
    inner = slice(0, max(3, r.size // 2))
    # remainders at the rounding level of A0 carry no growth information
    live = hsup_r[inner] > 1e-10 * np.max(np.abs(A0[inner]), axis=1)
    if np.count_nonzero(live) >= 3:
        slope = np.polyfit(np.log(r[inner][live]), np.log(hsup_r[inner][live]), 1)[0]
        if slope < -growth_slope:
            raise FitError(f"remainder h grows like r^{slope:.2f} toward the centre")
    return CoulombFit(q, float(np.max(hsup_r)), float(np.mean(h)), fit_rms, int(r.size), bool(zero))


# ---------------------------------------------------------------------------
# tau from chi and the zeta identity

def _chi_gradient(r, theta, chi):
    check_axis(r, "r")
    check_axis(theta, "theta")
    chi = np.asarray(chi, dtype=float)
    gr = np.gradient(chi, r, axis=0, edge_order=2)
    gt = np.gradient(chi, theta, axis=1, edge_order=2) / np.asarray(r)[:, None]
    return gr, gt


def tau_direction(r, theta, chi, epsilon=1):
    """Normalized pair (cos(tau-theta), sin(tau-theta)) = epsilon (d_r chi, d_theta chi / r) / |grad chi|."""
    gr, gt = _chi_gradient(r, theta, chi)
    mag = np.hypot(gr, gt)
    scale = max(float(np.max(np.abs(chi))), 1.0) / np.asarray(r)[:, None]
    bad = mag < 1e-12 * scale
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise StationaryPointError(f"grad chi vanishes near r={r[i]:.6g}, theta={theta[j]:.6g}")
    return epsilon * gr / mag, epsilon * gt / mag


def tau_from_chi(r, theta, chi, epsilon=1):
    """tau - theta from the two-argument arctangent of the normalized gradient pair."""
    c, s = tau_direction(r, theta, chi, epsilon)
    return np.arctan2(s, c)


def zeta_residual(r, theta, chi, A0, q, constants, epsilon=1):
    """Residual of the decomposition chi = q_chi ln r + zeta near a Coulomb centre.

    With q_chi = 2 e epsilon q and g = 2 e epsilon (A0 - q/r - (m/e) cos chi),
    returns (d_r zeta)^2 + (2 q_chi / r) d_r zeta + r^-2 (d_theta zeta)^2
    - (2 q_chi / r) g - g^2 on the mesh.
    """
    m, e = constants.m, constants.e
    r = np.asarray(r, dtype=float)
    rr = r[:, None]
    qc = 2 * e * epsilon * q
    zeta = np.asarray(chi) - qc * np.log(rr)
    zr, zt = _chi_gradient(r, theta, zeta)
    g = 2 * e * epsilon * (np.asarray(A0) - q / rr - (m / e) * np.cos(chi))
    return zr**2 + (2 * qc / rr) * zr + zt**2 - (2 * qc / rr) * g - g**2


# ---------------------------------------------------------------------------
# monopole limit

@dataclass
class MonopoleLimit:
    b: FluxSeries
    b0: float
    expected: float | None
    distance: float
    verdict: str
    spread: float

    def lines(self):
        exp = "na" if self.expected is None else f"{self.expected:.12g}"
        return [f"b0={self.b0:.12g}", f"b0_expected={exp}", f"b0_distance={self.distance:.3e}",
                f"b_spread_small_decade={self.spread:.3e}", f"quantization_verdict={self.verdict}"]


def pole_magnetic_charge(theta, tau, e, tol=POLE_TOL):
    """(1/2e) [cos tau(pi) - cos tau(0)] / 2 on each row of ``tau``."""
    c = np.cos(np.asarray(tau, dtype=float))
    return (_pole_value(theta, c, "south", tol) - _pole_value(theta, c, "north", tol)) / (4 * e)


def monopole_limit(r, theta, tau, constants, epsilon=None, epsilon1=None,
                   tolerance=1e-3, cauchy_tol=None):
    """Extrapolate b(r) from pole values of cos tau to r -> 0.

    b0 comes from a straight-line fit in r over the smallest decade of radii.
    The series must be Cauchy there: successive differences below
    ``cauchy_tol`` (default ``tolerance``), else NonCauchyError.
    With both orientation signs given the target is -epsilon epsilon1 / (2e);
    otherwise the verdict only checks |b0| against 1/(2|e|).
    """
    e = constants.e
    r = np.asarray(r, dtype=float)
    order = np.argsort(r)
    r, tau = r[order], np.asarray(tau, dtype=float)[order]
    b = pole_magnetic_charge(theta, tau, e)
    small = r <= 10 * r[0] * (1 + 1e-12)
    if np.count_nonzero(small) < 3:
        raise DataError("need at least three radii in the smallest decade")
    rs, bs = r[small], b[small]
    cauchy_tol = tolerance if cauchy_tol is None else cauchy_tol
    steps = np.abs(np.diff(bs))
    if not np.all(steps <= cauchy_tol):
        raise NonCauchyError(f"b(r) does not settle: max step {np.max(steps):.3e}")
    slope, b0 = np.polyfit(rs, bs, 1)
    target = 1 / (2 * abs(e))
    if epsilon is not None and epsilon1 is not None:
        expected = -epsilon * epsilon1 / (2 * e)
        dist = abs(b0 - expected)
    else:
        expected = None
        dist = abs(abs(b0) - target)
    verdict = "PASS" if dist < tolerance else "FAIL"
    return MonopoleLimit(FluxSeries(r, b, "magnetic"), float(b0), expected, float(dist),
                         verdict, float(np.ptp(bs)))


def coulomb_sign(r, theta, chi):
    """epsilon1: sign of r d_r chi on the innermost shell (must not change with theta)."""
    gr, _ = _chi_gradient(r, theta, chi)
    i = int(np.argmin(r))
    s = np.sign(gr[i])
    if not (np.all(s == s[0]) and s[0] != 0):
        raise DataError("r d_r chi changes sign on the innermost shell")
    return int(s[0])


# ---------------------------------------------------------------------------
# boundedness and stationarity

@dataclass
class BoundednessReport:
    sup_P: float
    sup_P_exact: float
    sup_H: float
    sup_K: float

    def lines(self):
        return [f"sup_P={self.sup_P:.6e}", f"sup_P_exact={self.sup_P_exact:.6e}",
                f"sup_hypothesis={self.sup_H:.6e}", f"sup_K={self.sup_K:.6e}"]


def boundedness_check_P(grid: StaticFieldGrid, annulus=None):
    """Sup over an annulus of P, of the hypothesis term H = r d_r tau - d_theta R / R,
    and of K = d_theta tau - 2 + r d_r R / R.

    P = H cos(tau - theta) - K sin(tau - theta). ``sup_P_exact`` uses the bracket
    that reproduces r sin(theta) A_phi = (cos tau - P sin theta) / (2e) exactly:
    H cos(tau - theta) + (d_theta tau + r d_r R / R) sin(tau - theta).
    """
    check_axis(grid.r, "r")
    check_axis(grid.theta, "theta")
    R = _require_positive(grid.R)
    rr, th = grid.mesh()
    tau = _effective_tau(grid)
    tr = np.gradient(tau, grid.r, axis=0, edge_order=2)
    tt = np.gradient(tau, grid.theta, axis=1, edge_order=2)
    Rr = np.gradient(R, grid.r, axis=0, edge_order=2)
    Rt = np.gradient(R, grid.theta, axis=1, edge_order=2)
    H = rr * tr - Rt / R
    K = tt - 2 + rr * Rr / R
    c, s = np.cos(tau - th), np.sin(tau - th)
    P = H * c - K * s
    Pex = H * c + (tt + rr * Rr / R) * s
    sel = np.ones(grid.r.size, bool)
    if annulus is not None:
        sel = (grid.r >= annulus[0] * (1 - 1e-12)) & (grid.r <= annulus[1] * (1 + 1e-12))
    if not np.any(sel):
        raise MeshError("annulus contains no radial nodes")
    sup = lambda a: float(np.max(np.abs(a[sel])))
    return BoundednessReport(sup(P), sup(Pex), sup(H), sup(K))


@dataclass
class StationarityReport:
    verdict: str
    max_deviation: float

    def lines(self):
        return [f"stationarity={self.verdict}", f"eta_phi_deviation={self.max_deviation:.3e}"]


def stationarity_check_axisym(eta, phi, tol=1e-9):
    """PASS iff eta - phi is a multiple of pi everywhere (within ``tol``)."""
    d = np.mod(np.asarray(eta, dtype=float) - np.asarray(phi, dtype=float), np.pi)
    dev = float(np.max(np.minimum(d, np.pi - d))) if d.size else 0.0
    return StationarityReport("PASS" if dev <= tol else "FAIL", dev)


# ---------------------------------------------------------------------------
# multi-monopole ledger

@dataclass
class MonopoleLedger:
    eps_i: list
    eps: int = 1

    def __post_init__(self):
        self.eps_i = [int(s) for s in self.eps_i]
        if any(s not in (1, -1) for s in self.eps_i) or self.eps not in (1, -1):
            raise DataError("signs must be +1 or -1")

    @classmethod
    def parse(cls, text, eps=1):
        """From a comma list such as ``+,+,-`` or ``1,-1``."""
        table = {"+": 1, "-": -1, "+1": 1, "-1": -1, "1": 1}
        items = [t.strip() for t in text.split(",") if t.strip()]
        if not items or any(t not in table for t in items):
            raise DataError(f"bad sign list {text!r}")
        return cls([table[t] for t in items], eps)


@dataclass
class LedgerResult:
    n: int
    sign_sum: int
    b_total: float
    feasible: bool
    parity: str

    def lines(self):
        return [f"ledger_total={self.b_total:.12g}", f"feasible={str(self.feasible).lower()}",
                f"n_charges={self.n}", f"sign_sum={self.sign_sum}", f"parity={self.parity}"]


def monopole_ledger(ledger: MonopoleLedger, e=1.0):
    """b_total = -(eps / 2e) sum eps_i; feasible iff |sum eps_i| <= 1."""
    total = sum(ledger.eps_i)
    n = len(ledger.eps_i)
    b_total = -ledger.eps * total / (2 * e) + 0.0
    parity = "even:sum=0" if n % 2 == 0 else "odd:sum=+-1"
    return LedgerResult(n, total, b_total, abs(total) <= 1, parity)


def ledger_brute_force(n_max=12, e=1.0, eps=1):
    """Enumerate every sign vector with 1 <= N <= n_max.

    Returns ``(n_vectors, n_violations)``; a violation is a vector whose
    feasibility differs from |sum| <= 1, or a feasible one whose total is not
    in {0, +-1/(2e)}.
    """
    allowed = np.array([0.0, 1 / (2 * e), -1 / (2 * e)])
    count = bad = 0
    for n in range(1, n_max + 1):
        codes = np.arange(2**n)[:, None]
        signs = 1 - 2 * ((codes >> np.arange(n)) & 1)
        sums = signs.sum(axis=1)
        totals = -eps * sums / (2 * e)
        feasible = np.abs(sums) <= 1
        ok_total = np.any(np.isclose(totals[:, None], allowed[None, :], rtol=0, atol=1e-15), axis=1)
        bad += int(np.count_nonzero(feasible & ~ok_total))
        # spot-check the scalar routine against the vectorized rule
        for row in signs[:: max(1, 2**n // 64)]:
            res = monopole_ledger(MonopoleLedger(row.tolist(), eps), e)
            bad += int(res.feasible != (abs(row.sum()) <= 1))
        count += 2**n
    return count, bad


# ---------------------------------------------------------------------------
# reports

@dataclass
class ChargeReport:
    electric_Q: float | None = None
    magnetic_b: float | None = None
    coulomb_q: float | None = None
    quantization_verdict: str | None = None
    ledger_total: float | None = None
    extra: dict = field(default_factory=dict)

    KEYS = ("electric_Q", "magnetic_b", "coulomb_q", "quantization_verdict", "ledger_total")

    def lines(self):
        out = []
        for k in self.KEYS:
            v = getattr(self, k)
            out.append(f"{k}={'na' if v is None else (v if isinstance(v, str) else f'{v:.12g}')}")
        if self.electric_Q is not None:
            out.append(f"physical_charge={-self.electric_Q:.12g}")
        out += [f"{k}={v}" for k, v in self.extra.items()]
        return out


def axisym_divergence(r, theta, R, R_r, R_theta, tau, tau_r, tau_theta):
    """Pointwise div V for V = R (sin tau rho_hat + cos tau z_hat), closed form."""
    c, s = np.cos(tau - theta), np.sin(tau - theta)
    radial = 2 * R * c / r + R_r * c - R * s * tau_r
    polar = (R * s / np.tan(theta) + R_theta * s + R * c * (tau_theta - 1)) / r
    return radial + polar

