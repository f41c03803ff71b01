"""Spinor parameterization of static Maxwell-Dirac fields.

Conventions: signature (+, -, -, -); ``sigma^a_{AA'} = (1, pauli_x, pauli_y,
pauli_z) / sqrt(2)`` so that a null vector built from u^A has time component
(|u^0|^2 + |u^1|^2) / sqrt(2). Spinor indices are raised with
``xi^A = eps^{AB} xi_B``, ``eps^{01} = 1``.

Vector fields on a :class:`~staticmd.grids.StaticFieldGrid` are returned in
the spherical basis (r, theta, phi) of the phi = 0 meridian.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, MeshError, NormalizationError
from .grids import SpinorPoint, StaticFieldGrid, check_axis, d_dr, d_dtheta

SIGMA = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex) / np.sqrt(2)

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])


@dataclass
class Dyad:
    """Spinor dyad: ``o`` carries a lower index (o_A), ``iota`` an upper one (iota^A).

    Components live on the last axis (length 2); leading axes broadcast.
    """

    o: np.ndarray
    iota: np.ndarray

    def contraction(self):
        """iota^C o_C."""
        return np.sum(self.iota * self.o, axis=-1)


@dataclass
class NullTetrad:
    l: np.ndarray
    n: np.ndarray
    m: np.ndarray

    @property
    def mbar(self):
        return np.conj(self.m)


def minkowski(u, v):
    """Bilinear Minkowski product over the last axis (no conjugation)."""
    return u[..., 0] * v[..., 0] - np.sum(u[..., 1:] * v[..., 1:], axis=-1)


def raise_index(xi):
    """xi^A from xi_A: (xi^0, xi^1) = (xi_1, -xi_0)."""
    xi = np.asarray(xi)
    return np.stack([xi[..., 1], -xi[..., 0]], axis=-1)


def lower_index(xi):
    """xi_A from xi^A: (xi_0, xi_1) = (-xi^1, xi^0)."""
    xi = np.asarray(xi)
    return np.stack([-xi[..., 1], xi[..., 0]], axis=-1)


def spinor_vector(a, b):
    """sigma^alpha_{AA'} a^A conj(b^A') for upper-index spinors a, b."""
    return np.einsum("kij,...i,...j->...k", SIGMA, a, np.conj(b))


def dyad_from_angles(tau, eta):
    tau = np.asarray(tau, dtype=float)
    eta = np.asarray(eta, dtype=float)
    s, c = np.sin(tau / 2), np.cos(tau / 2)
    ph = np.exp(0.5j * eta)
    o = np.stack([s * np.conj(ph), -c * ph], axis=-1)
    iota = np.stack([s * ph, -c * np.conj(ph)], axis=-1)
    return Dyad(o, iota)


def null_tetrad(dyad, tol=1e-10):
    """Null tetrad (l, n, m) from a normalized dyad.

    Raises NormalizationError if ``|iota^C o_C - 1| > tol`` anywhere.
    """
    dev = np.max(np.abs(dyad.contraction() - 1.0))
    if not dev <= tol:
        raise NormalizationError(f"|iota^C o_C - 1| = {dev:.3e} exceeds {tol:.1e}")
    o_up = raise_index(dyad.o)
    iota_up = np.asarray(dyad.iota)
    l = spinor_vector(o_up, o_up).real
    n = spinor_vector(iota_up, iota_up).real
    m = spinor_vector(o_up, iota_up)
    return NullTetrad(l, n, m)


def _require_positive(R):
    R = np.asarray(R, dtype=float)
    if not np.all(R > 0):
        raise DegeneracyError("R must be strictly positive")
    return R


def current(point: SpinorPoint):
    """Dirac current j^alpha = R (l^alpha + n^alpha) for a static point."""
    R = _require_positive(point.R)
    tet = null_tetrad(dyad_from_angles(point.tau, point.eta))
    return R[..., None] * (tet.l + tet.n)


def v_field(point: SpinorPoint):
    """Cartesian V = R (sin tau cos eta, sin tau sin eta, cos tau)."""
    R = _require_positive(point.R)
    tau, eta = np.asarray(point.tau), np.asarray(point.eta)
    vhat = np.stack([np.sin(tau) * np.cos(eta), np.sin(tau) * np.sin(eta), np.cos(tau)], axis=-1)
    return R[..., None] * vhat


# ---------------------------------------------------------------------------
# grid operators

def _check_grid(grid):
    check_axis(grid.r, "r")
    check_axis(grid.theta, "theta")
    _require_positive(grid.R)


def v_spherical(grid: StaticFieldGrid):
    """(V_r, V_theta, V_phi) on the phi = 0 meridian."""
    _, th = grid.mesh()
    R, tau, psi = grid.R, grid.tau, grid.eta
    vrho = R * np.sin(tau) * np.cos(psi)
    vz = R * np.cos(tau)
    vr = vrho * np.sin(th) + vz * np.cos(th)
    vt = vrho * np.cos(th) - vz * np.sin(th)
    vp = R * np.sin(tau) * np.sin(psi)
    return vr, vt, vp


def _grad(f, grid):
    rr, _ = grid.mesh()
    return d_dr(f, grid.r), d_dtheta(f, grid.theta) / rr


def divergence(vr, vt, grid):
    rr, th = grid.mesh()
    return (d_dr(rr**2 * vr, grid.r) / rr**2
            + d_dtheta(np.sin(th) * vt, grid.theta) / (rr * np.sin(th)))


def curl(vr, vt, vp, grid):
    rr, th = grid.mesh()
    cr = d_dtheta(np.sin(th) * vp, grid.theta) / (rr * np.sin(th))
    ct = -d_dr(rr * vp, grid.r) / rr
    cp = (d_dr(rr * vt, grid.r) - d_dtheta(vr, grid.theta)) / rr
    return cr, ct, cp


def potential_static(grid: StaticFieldGrid):
    """Static potential from spinor data.

    Returns ``(A0, (A_r, A_theta, A_phi))`` with
    ``A0 = (m/e) cos chi + grad(chi).V / (2 e R)`` and
    ``A = [(X^2 - Y^2) grad(eta) - curl V] / (2 e R)``.
    """
    _check_grid(grid)
    m, e = grid.constants.m, grid.constants.e
    rr, th = grid.mesh()
    vr, vt, vp = v_spherical(grid)
    gr, gt = _grad(grid.chi, grid)
    A0 = (m / e) * np.cos(grid.chi) + (gr * vr + gt * vt) / (2 * e * grid.R)

    er, et = _grad(grid.eta, grid)
    ep = 1.0 / (rr * np.sin(th))
    cr, ct, cp = curl(vr, vt, vp, grid)
    xy = grid.R * np.cos(grid.tau)
    pref = 1.0 / (2 * e * grid.R)
    A = (pref * (xy * er - cr), pref * (xy * et - ct), pref * (xy * ep - cp))
    return A0, A


def mesh_l2(f, r, theta):
    """Volume-weighted RMS of ``f`` over the (r, theta) mesh (trapezoid weights)."""
    r = np.asarray(r, float)
    theta = np.asarray(theta, float)
    wr = np.gradient(r) * r**2
    wt = np.gradient(theta) * np.sin(theta)
    w = np.outer(wr, wt)
    return float(np.sqrt(np.sum(w * np.abs(f) ** 2) / np.sum(w)))


@dataclass
class RealityReport:
    div_residual: np.ndarray
    cross_residual: tuple
    div_l2: float
    cross_l2: float
    eps_sign: int
    eps_constant: bool

    def lines(self):
        return [
            f"div_residual_l2={self.div_l2:.6e}",
            f"cross_residual_l2={self.cross_l2:.6e}",
            f"eps_sign={self.eps_sign:+d}",
            f"eps_constant={str(self.eps_constant).lower()}",
        ]


def reality_residuals(grid: StaticFieldGrid, interior=0):
    """Residuals of div V + 2 m R sin chi and grad(chi) x V.

    ``interior`` trims that many nodes from every mesh edge before the norms
    are taken (pointwise arrays are always full size).
    """
    _check_grid(grid)
    m = grid.constants.m
    vr, vt, vp = v_spherical(grid)
    div_res = divergence(vr, vt, grid) + 2 * m * grid.R * np.sin(grid.chi)
    gr, gt = _grad(grid.chi, grid)
    cross = (gt * vp, -gr * vp, gr * vt - gt * vr)

    sl = (slice(interior, grid.r.size - interior), slice(interior, grid.theta.size - interior))
    if grid.r[sl[0]].size == 0 or grid.theta[sl[1]].size == 0:
        raise MeshError("interior trim removes the whole mesh")
    cross_mag = np.sqrt(sum(c**2 for c in cross))
    div_l2 = mesh_l2(div_res[sl], grid.r[sl[0]], grid.theta[sl[1]])
    cross_l2 = mesh_l2(cross_mag[sl], grid.r[sl[0]], grid.theta[sl[1]])

    eps, const = orientation_sign(grid)
    return RealityReport(div_res, cross, div_l2, cross_l2, eps, const)


def orientation_sign(grid: StaticFieldGrid):
    """Sign of gamma in V = gamma grad(chi), and whether it is constant on the mesh."""
    vr, vt, _ = v_spherical(grid)
    gr, gt = _grad(grid.chi, grid)
    dot = gr * vr + gt * vt
    gmag = np.hypot(gr, gt)
    scale = np.max(np.abs(grid.chi)) + 1.0
    live = gmag > 1e-12 * scale
    if not np.any(live):
        return 0, True
    mean = float(np.mean(dot[live]))
    eps = 1 if mean > 0 else -1 if mean < 0 else 0
    signs = np.sign(dot[live])
    return eps, bool(np.all(signs == signs[0]) and signs[0] != 0)


def spherical_to_cartesian(theta, ar, at, ap):
    """Spherical components on the phi = 0 meridian to Cartesian (x, y, z)."""
    return (ar * np.sin(theta) + at * np.cos(theta), ap, ar * np.cos(theta) - at * np.sin(theta))


def tetrad_potential_components(A, tetrad: NullTetrad):
    """(A_l, A_n, A_m, A_mbar) by direct contraction with a real 4-potential ``A^alpha``."""
    A = np.asarray(A)
    A_l = minkowski(tetrad.l, A)
    A_n = minkowski(tetrad.n, A)
    A_m = minkowski(tetrad.m, A)
    return A_l, A_n, A_m, minkowski(tetrad.mbar, A)


def grid_tetrad_potential(grid: StaticFieldGrid):
    """Tetrad components of the static potential at every grid node."""
    A0, (ar, at, ap) = potential_static(grid)
    _, th = grid.mesh()
    ax, ay, az = spherical_to_cartesian(th, ar, at, ap)
    A = np.stack([A0, ax, ay, az], axis=-1)
    tet = null_tetrad(dyad_from_angles(grid.tau, grid.eta))
    return tetrad_potential_components(A, tet)
