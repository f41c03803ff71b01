"""Meshes, field containers, finite differences and the CSV file formats.

All (r, theta) arrays are indexed ``[i_r, i_theta]``. Theta nodes live in the
open interval (0, pi); pole values are obtained by extrapolation where needed.
"""
from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, DegeneracyError, MeshError

DEFAULT_THETA_MIN = 1e-3


@dataclass(frozen=True)
class PhysicalConstants:
    """Mass ``m`` (inverse length, c = hbar = 1) and charge coupling ``e``."""

    m: float = 1.0
    e: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.m) or self.m <= 0:
            raise DataError(f"mass must be positive, got m={self.m}")
        if not np.isfinite(self.e) or self.e == 0:
            raise DataError(f"charge coupling must be nonzero, got e={self.e}")


# ---------------------------------------------------------------------------
# mesh helpers

def geometric_nodes(r0, r1, n):
    return np.geomspace(r0, r1, n)


def uniform_theta(n, theta_min=DEFAULT_THETA_MIN):
    return np.linspace(theta_min, np.pi - theta_min, n)


def gauss_theta(n):
    """Gauss-Legendre nodes in cos(theta), returned as increasing theta.

    Returns ``(theta, w)`` with ``sum(w * g(theta)) ~ int_0^pi g sin(theta) dtheta``.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    # leggauss gives increasing x = cos(theta); reverse for increasing theta
    return np.arccos(x[::-1]), w[::-1].copy()


def check_axis(nodes, name, min_nodes=3):
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < min_nodes:
        raise MeshError(f"{name} needs at least {min_nodes} nodes")
    if not np.all(np.diff(nodes) > 0):
        raise MeshError(f"{name} nodes must be strictly increasing")
    return nodes


def d_dr(f, r):
    """Second-order derivative along axis 0 (central inside, one-sided at edges)."""
    r = check_axis(r, "r")
    return np.gradient(f, r, axis=0, edge_order=2)


def d_dtheta(f, theta):
    theta = check_axis(theta, "theta")
    return np.gradient(f, theta, axis=1, edge_order=2)


def d_du(f, u, axis=0):
    """Derivative on a (possibly non-uniform, possibly decreasing) 1-D axis.

    Three-point Lagrange stencils; exact for quadratics in ``u``.
    """
    u = np.asarray(u, dtype=float)
    if u.size < 3:
        raise MeshError("need at least three nodes for a derivative")
    if u[0] > u[-1]:
        return np.flip(d_du(np.flip(f, axis=axis), u[::-1], axis=axis), axis=axis)
    f = np.asarray(f, dtype=float)
    # differencing against a reference keeps constants exactly zero
    ref = np.take(f, [0], axis=axis)
    return np.gradient(f - ref, u, axis=axis, edge_order=2)


def pole_extrapolate(theta, values, pole, shift=0):
    """Quadratic extrapolation to a pole in the variable cos(theta).

    ``pole`` is ``"north"`` (theta = 0) or ``"south"`` (theta = pi). Uses the
    three nodes nearest the pole, or the next three when ``shift=1``.
    Smooth axisymmetric functions are smooth in cos(theta), so the stencil is
    exact for anything quadratic in cos(theta).
    ``values`` may carry leading axes; theta is the last axis.
    """
    theta = np.asarray(theta, dtype=float)
    values = np.asarray(values, dtype=float)
    if theta.size < 3 + shift:
        raise MeshError("pole extrapolation needs at least three theta nodes")
    if pole == "north":
        idx = np.arange(shift, shift + 3)
        x0 = 1.0
    elif pole == "south":
        idx = np.arange(theta.size - 1 - shift, theta.size - 4 - shift, -1)
        x0 = -1.0
    else:
        raise ValueError(f"unknown pole {pole!r}")
    x = np.cos(theta[idx])
    y = values[..., idx]
    # Lagrange basis evaluated at x0
    l0 = (x0 - x[1]) * (x0 - x[2]) / ((x[0] - x[1]) * (x[0] - x[2]))
    l1 = (x0 - x[0]) * (x0 - x[2]) / ((x[1] - x[0]) * (x[1] - x[2]))
    l2 = (x0 - x[0]) * (x0 - x[1]) / ((x[2] - x[0]) * (x[2] - x[1]))
    return l0 * y[..., 0] + l1 * y[..., 1] + l2 * y[..., 2]


def theta_integral(theta, values):
    """Integral of ``values * sin(theta)`` over [0, pi] for values on the last axis.

    Uses Gauss-Legendre weights when ``theta`` are Gauss nodes, otherwise a
    trapezoid rule in cos(theta) closed with pole-extrapolated endpoints.
    """
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    tg, w = gauss_theta(n)
    if np.allclose(theta, tg, rtol=0, atol=1e-12):
        return np.tensordot(values, w, axes=([-1], [0]))
    north = pole_extrapolate(theta, values, "north")
    south = pole_extrapolate(theta, values, "south")
    x = np.concatenate(([1.0], np.cos(theta), [-1.0]))
    y = np.concatenate((north[..., None], values, south[..., None]), axis=-1)
    return -np.trapezoid(y, x, axis=-1)


# ---------------------------------------------------------------------------
# containers

@dataclass(frozen=True)
class SpinorPoint:
    """Static spinor data at one point: R > 0, tau in [0, pi], chi, eta."""

    R: float
    tau: float
    chi: float
    eta: float

    @property
    def X(self):
        return np.sqrt(self.R) * np.cos(self.tau / 2)

    @property
    def Y(self):
        return np.sqrt(self.R) * np.sin(self.tau / 2)


def _field(shape, values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = np.full(shape, float(arr))
    if arr.shape != shape:
        raise MeshError(f"{name} has shape {arr.shape}, expected {shape}")
    return arr


@dataclass
class StaticFieldGrid:
    """Samples of (R, tau, chi, eta) on the phi = 0 meridian of an (r, theta) mesh.

    ``eta`` holds eta - phi (the two agree on phi = 0); axial symmetry means
    this difference is independent of phi.
    """

    r: np.ndarray
    theta: np.ndarray
    R: np.ndarray
    tau: np.ndarray
    chi: np.ndarray
    eta: np.ndarray
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        self.r = check_axis(self.r, "r", min_nodes=1)
        self.theta = check_axis(self.theta, "theta", min_nodes=1)
        if self.r[0] <= 0:
            raise MeshError("radial nodes must be positive")
        if self.theta[0] <= 0 or self.theta[-1] >= np.pi:
            raise MeshError("theta nodes must exclude the poles")
        shape = (self.r.size, self.theta.size)
        self.R = _field(shape, self.R, "R")
        self.tau = _field(shape, self.tau, "tau")
        self.chi = _field(shape, self.chi, "chi")
        self.eta = _field(shape, self.eta, "eta")
        if not np.all(self.R > 0):
            raise DegeneracyError("R must be strictly positive on the whole grid")

    @property
    def shape(self):
        return (self.r.size, self.theta.size)

    def mesh(self):
        return np.meshgrid(self.r, self.theta, indexing="ij")

    def point(self, i, j):
        return SpinorPoint(self.R[i, j], self.tau[i, j], self.chi[i, j], self.eta[i, j])

    @classmethod
    def from_functions(cls, r, theta, R, tau, chi, eta=0.0, constants=None):
        """Sample callables ``f(r, theta)`` (or constants) on the mesh."""
        rr, tt = np.meshgrid(np.asarray(r, float), np.asarray(theta, float), indexing="ij")

        def ev(f):
            return np.broadcast_to(f(rr, tt) if callable(f) else f, rr.shape).astype(float)

        return cls(r, theta, ev(R), ev(tau), ev(chi), ev(eta), constants or PhysicalConstants())


@dataclass
class AxiPotentialGrid:
    """Scalar potential A0 and azimuthal component A_phi on an (r, theta) mesh."""

    r: np.ndarray
    theta: np.ndarray
    A0: np.ndarray
    Aphi: np.ndarray
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        self.r = check_axis(self.r, "r", min_nodes=1)
        self.theta = check_axis(self.theta, "theta", min_nodes=1)
        if self.r[0] <= 0:
            raise MeshError("radial nodes must be positive")
        if self.theta[0] <= 0 or self.theta[-1] >= np.pi:
            raise MeshError("theta nodes must exclude the poles")
        shape = (self.r.size, self.theta.size)
        self.A0 = _field(shape, self.A0, "A0")
        self.Aphi = _field(shape, self.Aphi, "Aphi")

    @classmethod
    def from_functions(cls, r, theta, A0=0.0, Aphi=0.0, constants=None):
        rr, tt = np.meshgrid(np.asarray(r, float), np.asarray(theta, float), indexing="ij")

        def ev(f):
            return np.broadcast_to(f(rr, tt) if callable(f) else f, rr.shape).astype(float)

        return cls(r, theta, ev(A0), ev(Aphi), constants or PhysicalConstants())


# ---------------------------------------------------------------------------
# CSV formats

_HEADER = re.compile(r"^#\s*(staticmd-[a-z]+)\s+v(\d+)\s*((?:,\s*\w+=[^,]+)*)\s*$")


def fmt(x):
    """Shortest text that round-trips a double exactly."""
    return repr(float(x))


def format_header(kind, **params):
    items = "".join(f", {k}={fmt(v) if isinstance(v, float) else v}" for k, v in params.items())
    return f"# staticmd-{kind} v1{items}"


def parse_header(line):
    """Return ``(kind, params)`` from a ``# staticmd-<kind> v1, k=v, ...`` line."""
    mt = _HEADER.match(line.strip())
    if not mt:
        raise DataError(f"not a staticmd header: {line.strip()!r}")
    kind = mt.group(1).split("-", 1)[1]
    params = {}
    for item in mt.group(3).split(","):
        item = item.strip()
        if item:
            k, v = item.split("=", 1)
            params[k.strip()] = v.strip()
    return kind, params


def _read_table(path, columns):
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise DataError(f"{path}: empty file")
    kind, params = parse_header(lines[0])
    body = [ln for ln in lines[1:] if ln.strip() and not ln.startswith("#")]
    if not body or [c.strip() for c in body[0].split(",")] != columns:
        raise DataError(f"{path}: expected column line {','.join(columns)}")
    if len(body) < 2:
        raise DataError(f"{path}: no data rows")
    try:
        data = np.loadtxt(io.StringIO("\n".join(body[1:])), delimiter=",", ndmin=2)
    except ValueError as exc:
        raise DataError(f"{path}: malformed numeric data ({exc})") from None
    if data.shape[1] != len(columns) or data.shape[0] == 0:
        raise DataError(f"{path}: expected {len(columns)} columns")
    return kind, params, data


def _constants(params, path):
    try:
        return PhysicalConstants(float(params["m"]), float(params["e"]))
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: header needs numeric m and e ({exc})") from None


def _mesh_from_rows(r_col, t_col, path):
    r = np.unique(r_col)
    theta = np.unique(t_col)
    if r.size * theta.size != r_col.size:
        raise DataError(f"{path}: rows do not form a complete (r, theta) mesh")
    rr, tt = np.meshgrid(r, theta, indexing="ij")
    if not (np.array_equal(rr.ravel(), r_col) and np.array_equal(tt.ravel(), t_col)):
        raise DataError(f"{path}: rows must be in r-outer, theta-inner order")
    return r, theta


def write_grid(path, grid):
    rr, tt = grid.mesh()
    lines = [format_header("grid", m=grid.constants.m, e=grid.constants.e), "r,theta,R,tau,chi,eta"]
    for row in zip(rr.ravel(), tt.ravel(), grid.R.ravel(), grid.tau.ravel(),
                   grid.chi.ravel(), grid.eta.ravel()):
        lines.append(",".join(fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid(path):
    kind, params, data = _read_table(path, ["r", "theta", "R", "tau", "chi", "eta"])
    if kind != "grid":
        raise DataError(f"{path}: expected staticmd-grid, found staticmd-{kind}")
    r, theta = _mesh_from_rows(data[:, 0], data[:, 1], path)
    shape = (r.size, theta.size)
    cols = [data[:, k].reshape(shape) for k in range(2, 6)]
    return StaticFieldGrid(r, theta, *cols, constants=_constants(params, path))


def write_axipot(path, grid):
    rr, tt = np.meshgrid(grid.r, grid.theta, indexing="ij")
    lines = [format_header("axipot", m=grid.constants.m, e=grid.constants.e), "r,theta,A0,Aphi"]
    for row in zip(rr.ravel(), tt.ravel(), grid.A0.ravel(), grid.Aphi.ravel()):
        lines.append(",".join(fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_axipot(path):
    kind, params, data = _read_table(path, ["r", "theta", "A0", "Aphi"])
    if kind != "axipot":
        raise DataError(f"{path}: expected staticmd-axipot, found staticmd-{kind}")
    r, theta = _mesh_from_rows(data[:, 0], data[:, 1], path)
    shape = (r.size, theta.size)
    return AxiPotentialGrid(r, theta, data[:, 2].reshape(shape), data[:, 3].reshape(shape),
                            constants=_constants(params, path))


def write_samples(path, r, values):
    """Radial-sample file: plain ``r,value`` rows under a column line."""
    lines = ["r,value"] + [f"{fmt(a)},{fmt(b)}" for a, b in zip(r, values)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_samples(path):
    lines = [ln for ln in Path(path).read_text().splitlines()
             if ln.strip() and not ln.startswith("#")]
    if lines and lines[0].replace(" ", "") == "r,value":
        lines = lines[1:]
    if not lines:
        raise DataError(f"{path}: no r,value rows")
    try:
        data = np.loadtxt(io.StringIO("\n".join(lines)), delimiter=",", ndmin=2)
    except ValueError as exc:
        raise DataError(f"{path}: malformed r,value rows ({exc})") from None
    if data.shape[0] == 0 or data.shape[1] != 2:
        raise DataError(f"{path}: expected r,value rows")
    order = np.argsort(data[:, 0], kind="stable")
    return data[order, 0], data[order, 1]
