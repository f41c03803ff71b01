"""Weighted Lebesgue/Sobolev norms on exterior domains r >= rho in three dimensions.

    ||f||_{p,delta}   = ( int |f|^p sigma^(-p delta - 3) dx )^(1/p)
    ||f||_{inf,delta} = sup sigma^(-delta) |f|
    ||f||_{k,p,delta} = sum_{j<=k} ||D^j f||_{p,delta-j}

Fields are sampled on an :class:`ExteriorDomain`: either radial profiles
(shape ``(nr,)``, angular integral 4 pi) or axisymmetric samples (shape
``(nr, ntheta)`` on Gauss-Legendre theta nodes, phi integral 2 pi).
The radial integral is Simpson's rule in ln r on geometric nodes; the part
beyond ``r_max`` is integrated analytically for a power law whose exponent is
fitted on the outer half of the integrand and whose amplitude matches the
last sample.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .errors import (CaseError, DataError, DegenerateFitError, HypothesisError,
                     QuadratureError)
from .grids import gauss_theta

N_DIM = 3


@dataclass
class ExteriorDomain:
    """Truncated exterior domain rho <= r <= r_max with its sampling mesh."""

    rho: float
    r_max: float
    r: np.ndarray
    theta: np.ndarray | None = None

    def __post_init__(self):
        if not (0 < self.rho < self.r_max):
            raise DataError("need 0 < rho < r_max")
        self.r = np.asarray(self.r, dtype=float)
        if self.r.ndim != 1 or self.r.size < 3 or not np.all(np.diff(self.r) > 0):
            raise DataError("radial nodes must be strictly increasing")
        if (not math.isclose(self.r[0], self.rho, rel_tol=1e-12)
                or not math.isclose(self.r[-1], self.r_max, rel_tol=1e-12)):
            raise DataError("radial nodes must span [rho, r_max]")
        if self.theta is not None:
            self.theta = np.asarray(self.theta, dtype=float)
            _, self._wtheta = gauss_theta(self.theta.size)
            if not np.allclose(self.theta, gauss_theta(self.theta.size)[0], atol=1e-12):
                raise DataError("theta nodes must be Gauss-Legendre nodes (see gauss_theta)")

    @classmethod
    def geometric(cls, rho=1.0, r_max=100.0, per_decade=64, n_theta=None):
        n = max(3, int(math.ceil(per_decade * math.log10(r_max / rho))) + 1)
        theta = None if n_theta is None else gauss_theta(n_theta)[0]
        return cls(rho, r_max, np.geomspace(rho, r_max, n), theta)

    @property
    def shape(self):
        return (self.r.size,) if self.theta is None else (self.r.size, self.theta.size)

    def sample(self, func):
        """Evaluate ``func(r)`` or ``func(r, theta)`` on the mesh."""
        if self.theta is None:
            return np.asarray(func(self.r), dtype=float) * np.ones(self.shape)
        rr, tt = np.meshgrid(self.r, self.theta, indexing="ij")
        return np.asarray(func(rr, tt), dtype=float) * np.ones(self.shape)

    def angular(self, values):
        """Integral over the unit sphere at each radius."""
        if self.theta is None:
            return 4 * math.pi * values
        return 2 * math.pi * values @ self._wtheta

    def nodes_per_decade(self):
        return (self.r.size - 1) / math.log10(self.r_max / self.rho)


@dataclass(frozen=True)
class WeightedNormSpec:
    k: int = 0
    p: float = 2.0
    delta: float = 0.0
    sigma: str = "r"

    def __post_init__(self):
        if not (0 <= self.k <= 3) or int(self.k) != self.k:
            raise DataError("derivative order k must be an integer in 0..3")
        if not (self.p >= 1):
            raise DataError("p must lie in [1, inf]")
        if self.sigma not in ("r", "sqrt1r2"):
            raise DataError("sigma must be 'r' or 'sqrt1r2'")

    def shifted(self, j):
        return WeightedNormSpec(0, self.p, self.delta - j, self.sigma)


def sigma_weight(r, choice):
    r = np.asarray(r, dtype=float)
    return r if choice == "r" else np.sqrt(1.0 + r * r)


@dataclass
class NormResult:
    value: float
    truncated: float
    tail: float
    tail_exponent: float | None = None

    def __float__(self):
        return float(self.value)


@dataclass
class DecayFit:
    delta: float
    band: float
    intercept: float
    n_samples: int

    @property
    def interval(self):
        return self.delta - self.band, self.delta + self.band

    def lines(self):
        return [f"delta_hat={self.delta:.6f}", f"delta_band={self.band:.6f}",
                f"n_samples={self.n_samples}"]


def decay_exponent_fit(r, f, outer_fraction=0.5, min_samples=16, min_decades=1.5):
    """Slope of log|f| against log r over the outer part of the samples.

    Returns a :class:`DecayFit` whose ``band`` is two standard errors.
    Zero samples inside the window are skipped.
    """
    r = np.asarray(r, dtype=float)
    f = np.asarray(f, dtype=float)
    if r.shape != f.shape or r.ndim != 1:
        raise DataError("r and f must be 1-D arrays of equal length")
    order = np.argsort(r)
    r, f = r[order], f[order]
    if r.size < min_samples:
        raise DataError(f"need at least {min_samples} radial samples")
    if r[0] <= 0 or math.log10(r[-1] / r[0]) < min_decades - 1e-12:
        raise DataError(f"samples must span at least {min_decades} decades in r")
    start = int(math.floor(r.size * (1 - outer_fraction)))
    rw, fw = r[start:], np.abs(f[start:])
    live = (fw > 0) & np.isfinite(fw)
    if np.count_nonzero(live) < 3:
        raise DegenerateFitError("f vanishes on the fit window")
    x, y = np.log(rw[live]), np.log(fw[live])
    if np.ptp(y) == 0.0:
        return DecayFit(0.0, 0.0, float(y[0]), int(x.size))
    fit = stats.linregress(x, y)
    return DecayFit(float(fit.slope), 2.0 * float(fit.stderr), float(fit.intercept), int(x.size))


def _check_mesh(domain):
    if domain.nodes_per_decade() < 4:
        raise QuadratureError("fewer than 4 radial nodes per decade")


def weighted_lp_norm(f, domain: ExteriorDomain, spec: WeightedNormSpec):
    """Weighted L^p norm (derivative order of ``spec`` is ignored)."""
    _check_mesh(domain)
    f = np.asarray(f, dtype=float)
    if f.shape != domain.shape:
        raise DataError(f"field shape {f.shape} does not match mesh {domain.shape}")
    r = domain.r
    sig = sigma_weight(r, spec.sigma)
    p, delta = spec.p, spec.delta
    if math.isinf(p):
        prof = np.abs(f) if f.ndim == 1 else np.max(np.abs(f), axis=1)
        weighted = sig ** (-delta) * prof
        return NormResult(float(np.max(weighted)), float(np.max(weighted)), 0.0)
    ang = domain.angular(np.abs(f) ** p)
    # integrand per d(ln r)
    h = ang * r**3 * sig ** (-p * delta - N_DIM)
    truncated = float(integrate.simpson(h, x=np.log(r)))
    tail, expo = 0.0, None
    if h[-1] > 0:
        # exponent from the outer half, amplitude pinned to the last sample
        expo = decay_exponent_fit(r, h, min_samples=4, min_decades=0.0).delta
        tail = math.inf if expo >= 0 else float(h[-1]) / -expo
    total = truncated + tail
    return NormResult(total ** (1 / p), truncated ** (1 / p), tail, expo)


def _frame_derivatives(f, domain, j):
    """All order-j compositions of d/dr and (1/r) d/dtheta, stacked on axis 0."""
    dr = lambda g: np.gradient(g, domain.r, axis=0, edge_order=2)
    if domain.theta is None:
        out = f
        for _ in range(j):
            out = dr(out)
        return out[None]
    rr = domain.r[:, None]
    dt = lambda g: np.gradient(g, domain.theta, axis=1, edge_order=2) / rr
    terms = []
    for ops in itertools.product((dr, dt), repeat=j):
        g = f
        for op in ops:
            g = op(g)
        terms.append(g)
    return np.stack(terms)


def derivative_magnitude(f, domain, j):
    """|D^j f|: Euclidean norm over all order-j frame derivatives."""
    if j == 0:
        return np.asarray(f, dtype=float)
    d = _frame_derivatives(np.asarray(f, dtype=float), domain, j)
    return np.sqrt(np.sum(d * d, axis=0))


def weighted_sobolev_norm(f, domain: ExteriorDomain, spec: WeightedNormSpec):
    """sum_{j<=k} ||D^j f||_{p, delta - j}; returns the total as a float."""
    f = np.asarray(f, dtype=float)
    return float(sum(weighted_lp_norm(derivative_magnitude(f, domain, j), domain,
                                      spec.shifted(j)).value
                     for j in range(spec.k + 1)))


@dataclass
class RatioCheck:
    worst: float
    ratios: np.ndarray
    case: str

    def lines(self):
        return [f"case={self.case}", f"worst_ratio={self.worst:.6e}",
                f"members={self.ratios.size}"]


def sobolev_inequality_check(family, domain, k, p, delta, q=None, sigma="r"):
    """Worst ratio of the two sides of the weighted Sobolev inequality over ``family``.

    Case "ii" (3 - k p < 0): ||f||_{inf,delta} / ||f||_{k,p,delta}.
    Case "i"  (3 - k p > 0): ||f||_{3p/(3-kp),delta} / ||f||_{k,q,delta}
    with p <= q <= 3p/(3-p) (q defaults to p).
    """
    gap = N_DIM - k * p
    if gap < 0:
        case, lhs = "ii", WeightedNormSpec(0, math.inf, delta, sigma)
        rhs = WeightedNormSpec(k, p, delta, sigma)
    elif gap > 0:
        q = p if q is None else q
        q_max = N_DIM * p / (N_DIM - p) if N_DIM > p else math.inf
        if not (p <= q <= q_max):
            raise CaseError(f"q = {q} outside [{p}, {q_max}]")
        case, lhs = "i", WeightedNormSpec(0, N_DIM * p / gap, delta, sigma)
        rhs = WeightedNormSpec(k, q, delta, sigma)
    else:
        raise CaseError("3 - k p = 0 matches neither case of the inequality")
    ratios = []
    for f in family:
        f = np.asarray(f, dtype=float)
        den = weighted_sobolev_norm(f, domain, rhs)
        num = weighted_lp_norm(f, domain, lhs).value
        ratios.append(0.0 if num == 0 else num / den)
    ratios = np.array(ratios)
    return RatioCheck(float(np.max(ratios)) if ratios.size else 0.0, ratios, case)


def multiplication_bound_check(f, g, domain, first, second, target, sigma="r"):
    """||f g||_{k,2,delta} / (||f||_{k1,2,delta1} ||g||_{k2,2,delta2}).

    ``first = (k1, delta1)``, ``second = (k2, delta2)``, ``target = (k, delta)``.
    Requires k1, k2 >= k, k < k1 + k2 - 3/2 and delta > delta1 + delta2.
    """
    (k1, d1), (k2, d2), (k, d) = first, second, target
    if not (k1 >= k and k2 >= k):
        raise HypothesisError("need k1, k2 >= k")
    if not k < k1 + k2 - N_DIM / 2:
        raise HypothesisError("need k < k1 + k2 - 3/2")
    if not d > d1 + d2:
        raise HypothesisError("need delta > delta1 + delta2")
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    num = weighted_sobolev_norm(f * g, domain, WeightedNormSpec(k, 2, d, sigma))
    if num == 0:
        return 0.0
    den = (weighted_sobolev_norm(f, domain, WeightedNormSpec(k1, 2, d1, sigma))
           * weighted_sobolev_norm(g, domain, WeightedNormSpec(k2, 2, d2, sigma)))
    return num / den
