"""Pure-Python Dormand-Prince 5(4) integrator for the spherical reduction.

Reference implementation for ``_radial_kernel.pyx``; the two must stay in
lock-step (same coefficients, same step control, same stopping rules).

State ``y = (mu, mu', R, F)`` with chi = n*pi + mu and F = r^2 dA0/dr.
"""
import math

import numpy as np

STATUS_OK = 0
STATUS_MAX_STEPS = 1
STATUS_SINGULAR = 2
STATUS_UNDERFLOW = 3

FOUR_SQRT2_PI = 4.0 * math.sqrt(2.0) * math.pi

# Dormand-Prince tableau
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920,
                          -17253 / 339200, 22 / 525, -1 / 40)
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9


def rhs(r, y, m, e, eps, sn):
    mu, dmu, R, F = y
    s = sn * math.sin(mu)
    return (
        dmu,
        eps * (2.0 * e * F / (r * r) + 2.0 * m * s * dmu),
        R * (-2.0 / r - 2.0 * m * eps * s),
        FOUR_SQRT2_PI * e * r * r * R,
    )


def _axpy(y, h, *terms):
    out = list(y)
    for c, k in terms:
        for i in range(4):
            out[i] += h * c * k[i]
    return out


def integrate_radial(r_nodes, y0, m, e, eps, sn, rtol=1e-10, atol=1e-30,
                     h0=0.0, max_step=0.0, max_steps=1_000_000, blowup=1e12):
    """Integrate from ``r_nodes[0]`` through every node in order.

    Returns ``(Y, status, n_reached, n_steps, n_rejected, r_stop)``; rows of
    ``Y`` past ``n_reached`` are NaN.
    """
    r_nodes = np.asarray(r_nodes, dtype=float)
    n = r_nodes.size
    Y = np.full((n, 4), np.nan)
    y = [float(v) for v in y0]
    Y[0] = y
    r = float(r_nodes[0])
    direction = 1.0 if n < 2 or r_nodes[-1] > r_nodes[0] else -1.0
    h = abs(h0) if h0 else 1e-3 * abs(r)
    if max_step > 0:
        h = min(h, max_step)
    n_steps = n_rej = 0
    k1 = rhs(r, y, m, e, eps, sn)
    for j in range(1, n):
        target = float(r_nodes[j])
        while r != target:
            if n_steps + n_rej >= max_steps:
                return Y, STATUS_MAX_STEPS, j, n_steps, n_rej, r
            remaining = abs(target - r)
            clamped = h >= remaining
            step = remaining if clamped else h
            hs = direction * step
            k2 = rhs(r + C2 * hs, _axpy(y, hs, (A21, k1)), m, e, eps, sn)
            k3 = rhs(r + C3 * hs, _axpy(y, hs, (A31, k1), (A32, k2)), m, e, eps, sn)
            k4 = rhs(r + C4 * hs, _axpy(y, hs, (A41, k1), (A42, k2), (A43, k3)), m, e, eps, sn)
            k5 = rhs(r + C5 * hs, _axpy(y, hs, (A51, k1), (A52, k2), (A53, k3), (A54, k4)),
                     m, e, eps, sn)
            k6 = rhs(r + hs, _axpy(y, hs, (A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)),
                     m, e, eps, sn)
            ynew = _axpy(y, hs, (B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6))
            rnew = target if clamped else r + hs
            k7 = rhs(rnew, ynew, m, e, eps, sn)
            err = 0.0
            for i in range(4):
                ei = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                           + E6 * k6[i] + E7 * k7[i])
                sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
                q = abs(ei) / sc
                if q > err:
                    err = q
            if not math.isfinite(err):
                err = 1e10
            if err <= 1.0:
                r, y, k1 = rnew, ynew, k7
                n_steps += 1
                if not (y[2] > 0.0 and math.isfinite(y[2]) and abs(y[1]) < blowup
                        and math.isfinite(y[0]) and math.isfinite(y[3])):
                    return Y, STATUS_SINGULAR, j, n_steps, n_rej, r
                fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                if not clamped:
                    h = step * fac
                elif fac < 1.0:
                    h = min(h, step * fac)
            else:
                n_rej += 1
                h = step * max(0.2, 0.9 * err ** -0.2)
            if max_step > 0 and h > max_step:
                h = max_step
            if h < 1e-14 * abs(r):
                return Y, STATUS_UNDERFLOW, j, n_steps, n_rej, r
        Y[j] = y
    return Y, STATUS_OK, n, n_steps, n_rej, r
