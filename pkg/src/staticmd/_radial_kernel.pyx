# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) integrator for the spherical reduction.

Mirrors ``_radial_py.integrate_radial`` step for step.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, fabs, sqrt, pow, isfinite, M_PI

cnp.import_array()

DEF NS = 4

cdef double FOUR_SQRT2_PI = 4.0 * sqrt(2.0) * M_PI

cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176
cdef double A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784
cdef double B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40
cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9


cdef inline void rhs(double r, double* y, double m, double e, double eps, double sn,
                     double* out) nogil:
    cdef double s = sn * sin(y[0])
    out[0] = y[1]
    out[1] = eps * (2.0 * e * y[3] / (r * r) + 2.0 * m * s * y[1])
    out[2] = y[2] * (-2.0 / r - 2.0 * m * eps * s)
    out[3] = FOUR_SQRT2_PI * e * r * r * y[2]


def integrate_radial(r_nodes, y0, double m, double e, double eps, double sn,
                     double rtol=1e-10, double atol=1e-30, double h0=0.0,
                     double max_step=0.0, long max_steps=1000000, double blowup=1e12):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rn = np.ascontiguousarray(r_nodes, dtype=np.float64)
    cdef Py_ssize_t n = rn.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Y = np.full((n, NS), np.nan)
    cdef double y[NS]
    cdef double yn[NS]
    cdef double yt[NS]
    cdef double k1[NS]
    cdef double k2[NS]
    cdef double k3[NS]
    cdef double k4[NS]
    cdef double k5[NS]
    cdef double k6[NS]
    cdef double k7[NS]
    cdef Py_ssize_t i, j
    cdef double r, target, remaining, step, hs, rnew, err, ei, sc, q, fac, h, direction
    cdef bint clamped
    cdef long n_steps = 0, n_rej = 0
    for i in range(NS):
        y[i] = y0[i]
        Y[0, i] = y[i]
    r = rn[0]
    direction = 1.0 if (n < 2 or rn[n - 1] > rn[0]) else -1.0
    h = fabs(h0) if h0 != 0.0 else 1e-3 * fabs(r)
    if max_step > 0 and h > max_step:
        h = max_step
    rhs(r, y, m, e, eps, sn, k1)
    for j in range(1, n):
        target = rn[j]
        while r != target:
            if n_steps + n_rej >= max_steps:
                return Y, 1, j, n_steps, n_rej, r
            remaining = fabs(target - r)
            clamped = h >= remaining
            step = remaining if clamped else h
            hs = direction * step
            for i in range(NS):
                yt[i] = y[i] + hs * A21 * k1[i]
            rhs(r + C2 * hs, yt, m, e, eps, sn, k2)
            for i in range(NS):
                yt[i] = y[i] + hs * A31 * k1[i] + hs * A32 * k2[i]
            rhs(r + C3 * hs, yt, m, e, eps, sn, k3)
            for i in range(NS):
                yt[i] = y[i] + hs * A41 * k1[i] + hs * A42 * k2[i] + hs * A43 * k3[i]
            rhs(r + C4 * hs, yt, m, e, eps, sn, k4)
            for i in range(NS):
                yt[i] = (y[i] + hs * A51 * k1[i] + hs * A52 * k2[i] + hs * A53 * k3[i]
                         + hs * A54 * k4[i])
            rhs(r + C5 * hs, yt, m, e, eps, sn, k5)
            for i in range(NS):
                yt[i] = (y[i] + hs * A61 * k1[i] + hs * A62 * k2[i] + hs * A63 * k3[i]
                         + hs * A64 * k4[i] + hs * A65 * k5[i])
            rhs(r + hs, yt, m, e, eps, sn, k6)
            for i in range(NS):
                yn[i] = (y[i] + hs * B1 * k1[i] + hs * B3 * k3[i] + hs * B4 * k4[i]
                         + hs * B5 * k5[i] + hs * B6 * k6[i])
            rnew = target if clamped else r + hs
            rhs(rnew, yn, m, e, eps, sn, k7)
            err = 0.0
            for i in range(NS):
                ei = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                           + E6 * k6[i] + E7 * k7[i])
                sc = atol + rtol * (fabs(y[i]) if fabs(y[i]) > fabs(yn[i]) else fabs(yn[i]))
                q = fabs(ei) / sc
                if q > err:
                    err = q
            if not isfinite(err):
                err = 1e10
            if err <= 1.0:
                r = rnew
                for i in range(NS):
                    y[i] = yn[i]
                    k1[i] = k7[i]
                n_steps += 1
                if not (y[2] > 0.0 and isfinite(y[2]) and fabs(y[1]) < blowup
                        and isfinite(y[0]) and isfinite(y[3])):
                    return Y, 2, j, n_steps, n_rej, r
                if err == 0.0:
                    fac = 5.0
                else:
                    fac = 0.9 * pow(err, -0.2)
                    fac = 0.2 if fac < 0.2 else fac
                    fac = 5.0 if fac > 5.0 else fac
                if not clamped:
                    h = step * fac
                elif fac < 1.0 and step * fac < h:
                    h = step * fac
            else:
                n_rej += 1
                fac = 0.9 * pow(err, -0.2)
                h = step * (0.2 if fac < 0.2 else fac)
            if max_step > 0 and h > max_step:
                h = max_step
            if h < 1e-14 * fabs(r):
                return Y, 3, j, n_steps, n_rej, r
        for i in range(NS):
            Y[j, i] = y[i]
    return Y, 0, n, n_steps, n_rej, r
