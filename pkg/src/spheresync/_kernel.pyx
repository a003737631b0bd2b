# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping drivers (classical RK4 over the whole ensemble).

Contract identical to the pure-numpy module `_kernel_py`; see its module
docstring for the status codes and determinism notes.
"""

import numpy as np

from libc.math cimport isfinite, sqrt

ctypedef double complex dc

BACKEND_NAME = "compiled"


cdef void _rhs_second(dc[:, ::1] z, dc[:, ::1] w,
                      dc[:, :, ::1] om, bint has_om,
                      double m, double gamma, double k0, double k1,
                      dc[::1] zc, dc[::1] omz, dc[::1] omw, dc[::1] v, dc[::1] omv,
                      dc[:, ::1] zdot, dc[:, ::1] wdot):
    cdef Py_ssize_t N = z.shape[0], D = z.shape[1]
    cdef Py_ssize_t j, a, b
    cdef dc s, hcz, hzc, cterm
    cdef double zz, vv
    for a in range(D):
        s = 0
        for j in range(N):
            s = s + z[j, a]
        zc[a] = s / (<double> N)
    for j in range(N):
        if has_om:
            for a in range(D):
                s = 0
                for b in range(D):
                    s = s + om[j, a, b] * z[j, b]
                omz[a] = s
            for a in range(D):
                s = 0
                for b in range(D):
                    s = s + om[j, a, b] * w[j, b]
                omw[a] = s
            for a in range(D):
                v[a] = w[j, a] - omz[a] / gamma
            for a in range(D):
                s = 0
                for b in range(D):
                    s = s + om[j, a, b] * v[b]
                omv[a] = s
        else:
            for a in range(D):
                omz[a] = 0
                omw[a] = 0
                omv[a] = 0
                v[a] = w[j, a]
        zz = 0
        vv = 0
        hcz = 0
        hzc = 0
        for a in range(D):
            zz += (z[j, a].conjugate() * z[j, a]).real
            vv += (v[a].conjugate() * v[a]).real
            hcz = hcz + zc[a].conjugate() * z[j, a]
            hzc = hzc + z[j, a].conjugate() * zc[a]
        for a in range(D):
            cterm = k0 * (zz * zc[a] - hcz * z[j, a]) + k1 * (hzc - hcz) * z[j, a]
            zdot[j, a] = w[j, a]
            wdot[j, a] = ((omw[a] + omv[a]) / gamma
                          - (gamma / m) * w[j, a] + omz[a] / m
                          + cterm / m - (vv / zz) * z[j, a])


cdef void _rhs_first(dc[:, ::1] z,
                     dc[:, :, ::1] om, bint has_om,
                     double k0, double k1,
                     dc[::1] zc, dc[::1] omz,
                     dc[:, ::1] zdot):
    cdef Py_ssize_t N = z.shape[0], D = z.shape[1]
    cdef Py_ssize_t j, a, b
    cdef dc s, hcz, hzc
    cdef double zz
    for a in range(D):
        s = 0
        for j in range(N):
            s = s + z[j, a]
        zc[a] = s / (<double> N)
    for j in range(N):
        if has_om:
            for a in range(D):
                s = 0
                for b in range(D):
                    s = s + om[j, a, b] * z[j, b]
                omz[a] = s
        else:
            for a in range(D):
                omz[a] = 0
        zz = 0
        hcz = 0
        hzc = 0
        for a in range(D):
            zz += (z[j, a].conjugate() * z[j, a]).real
            hcz = hcz + zc[a].conjugate() * z[j, a]
            hzc = hzc + z[j, a].conjugate() * zc[a]
        for a in range(D):
            zdot[j, a] = (omz[a]
                          + k0 * (zz * zc[a] - hcz * z[j, a])
                          + k1 * (hzc - hcz) * z[j, a])


cdef inline double _max_drift(dc[:, ::1] z):
    cdef Py_ssize_t N = z.shape[0], D = z.shape[1]
    cdef Py_ssize_t j, a
    cdef double nj, worst = 0.0, dev
    for j in range(N):
        nj = 0.0
        for a in range(D):
            nj += (z[j, a].conjugate() * z[j, a]).real
        dev = sqrt(nj) - 1.0
        if dev < 0:
            dev = -dev
        if dev > worst:
            worst = dev
    return worst


cdef inline bint _all_finite(dc[:, ::1] x):
    cdef Py_ssize_t j, a
    for j in range(x.shape[0]):
        for a in range(x.shape[1]):
            if not (isfinite(x[j, a].real) and isfinite(x[j, a].imag)):
                return False
    return True


def run_second_order(z0, w0, omegas, bint has_omega,
                     double m, double gamma, double kappa0, double kappa1,
                     double dt, long n_steps, long observe_every,
                     bint renormalize, double drift_tol, double t0):
    cdef Py_ssize_t N = z0.shape[0], D = z0.shape[1]
    cdef long n_samples = n_steps // observe_every + 1

    times_np = np.empty(n_samples)
    Z_np = np.empty((n_samples, N, D), dtype=complex)
    W_np = np.empty((n_samples, N, D), dtype=complex)
    drift_np = np.empty(n_samples)

    cdef double[::1] times = times_np
    cdef dc[:, :, ::1] Z = Z_np
    cdef dc[:, :, ::1] W = W_np
    cdef double[::1] drift = drift_np

    z_np = np.array(z0, dtype=complex, order="C")
    w_np = np.array(w0, dtype=complex, order="C")
    om_np = np.ascontiguousarray(omegas, dtype=complex)
    cdef dc[:, ::1] z = z_np
    cdef dc[:, ::1] w = w_np
    cdef dc[:, :, ::1] om = om_np

    zs_np = np.empty((N, D), dtype=complex); ws_np = np.empty((N, D), dtype=complex)
    k1z_np = np.empty((N, D), dtype=complex); k1w_np = np.empty((N, D), dtype=complex)
    k2z_np = np.empty((N, D), dtype=complex); k2w_np = np.empty((N, D), dtype=complex)
    k3z_np = np.empty((N, D), dtype=complex); k3w_np = np.empty((N, D), dtype=complex)
    k4z_np = np.empty((N, D), dtype=complex); k4w_np = np.empty((N, D), dtype=complex)
    cdef dc[:, ::1] zs = zs_np, ws = ws_np
    cdef dc[:, ::1] k1z = k1z_np, k1w = k1w_np, k2z = k2z_np, k2w = k2w_np
    cdef dc[:, ::1] k3z = k3z_np, k3w = k3w_np, k4z = k4z_np, k4w = k4w_np

    zc_np = np.empty(D, dtype=complex)
    omz_np = np.empty(D, dtype=complex); omw_np = np.empty(D, dtype=complex)
    vv_np = np.empty(D, dtype=complex); omv_np = np.empty(D, dtype=complex)
    cdef dc[::1] zc = zc_np, omz = omz_np, omw = omw_np, vbuf = vv_np, omv = omv_np

    cdef long step, out = 1
    cdef Py_ssize_t j, a, b
    cdef double d, nj, c
    cdef dc cv

    times[0] = t0
    Z[0] = z
    W[0] = w
    drift[0] = _max_drift(z)

    for step in range(1, n_steps + 1):
        _rhs_second(z, w, om, has_omega, m, gamma, kappa0, kappa1,
                    zc, omz, omw, vbuf, omv, k1z, k1w)
        for j in range(N):
            for a in range(D):
                zs[j, a] = z[j, a] + 0.5 * dt * k1z[j, a]
                ws[j, a] = w[j, a] + 0.5 * dt * k1w[j, a]
        _rhs_second(zs, ws, om, has_omega, m, gamma, kappa0, kappa1,
                    zc, omz, omw, vbuf, omv, k2z, k2w)
        for j in range(N):
            for a in range(D):
                zs[j, a] = z[j, a] + 0.5 * dt * k2z[j, a]
                ws[j, a] = w[j, a] + 0.5 * dt * k2w[j, a]
        _rhs_second(zs, ws, om, has_omega, m, gamma, kappa0, kappa1,
                    zc, omz, omw, vbuf, omv, k3z, k3w)
        for j in range(N):
            for a in range(D):
                zs[j, a] = z[j, a] + dt * k3z[j, a]
                ws[j, a] = w[j, a] + dt * k3w[j, a]
        _rhs_second(zs, ws, om, has_omega, m, gamma, kappa0, kappa1,
                    zc, omz, omw, vbuf, omv, k4z, k4w)
        for j in range(N):
            for a in range(D):
                z[j, a] = z[j, a] + (dt / 6.0) * (k1z[j, a] + 2.0 * k2z[j, a]
                                                  + 2.0 * k3z[j, a] + k4z[j, a])
                w[j, a] = w[j, a] + (dt / 6.0) * (k1w[j, a] + 2.0 * k2w[j, a]
                                                  + 2.0 * k3w[j, a] + k4w[j, a])

        if not (_all_finite(z) and _all_finite(w)):
            return (times_np[:out], Z_np[:out], W_np[:out], drift_np[:out], 2, step)

        d = _max_drift(z)
        if renormalize:
            for j in range(N):
                nj = 0.0
                for a in range(D):
                    nj += (z[j, a].conjugate() * z[j, a]).real
                nj = sqrt(nj)
                for a in range(D):
                    z[j, a] = z[j, a] / nj
            # re-project: w -= Re<z_j, v_j> z_j with v = w - Om z / gamma
            for j in range(N):
                if has_omega:
                    for a in range(D):
                        cv = 0
                        for b in range(D):
                            cv = cv + om[j, a, b] * z[j, b]
                        omz[a] = cv
                    c = 0.0
                    for a in range(D):
                        c += (z[j, a].conjugate() * (w[j, a] - omz[a] / gamma)).real
                else:
                    c = 0.0
                    for a in range(D):
                        c += (z[j, a].conjugate() * w[j, a]).real
                for a in range(D):
                    w[j, a] = w[j, a] - c * z[j, a]
        elif d > drift_tol:
            return (times_np[:out], Z_np[:out], W_np[:out], drift_np[:out], 1, step)

        if step % observe_every == 0:
            times[out] = t0 + step * dt
            Z[out] = z
            W[out] = w
            drift[out] = d
            out += 1

    return (times_np[:out], Z_np[:out], W_np[:out], drift_np[:out], 0, 0)


def run_first_order(z0, omegas, bint has_omega,
                    double kappa0, double kappa1,
                    double dt, long n_steps, long observe_every,
                    bint renormalize, double drift_tol, double t0):
    cdef Py_ssize_t N = z0.shape[0], D = z0.shape[1]
    cdef long n_samples = n_steps // observe_every + 1

    times_np = np.empty(n_samples)
    Z_np = np.empty((n_samples, N, D), dtype=complex)
    W_np = np.empty((n_samples, N, D), dtype=complex)
    drift_np = np.empty(n_samples)

    cdef double[::1] times = times_np
    cdef dc[:, :, ::1] Z = Z_np
    cdef dc[:, :, ::1] W = W_np
    cdef double[::1] drift = drift_np

    z_np = np.array(z0, dtype=complex, order="C")
    om_np = np.ascontiguousarray(omegas, dtype=complex)
    cdef dc[:, ::1] z = z_np
    cdef dc[:, :, ::1] om = om_np

    zs_np = np.empty((N, D), dtype=complex)
    k1_np = np.empty((N, D), dtype=complex); k2_np = np.empty((N, D), dtype=complex)
    k3_np = np.empty((N, D), dtype=complex); k4_np = np.empty((N, D), dtype=complex)
    cdef dc[:, ::1] zs = zs_np
    cdef dc[:, ::1] k1 = k1_np, k2 = k2_np, k3 = k3_np, k4 = k4_np

    zc_np = np.empty(D, dtype=complex)
    omz_np = np.empty(D, dtype=complex)
    cdef dc[::1] zc = zc_np, omz = omz_np

    cdef long step, out = 1
    cdef Py_ssize_t j, a
    cdef double d, nj

    times[0] = t0
    Z[0] = z
    _rhs_first(z, om, has_omega, kappa0, kappa1, zc, omz, k1)
    W[0] = k1
    drift[0] = _max_drift(z)

    for step in range(1, n_steps + 1):
        _rhs_first(z, om, has_omega, kappa0, kappa1, zc, omz, k1)
        for j in range(N):
            for a in range(D):
                zs[j, a] = z[j, a] + 0.5 * dt * k1[j, a]
        _rhs_first(zs, om, has_omega, kappa0, kappa1, zc, omz, k2)
        for j in range(N):
            for a in range(D):
                zs[j, a] = z[j, a] + 0.5 * dt * k2[j, a]
        _rhs_first(zs, om, has_omega, kappa0, kappa1, zc, omz, k3)
        for j in range(N):
            for a in range(D):
                zs[j, a] = z[j, a] + dt * k3[j, a]
        _rhs_first(zs, om, has_omega, kappa0, kappa1, zc, omz, k4)
        for j in range(N):
            for a in range(D):
                z[j, a] = z[j, a] + (dt / 6.0) * (k1[j, a] + 2.0 * k2[j, a]
                                                  + 2.0 * k3[j, a] + k4[j, a])

        if not _all_finite(z):
            return (times_np[:out], Z_np[:out], W_np[:out], drift_np[:out], 2, step)

        d = _max_drift(z)
        if renormalize:
            for j in range(N):
                nj = 0.0
                for a in range(D):
                    nj += (z[j, a].conjugate() * z[j, a]).real
                nj = sqrt(nj)
                for a in range(D):
                    z[j, a] = z[j, a] / nj
        elif d > drift_tol:
            return (times_np[:out], Z_np[:out], W_np[:out], drift_np[:out], 1, step)

        if step % observe_every == 0:
            times[out] = t0 + step * dt
            Z[out] = z
            _rhs_first(z, om, has_omega, kappa0, kappa1, zc, omz, k1)
            W[out] = k1
            drift[out] = d
            out += 1

    return (times_np[:out], Z_np[:out], W_np[:out], drift_np[:out], 0, 0)
