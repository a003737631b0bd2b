"""Pure-numpy stepping drivers; fallback for the compiled kernel.

Same function contracts as the Cython module `_kernel`: fixed-step classical
RK4 over the whole ensemble, per-step norm-drift monitoring, optional
renormalization, and stacked sample arrays back to the caller. Status codes:
0 = completed, 1 = drift abort, 2 = non-finite state; `bad_step` is the
1-based step at which the run stopped (0 when completed).

Both backends are bitwise-deterministic on replay; they are not guaranteed
bitwise-equal to each other (operation order differs at roundoff level).
"""

import numpy as np

BACKEND_NAME = "python"


def _rhs_second(z, w, omegas, has_omega, m, gamma, kappa0, kappa1):
    if has_omega:
        omz = np.einsum("jab,jb->ja", omegas, z)
        omw = np.einsum("jab,jb->ja", omegas, w)
        v = w - omz / gamma
        omv = np.einsum("jab,jb->ja", omegas, v)
    else:
        omz = omw = omv = 0.0
        v = w
    zc = z.mean(axis=0)
    zz = np.einsum("ja,ja->j", z.conj(), z).real
    hcz = np.einsum("a,ja->j", zc.conj(), z)
    hzc = np.einsum("ja,a->j", z.conj(), zc)
    vv = np.einsum("ja,ja->j", v.conj(), v).real
    coupling = kappa0 * (zz[:, None] * zc[None, :] - hcz[:, None] * z)
    coupling += kappa1 * (hzc - hcz)[:, None] * z
    wdot = coupling / m
    wdot -= (gamma / m) * w
    wdot -= (vv / zz)[:, None] * z
    if has_omega:
        wdot += (omw + omv) / gamma + omz / m
    return w, wdot


def _rhs_first(z, omegas, has_omega, kappa0, kappa1):
    zc = z.mean(axis=0)
    zz = np.einsum("ja,ja->j", z.conj(), z).real
    hcz = np.einsum("a,ja->j", zc.conj(), z)
    hzc = np.einsum("ja,a->j", z.conj(), zc)
    zdot = kappa0 * (zz[:, None] * zc[None, :] - hcz[:, None] * z)
    zdot += kappa1 * (hzc - hcz)[:, None] * z
    if has_omega:
        zdot += np.einsum("jab,jb->ja", omegas, z)
    return zdot


def _norm_drift(z):
    return float(np.max(np.abs(np.linalg.norm(z, axis=1) - 1.0)))


def run_second_order(z0, w0, omegas, has_omega, m, gamma, kappa0, kappa1,
                     dt, n_steps, observe_every, renormalize, drift_tol, t0):
    n_samples = n_steps // observe_every + 1
    N, D = z0.shape
    times = np.empty(n_samples)
    Z = np.empty((n_samples, N, D), dtype=complex)
    W = np.empty((n_samples, N, D), dtype=complex)
    drift = np.empty(n_samples)

    z = z0.copy()
    w = w0.copy()
    times[0] = t0
    Z[0] = z
    W[0] = w
    drift[0] = _norm_drift(z)
    out = 1

    for step in range(1, n_steps + 1):
        k1z, k1w = _rhs_second(z, w, omegas, has_omega, m, gamma, kappa0, kappa1)
        k2z, k2w = _rhs_second(z + (0.5 * dt) * k1z, w + (0.5 * dt) * k1w,
                               omegas, has_omega, m, gamma, kappa0, kappa1)
        k3z, k3w = _rhs_second(z + (0.5 * dt) * k2z, w + (0.5 * dt) * k2w,
                               omegas, has_omega, m, gamma, kappa0, kappa1)
        k4z, k4w = _rhs_second(z + dt * k3z, w + dt * k3w,
                               omegas, has_omega, m, gamma, kappa0, kappa1)
        z = z + (dt / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        w = w + (dt / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)

        if not (np.all(np.isfinite(z.view(float))) and np.all(np.isfinite(w.view(float)))):
            return times[:out], Z[:out], W[:out], drift[:out], 2, step

        d = _norm_drift(z)
        if renormalize:
            z = z / np.linalg.norm(z, axis=1)[:, None]
            if has_omega:
                v = w - np.einsum("jab,jb->ja", omegas, z) / gamma
            else:
                v = w
            c = np.einsum("ja,ja->j", z.conj(), v).real
            w = w - c[:, None] * z
        elif d > drift_tol:
            return times[:out], Z[:out], W[:out], drift[:out], 1, step

        if step % observe_every == 0:
            times[out] = t0 + step * dt
            Z[out] = z
            W[out] = w
            drift[out] = d
            out += 1

    return times[:out], Z[:out], W[:out], drift[:out], 0, 0


def run_first_order(z0, omegas, has_omega, kappa0, kappa1,
                    dt, n_steps, observe_every, renormalize, drift_tol, t0):
    n_samples = n_steps // observe_every + 1
    N, D = z0.shape
    times = np.empty(n_samples)
    Z = np.empty((n_samples, N, D), dtype=complex)
    W = np.empty((n_samples, N, D), dtype=complex)
    drift = np.empty(n_samples)

    z = z0.copy()
    times[0] = t0
    Z[0] = z
    W[0] = _rhs_first(z, omegas, has_omega, kappa0, kappa1)
    drift[0] = _norm_drift(z)
    out = 1

    for step in range(1, n_steps + 1):
        k1 = _rhs_first(z, omegas, has_omega, kappa0, kappa1)
        k2 = _rhs_first(z + (0.5 * dt) * k1, omegas, has_omega, kappa0, kappa1)
        k3 = _rhs_first(z + (0.5 * dt) * k2, omegas, has_omega, kappa0, kappa1)
        k4 = _rhs_first(z + dt * k3, omegas, has_omega, kappa0, kappa1)
        z = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        if not np.all(np.isfinite(z.view(float))):
            return times[:out], Z[:out], W[:out], drift[:out], 2, step

        d = _norm_drift(z)
        if renormalize:
            z = z / np.linalg.norm(z, axis=1)[:, None]
        elif d > drift_tol:
            return times[:out], Z[:out], W[:out], drift[:out], 1, step

        if step % observe_every == 0:
            times[out] = t0 + step * dt
            Z[out] = z
            W[out] = _rhs_first(z, omegas, has_omega, kappa0, kappa1)
            drift[out] = d
            out += 1

    return times[:out], Z[:out], W[:out], drift[:out], 0, 0
