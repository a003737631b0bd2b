"""Scalar functionals and correlation quantities over snapshots and runs.

Everything here is a pure function of (params, state) or of trajectory
arrays.  The aggregation derivative is analytic (chain rule through the
pairwise correlations), never a finite difference, so certificate checks that
need its value at t = 0 are exact; finite differences appear only in tests as
an oracle.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import velocity_v

CSV_COLUMNS = ["t", "G", "Gdot", "energy", "rho", "DZ", "DW",
               "R1", "R2", "R3", "JM", "Domega", "omega_inf"]


def correlations(z):
    """Pairwise h_ij = <z_i, z_j> and g_ij = 1 - h_ij (inner product
    conjugate-linear in the first slot).  Returns (h, g)."""
    z = np.asarray(z, dtype=complex)
    h = np.einsum("ia,ja->ij", z.conj(), z)
    return h, 1.0 - h


def aggregation_G(z):
    """(1/N^2) sum_ij |g_ij|^2."""
    z = np.asarray(z, dtype=complex)
    _, g = correlations(z)
    n = z.shape[0]
    return float(np.sum(np.abs(g) ** 2)) / (n * n)


def aggregation_Gdot(z, w):
    """Analytic time derivative of aggregation_G given dz/dt = w.

    d|g_ij|^2/dt = gdot_ij g_ji + g_ij gdot_ji with
    gdot_ij = -(<w_i, z_j> + <z_i, w_j>).
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    _, g = correlations(z)
    a = np.einsum("ia,ja->ij", w.conj(), z)
    gdot = -(a + a.conj().T)
    n = z.shape[0]
    return float(np.sum((gdot * g.conj()).real)) * 2.0 / (n * n)


def order_parameter(z):
    """Norm of the centroid, rho = |(1/N) sum_j z_j|."""
    z = np.asarray(z, dtype=complex)
    return float(np.linalg.norm(z.mean(axis=0)))


def energy_forms(p, s):
    """Both algebraic forms of the energy functional, for cross-checking.

    Form 1 uses the centroid distances |z_c - z_j|^2; form 2 replaces their
    mean with (1 - rho^2), which is the same thing exactly on unit norms.
    The kinetic part is evaluated on v_j = w_j - Omega_j z_j / gamma, which
    equals dz/dt of the rotation-reduced ensemble when all frequency matrices
    coincide (and is w_j itself when Omega = 0).
    """
    if p.kappa0 + p.kappa1 <= 0:
        raise ValidationError("energy: needs kappa0 + kappa1 > 0")
    if not p.homogeneous:
        raise ValidationError("energy: defined for homogeneous ensembles only")
    z = s.z
    v = velocity_v(p, z, s.w)
    n = z.shape[0]
    coeff = p.m * (p.kappa0 + 2.0 * p.kappa1) / (2.0 * (p.kappa0 + p.kappa1))
    vv = np.einsum("ja,ja->j", v.conj(), v).real
    zv = np.abs(np.einsum("ja,ja->j", z.conj(), v)) ** 2
    zc = z.mean(axis=0)
    dist = np.sum(np.abs(zc[None, :] - z) ** 2, axis=1)
    kinetic = float(np.sum(p.m * vv - coeff * zv)) / n
    form1 = kinetic + p.kappa0 * float(np.sum(dist)) / n
    form2 = kinetic + p.kappa0 * (1.0 - float(np.vdot(zc, zc).real))
    return form1, form2


def energy(p, s):
    """Energy functional of the inertial model (homogeneous ensembles).

    Cross-checks the two equivalent forms within 1e-10 before returning the
    first; a mismatch means the state is off the unit sphere (norm drift),
    which this functional has no meaning for.
    """
    form1, form2 = energy_forms(p, s)
    if abs(form1 - form2) > 1e-10:
        raise ValidationError(
            "energy: the two algebraic forms disagree by %.3g; "
            "state norms have drifted off 1" % abs(form1 - form2))
    return form1


def diameter(x):
    """Largest pairwise Euclidean distance inside a stack of vectors."""
    x = np.asarray(x)
    diff = x[:, None, :] - x[None, :, :]
    return float(np.max(np.sqrt(np.sum(np.abs(diff) ** 2, axis=2))))


def _snapshot_rates(p, z, w):
    """Per-snapshot pieces of bounds_and_rates: R1, R2, R3, JM, DZ, DW."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    h, g = correlations(z)
    zc = z.mean(axis=0)
    v = velocity_v(p, z, w)
    r1 = float(np.max(np.sum(np.abs(w) ** 2, axis=1)))
    hc = np.einsum("a,ja->j", zc.conj(), z)
    r2 = float(np.max(np.abs(hc - hc.conj()) ** 2))
    r3 = float(np.max(np.linalg.norm(v, axis=1)))
    jm = float(np.max(np.abs(g))) ** 0.5
    return r1, r2, r3, jm, diameter(z), diameter(w)


def bounds_and_rates(p, obj):
    """A priori constants and state-dependent rates, as one dict.

    obj may be an EnsembleState (treated as the initial snapshot) or a
    Trajectory, in which case M1 comes from the first sample and the rates
    R1, R2, R3, JM, DZ, DW are maxima over all samples.  M1 is evaluated on
    the rotation-adjusted initial velocities v_j (equal to w_j when Omega=0,
    and the correct reduced-coordinate speed otherwise).  nu1 and nu2 are
    None when m = 0 or the discriminant gamma^2 - 16 m kappa0 delta is
    negative.
    """
    if hasattr(obj, "times"):
        Z, W = obj.Z, obj.W
        v_in = velocity_v(p, Z[0], W[0])
        per = [_snapshot_rates(p, Z[i], W[i]) for i in range(len(obj.times))]
        r1, r2, r3, jm, dz, dw = (max(col) for col in zip(*per))
    else:
        v_in = velocity_v(p, obj.z, obj.w)
        r1, r2, r3, jm, dz, dw = _snapshot_rates(p, obj.z, obj.w)

    m1 = max(float(np.max(np.linalg.norm(v_in, axis=1))),
             2.0 * (p.kappa0 + p.kappa1) / p.gamma)
    nu1 = nu2 = None
    if p.m > 0:
        disc = p.gamma ** 2 - 16.0 * p.m * p.kappa0 * p.delta
        if disc >= 0:
            root = disc ** 0.5
            nu1 = (p.gamma + root) / (2.0 * p.m)
            nu2 = (p.gamma - root) / (2.0 * p.m)
    om = p.omega_inf
    u = 4.0 * om + 8.0 * p.kappa1 + (16.0 * p.m / p.gamma ** 2) \
        * (om + 2.0 * (p.kappa0 + p.kappa1)) ** 2
    return {"M1": m1, "nu1": nu1, "nu2": nu2, "U": u,
            "R1": r1, "R2": r2, "R3": r3,
            "omega_inf": om, "Domega": p.omega_diameter,
            "JM": jm, "DZ": dz, "DW": dw}


@dataclass
class DiagnosticsRecord:
    t: float
    G: float
    Gdot: float
    energy: float          # NaN when not defined for the run
    rho: float
    DZ: float
    DW: float
    R1: float
    R2: float
    R3: float
    JM: float
    Domega: float
    omega_inf: float


class DiagnosticsSeries:
    """Struct-of-arrays diagnostics over a sampled trajectory.

    Each CSV_COLUMNS name is an attribute holding a (n_samples,) float array;
    record(i) materializes one DiagnosticsRecord.  energy is NaN throughout
    when the run is heterogeneous or kappa0 + kappa1 = 0.
    """

    def __init__(self, **cols):
        for name in CSV_COLUMNS:
            setattr(self, name, np.asarray(cols[name]))
        self.has_energy = bool(np.all(np.isfinite(self.energy)))

    def __len__(self):
        return len(self.t)

    def record(self, i):
        return DiagnosticsRecord(**{name: float(getattr(self, name)[i])
                                    for name in CSV_COLUMNS})

    def rows(self):
        for i in range(len(self)):
            yield [getattr(self, name)[i] for name in CSV_COLUMNS]


def build_series(p, times, Z, W, chunk=4096):
    """Vectorized DiagnosticsSeries over stacked samples (chunked in time).

    The energy column uses the centroid-norm form; the strict two-form
    cross-check lives in energy() and in the test suite, not in this bulk
    path, so long runs with benign norm drift still produce a full series.
    """
    times = np.asarray(times, dtype=float)
    Z = np.asarray(Z, dtype=complex)
    W = np.asarray(W, dtype=complex)
    n = len(times)
    N = Z.shape[1]
    with_energy = p.homogeneous and (p.kappa0 + p.kappa1 > 0)
    cols = {name: np.empty(n) for name in CSV_COLUMNS}
    cols["t"] = times.copy()
    cols["Domega"].fill(p.omega_diameter)
    cols["omega_inf"].fill(p.omega_inf)
    coeff = 0.0
    if with_energy:
        coeff = p.m * (p.kappa0 + 2.0 * p.kappa1) / (2.0 * (p.kappa0 + p.kappa1))

    have_omega = p.omega_inf > 0.0
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        z = Z[lo:hi]
        w = W[lo:hi]
        h = np.einsum("tia,tja->tij", z.conj(), z)
        g = 1.0 - h
        zc = z.mean(axis=1)
        a = np.einsum("tia,tja->tij", w.conj(), z)
        gdot = -(a + np.conj(np.swapaxes(a, 1, 2)))
        cols["G"][lo:hi] = np.sum(np.abs(g) ** 2, axis=(1, 2)) / (N * N)
        cols["Gdot"][lo:hi] = 2.0 * np.sum((gdot * g.conj()).real, axis=(1, 2)) / (N * N)
        rho = np.linalg.norm(zc, axis=1)
        cols["rho"][lo:hi] = rho
        nz = np.einsum("tia,tia->ti", z.conj(), z).real
        dz2 = nz[:, :, None] + nz[:, None, :] - 2.0 * h.real
        cols["DZ"][lo:hi] = np.sqrt(np.maximum(dz2.max(axis=(1, 2)), 0.0))
        nw = np.einsum("tia,tia->ti", w.conj(), w).real
        hw = np.einsum("tia,tja->tij", w.conj(), w)
        dw2 = nw[:, :, None] + nw[:, None, :] - 2.0 * hw.real
        cols["DW"][lo:hi] = np.sqrt(np.maximum(dw2.max(axis=(1, 2)), 0.0))
        cols["R1"][lo:hi] = nw.max(axis=1)
        hc = np.einsum("ta,tja->tj", zc.conj(), z)
        cols["R2"][lo:hi] = (np.abs(hc - hc.conj()) ** 2).max(axis=1)
        if have_omega:
            v = w - np.einsum("jab,tjb->tja", p.omegas, z) / p.gamma
        else:
            v = w
        nv = np.einsum("tia,tia->ti", v.conj(), v).real
        cols["R3"][lo:hi] = np.sqrt(nv.max(axis=1))
        cols["JM"][lo:hi] = np.sqrt(np.sqrt((np.abs(g) ** 2).max(axis=(1, 2))))
        if with_energy:
            zv = np.abs(np.einsum("tja,tja->tj", z.conj(), v)) ** 2
            kinetic = np.sum(p.m * nv - coeff * zv, axis=1) / N
            cols["energy"][lo:hi] = kinetic + p.kappa0 * (1.0 - rho ** 2)
        else:
            cols["energy"][lo:hi] = np.nan
    return DiagnosticsSeries(**cols)
