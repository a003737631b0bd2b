"""Vector fields for the synchronization models on the complex unit sphere.

Second-order (inertial) model for N particles z_j in C^(d+1), with
velocities w_j = dz_j/dt and the auxiliary variable

    v_j = w_j - Omega_j z_j / gamma.

The acceleration is

    dw_j/dt = (1/gamma) Omega_j w_j + (1/gamma) Omega_j v_j
              - (gamma/m) w_j + (1/m) Omega_j z_j
              + (kappa0/m) (<z_j,z_j> z_c - <z_c,z_j> z_j)
              + (kappa1/m) (<z_j,z_c> - <z_c,z_j>) z_j
              - (|v_j|^2 / |z_j|^2) z_j,

with z_c the centroid. The <z_j,z_j> and |z_j|^2 factors are kept explicit
(they are 1 on the sphere) so that small norm drift does not corrupt the
field. Admissible initial data satisfy Re<z_j, v_j> = 0, which the exact
flow conserves along with the norms.

The gauge transform z_j = e^(t Omega_j / gamma) u_j removes the free
rotation; the transformed system is implemented in rhs_gauge with the
two-sided unitary factors e^(-t Omega_j/gamma) e^(t Omega_k/gamma) in the
coupling.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import ValidationError


@dataclass(eq=False)
class ModelParams:
    """Physical parameters. omegas is an (N, d+1, d+1) stack; None means all zero."""

    N: int
    d: int
    m: float
    gamma: float
    kappa0: float
    kappa1: float
    delta: float = 0.5
    omegas: np.ndarray = None

    def __post_init__(self):
        if self.N < 1:
            raise ValidationError("ModelParams: N must be >= 1")
        if self.d < 0:
            raise ValidationError("ModelParams: d must be >= 0")
        if self.m < 0:
            raise ValidationError("ModelParams: m must be >= 0")
        if self.gamma <= 0:
            raise ValidationError("ModelParams: gamma must be > 0")
        if self.kappa0 < 0 or self.kappa1 < 0:
            raise ValidationError("ModelParams: couplings must be >= 0")
        if not 0 < self.delta < 1:
            raise ValidationError("ModelParams: delta must lie in (0, 1)")
        D = self.d + 1
        if self.omegas is None:
            self.omegas = np.zeros((self.N, D, D), dtype=complex)
        else:
            self.omegas = np.asarray(self.omegas, dtype=complex)
            if self.omegas.shape != (self.N, D, D):
                raise ValidationError(
                    "ModelParams: omegas must have shape (%d, %d, %d)"
                    % (self.N, D, D)
                )
            if not linalg.is_skew_hermitian(self.omegas):
                raise ValidationError("ModelParams: omegas must be skew-Hermitian")

    @property
    def D(self):
        return self.d + 1

    @property
    def homogeneous(self):
        """True when every particle shares one frequency matrix."""
        return float(np.max(np.abs(self.omegas - self.omegas[0]))) <= 1e-14

    @property
    def omega_inf(self):
        """Largest Frobenius norm over the frequency matrices."""
        return float(np.max(np.sqrt(np.sum(np.abs(self.omegas) ** 2, axis=(1, 2)))))

    @property
    def omega_diameter(self):
        """Largest pairwise Frobenius distance between frequency matrices."""
        diff = self.omegas[:, None] - self.omegas[None, :]
        return float(np.max(np.sqrt(np.sum(np.abs(diff) ** 2, axis=(2, 3)))))


@dataclass
class EnsembleState:
    t: float
    z: np.ndarray   # (N, d+1) complex positions
    w: np.ndarray   # (N, d+1) complex velocities dz/dt

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=complex)
        self.w = np.asarray(self.w, dtype=complex)
        if self.z.shape != self.w.shape or self.z.ndim != 2:
            raise ValidationError("EnsembleState: z and w must be matching (N, d+1) arrays")

    def copy(self):
        return EnsembleState(self.t, self.z.copy(), self.w.copy())


@dataclass
class KuramotoState:
    t: float
    theta: np.ndarray   # (N,) phases, kept unwrapped
    nus: np.ndarray     # (N,) natural frequencies
    kappa: float

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.nus = np.asarray(self.nus, dtype=float)
        if self.theta.shape != self.nus.shape or self.theta.ndim != 1:
            raise ValidationError("KuramotoState: theta and nus must be matching 1-d arrays")

    def copy(self):
        return KuramotoState(self.t, self.theta.copy(), self.nus.copy(), self.kappa)


def _omega_apply(p, x):
    return np.einsum("jab,jb->ja", p.omegas, x)


def velocity_v(p, z, w):
    """The rotation-adjusted velocity v_j = w_j - Omega_j z_j / gamma."""
    return w - _omega_apply(p, z) / p.gamma


def rhs_second_order(p, s):
    """Time derivative (dz/dt, dw/dt) of the inertial model at state s."""
    if p.m == 0:
        raise ValidationError(
            "rhs_second_order: m = 0 has no second-order form; use rhs_first_order"
        )
    z, w = s.z, s.w
    omz = _omega_apply(p, z)
    omw = _omega_apply(p, w)
    v = w - omz / p.gamma
    omv = _omega_apply(p, v)
    zc = z.mean(axis=0)
    zz = np.einsum("ja,ja->j", z.conj(), z).real
    hcz = np.einsum("a,ja->j", zc.conj(), z)
    hzc = np.einsum("ja,a->j", z.conj(), zc)
    vv = np.einsum("ja,ja->j", v.conj(), v).real
    coupling = p.kappa0 * (zz[:, None] * zc[None, :] - hcz[:, None] * z)
    coupling += p.kappa1 * (hzc - hcz)[:, None] * z
    wdot = (omw + omv) / p.gamma
    wdot += -(p.gamma / p.m) * w + omz / p.m
    wdot += coupling / p.m
    wdot -= (vv / zz)[:, None] * z
    return w.copy(), wdot


def rhs_first_order(p, z):
    """Time derivative dz/dt of the first-order model (no inertia)."""
    z = np.asarray(z, dtype=complex)
    omz = _omega_apply(p, z)
    zc = z.mean(axis=0)
    zz = np.einsum("ja,ja->j", z.conj(), z).real
    hcz = np.einsum("a,ja->j", zc.conj(), z)
    hzc = np.einsum("ja,a->j", z.conj(), zc)
    zdot = omz + p.kappa0 * (zz[:, None] * zc[None, :] - hcz[:, None] * z)
    zdot += p.kappa1 * (hzc - hcz)[:, None] * z
    return zdot


def rhs_gauge(p, t, u, udot, exp_family=None):
    """Acceleration d2u/dt2 of the gauge-transformed inertial model.

    The centroid coupling carries the two-sided unitary conjugation
    e^(-t Omega_j/gamma) e^(t Omega_k/gamma), evaluated through a shared
    SkewExpFamily; pass one in to amortize the eigendecompositions across a
    whole integration.
    """
    if p.m == 0:
        raise ValidationError("rhs_gauge: m = 0 has no second-order form")
    u = np.asarray(u, dtype=complex)
    udot = np.asarray(udot, dtype=complex)
    fam = exp_family if exp_family is not None else linalg.SkewExpFamily(p.omegas)
    sarg = t / p.gamma
    y = fam.apply(sarg, u)                 # e^(t Omega_k/gamma) u_k
    yc = y.mean(axis=0)
    q = fam.apply(-sarg, np.broadcast_to(yc, u.shape))   # e^(-t Omega_j/gamma) y_c
    uu = np.einsum("ja,ja->j", u.conj(), u).real
    hqu = np.einsum("ja,ja->j", q.conj(), u)
    huq = np.einsum("ja,ja->j", u.conj(), q)
    dd = np.einsum("ja,ja->j", udot.conj(), udot).real
    coupling = p.kappa0 * (uu[:, None] * q - hqu[:, None] * u)
    coupling += p.kappa1 * (huq - hqu)[:, None] * u
    return (-p.gamma * udot + coupling) / p.m - (dd / uu)[:, None] * u


def rhs_kuramoto(s):
    """Phase velocities nu_j + (kappa/N) sum_k sin(theta_k - theta_j)."""
    theta = s.theta
    n = theta.size
    diff = theta[None, :] - theta[:, None]
    return s.nus + (s.kappa / n) * np.sin(diff).sum(axis=1)


def project_admissible(p, z, w):
    """Remove the radial component so that Re<z_j, v_j> = 0.

    Returns w'_j = w_j - Re<z_j, v_j> z_j with v_j = w_j - Omega_j z_j/gamma.
    Assumes unit norms.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    v = w - _omega_apply(p, z) / p.gamma
    c = np.einsum("ja,ja->j", z.conj(), v).real
    return w - c[:, None] * z


def admissibility_defect(p, z, w):
    """max_j |Re<z_j, v_j>|; zero for admissible velocities."""
    v = np.asarray(w, dtype=complex) - _omega_apply(p, np.asarray(z, dtype=complex)) / p.gamma
    return float(np.max(np.abs(np.einsum("ja,ja->j", np.conj(z), v).real)))


def kuramoto_embed(theta):
    """Planar embedding z_j = (cos theta_j, sin theta_j) as complex vectors."""
    theta = np.asarray(theta, dtype=float)
    z = np.zeros((theta.size, 2), dtype=complex)
    z[:, 0] = np.cos(theta)
    z[:, 1] = np.sin(theta)
    return z


def kuramoto_omegas(nus):
    """Rotation generators [[0, -nu], [nu, 0]] matching the planar embedding."""
    nus = np.asarray(nus, dtype=float)
    om = np.zeros((nus.size, 2, 2), dtype=complex)
    om[:, 0, 1] = -nus
    om[:, 1, 0] = nus
    return om


def kuramoto_phases(z):
    """Phases recovered from a real planar embedding (inverse of kuramoto_embed)."""
    z = np.asarray(z)
    return np.arctan2(z[:, 1].real, z[:, 0].real)


def kuramoto_equivalent_params(s, delta=0.5):
    """First-order ModelParams whose planar dynamics reproduce a Kuramoto state."""
    return ModelParams(
        N=s.theta.size,
        d=1,
        m=0.0,
        gamma=1.0,
        kappa0=s.kappa,
        kappa1=0.0,
        delta=delta,
        omegas=kuramoto_omegas(s.nus),
    )


def gauge_initial_state(p, s):
    """Gauge coordinates (u, du/dt) = (z, v) matching a physical state at its time.

    Exact at s.t = 0 where the gauge factors are the identity; that is the
    matched-initial-data convention used by the splitting comparison.
    """
    if s.t != 0.0:
        raise ValidationError("gauge_initial_state: matched initial data requires t = 0")
    return EnsembleState(0.0, s.z.copy(), velocity_v(p, s.z, s.w))
