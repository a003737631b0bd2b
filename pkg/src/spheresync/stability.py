"""Distinguished states, the equilibrium characterization, and instability
evidence from finite-difference Jacobians.

The linearization target here is the unit-norm vector field (the constrained
dynamics written without the <z,z> normalization factors, valid on and near
the sphere), realified into coordinates (x..., y..., a..., b...) where
z = x + iy and w = a + ib, each block particle-major.  Differentiating the
implemented field instead of transcribing analytic Jacobian entries means the
analytic values (identity blocks, -gamma/m blocks, the trace, the bipolar
column) act as independent oracles on the code path that actually runs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import EnsembleState

_EQ_KINDS = ("aggregated", "bipolar", "incoherent")


@dataclass
class EquilibriumSpec:
    kind: str
    N: int
    d: int
    n: int = None
    anchor: np.ndarray = None

    def __post_init__(self):
        if self.kind not in _EQ_KINDS:
            raise ValidationError("EquilibriumSpec: kind must be one of %s"
                                  % (_EQ_KINDS,))
        if self.N < 1 or self.d < 0:
            raise ValidationError("EquilibriumSpec: need N >= 1 and d >= 0")
        D = self.d + 1
        if self.anchor is None:
            # axis along the last coordinate, so the radial direction of a
            # particle on the axis is the last component of its block
            a = np.zeros(D, dtype=complex)
            a[D - 1] = 1.0
            self.anchor = a
        else:
            self.anchor = np.asarray(self.anchor, dtype=complex)
            if self.anchor.shape != (D,):
                raise ValidationError("EquilibriumSpec: anchor must have length d+1")
            if abs(np.linalg.norm(self.anchor) - 1.0) > 1e-12:
                raise ValidationError("EquilibriumSpec: anchor must be a unit vector")
        if self.kind == "bipolar":
            if self.n is None or self.n < 1 or 2 * self.n >= self.N:
                raise ValidationError(
                    "EquilibriumSpec: bipolar needs 1 <= n < N/2, got n=%r, N=%d"
                    % (self.n, self.N))
        if self.kind == "incoherent" and self.N < 2:
            raise ValidationError("EquilibriumSpec: incoherent needs N >= 2")


def make_equilibrium(spec):
    """Build the rest state described by spec, with w = 0.

    aggregated: every z_j = anchor.  bipolar: the first n particles at
    -anchor, the rest at +anchor.  incoherent: z_j = exp(2 pi i j / N) in the
    first coordinate (roots-of-unity phases), a deterministic zero-centroid
    configuration.
    """
    D = spec.d + 1
    z = np.zeros((spec.N, D), dtype=complex)
    if spec.kind == "aggregated":
        z[:] = spec.anchor
    elif spec.kind == "bipolar":
        z[:spec.n] = -spec.anchor
        z[spec.n:] = spec.anchor
    else:
        z[:, 0] = np.exp(2j * np.pi * np.arange(spec.N) / spec.N)
    return EnsembleState(0.0, z, np.zeros_like(z))


def equilibrium_residual(p, s):
    """max_j |z_c - <z_c, z_j> z_j| + max_j |w_j|; zero exactly at equilibria
    of the zero-frequency model."""
    if p.omega_inf > 0:
        raise ValidationError(
            "equilibrium_residual: the equilibrium characterization holds for "
            "Omega = 0 only")
    z = s.z
    zc = z.mean(axis=0)
    proj = np.einsum("a,ja->j", zc.conj(), z)
    gap = zc[None, :] - proj[:, None] * z
    return float(np.max(np.linalg.norm(gap, axis=1))
                 + np.max(np.linalg.norm(s.w, axis=1)))


def rhs_stability(p, z, w):
    """Unit-norm form of the zero-frequency field, defined near the sphere.

    dz/dt = w
    dw/dt = -(gamma/m) w + (kappa0/m)(z_c - <z_c,z_j> z_j)
            + (kappa1/m)(<z_j,z_c> - <z_c,z_j>) z_j - |w_j|^2 z_j

    This is what the realified Jacobian analysis linearizes; it agrees with
    the production right-hand side on the sphere but drops the norm factors
    that compensate off-sphere states, so its Jacobian is the analyzed one.
    """
    if p.m <= 0:
        raise ValidationError("rhs_stability: m must be positive")
    if p.omega_inf > 0:
        raise ValidationError("rhs_stability: zero-frequency setting only")
    zc = z.mean(axis=0)
    hcz = np.einsum("a,ja->j", zc.conj(), z)
    hzc = np.einsum("ja,a->j", z.conj(), zc)
    ww = np.einsum("ja,ja->j", w.conj(), w).real
    wdot = -(p.gamma / p.m) * w
    wdot = wdot + (p.kappa0 / p.m) * (zc[None, :] - hcz[:, None] * z)
    wdot = wdot + (p.kappa1 / p.m) * (hzc - hcz)[:, None] * z
    wdot = wdot - ww[:, None] * z
    return w.copy(), wdot


def realify(z, w):
    """(x..., y..., a..., b...) stacking of a complex ensemble state."""
    return np.concatenate([z.real.ravel(), z.imag.ravel(),
                           w.real.ravel(), w.imag.ravel()])


def unrealify(vec, N, D):
    """Inverse of realify."""
    B = N * D
    x, y, a, b = vec[:B], vec[B:2 * B], vec[2 * B:3 * B], vec[3 * B:]
    z = (x + 1j * y).reshape(N, D)
    w = (a + 1j * b).reshape(N, D)
    return z, w


def jacobian_fd(p, s, eps=1e-5):
    """Central finite-difference Jacobian of the realified stability field
    at an equilibrium (residual must be <= 1e-10).  Shape (4B, 4B) with
    B = (d+1)N, block order (x, y, a, b)."""
    if not eps > 0:
        raise ValidationError("jacobian_fd: eps must be positive")
    res = equilibrium_residual(p, s)
    if res > 1e-10:
        raise ValidationError(
            "jacobian_fd: state is not an equilibrium (residual %.3g)" % res)
    N, D = s.z.shape
    x0 = realify(s.z, s.w)
    size = x0.size

    def field(vec):
        z, w = unrealify(vec, N, D)
        zd, wd = rhs_stability(p, z, w)
        return realify(zd, wd)

    J = np.empty((size, size))
    for k in range(size):
        step = np.zeros(size)
        step[k] = eps
        J[:, k] = (field(x0 + step) - field(x0 - step)) / (2.0 * eps)
    return J


def jacobian_blocks(J):
    """The 16 (B x B) blocks of a realified Jacobian as a dict keyed '11'..'44'."""
    B = J.shape[0] // 4
    out = {}
    for i in range(4):
        for j in range(4):
            out["%d%d" % (i + 1, j + 1)] = J[i * B:(i + 1) * B, j * B:(j + 1) * B]
    return out


def block_structure_residuals(p, J):
    """Deviations of the universal blocks from their analytic values:
    M11, M12, M14, M21, M22, M23 vanish; M13 = M24 = I; M33 = M44 = -(gamma/m) I;
    M34 = M43 = 0."""
    B = J.shape[0] // 4
    blocks = jacobian_blocks(J)
    eye = np.eye(B)
    r = p.gamma / p.m
    out = {
        "M13_minus_I": float(np.max(np.abs(blocks["13"] - eye))),
        "M24_minus_I": float(np.max(np.abs(blocks["24"] - eye))),
        "M33_plus_damping": float(np.max(np.abs(blocks["33"] + r * eye))),
        "M44_plus_damping": float(np.max(np.abs(blocks["44"] + r * eye))),
    }
    for key in ("11", "12", "14", "21", "22", "23", "34", "43"):
        out["M%s" % key] = float(np.max(np.abs(blocks[key])))
    return out


def trace_Ms_analytic(p):
    """Trace of the coupling block at the incoherent state:
    2(d+1) kappa0 / m + 2 kappa1 / m."""
    if p.m <= 0:
        raise ValidationError("trace_Ms_analytic: m must be positive")
    return 2.0 * (p.d + 1) * p.kappa0 / p.m + 2.0 * p.kappa1 / p.m


def trace_Ms_numeric(jacobian):
    """Trace of the lower-left coupling block (M31 and M42 diagonals) of a
    realified Jacobian."""
    B = jacobian.shape[0] // 4
    return float(np.trace(jacobian[2 * B:3 * B, 0:B])
                 + np.trace(jacobian[3 * B:4 * B, B:2 * B]))


def bipolar_growth_rate(p, N, n):
    """Predicted linear growth rate of the unstable bipolar mode.

    The coupling block carries lambda_p = 2 kappa0 (N - 2n) / (m N) on the
    unstable axis; lifting through the second-order structure gives the
    positive root of lambda (gamma/m + lambda) = lambda_p, evaluated in the
    cancellation-free form 2 lambda_p / (gamma/m + sqrt((gamma/m)^2 + 4 lambda_p)).
    """
    if p.m <= 0:
        raise ValidationError("bipolar_growth_rate: m must be positive")
    if N != p.N:
        raise ValidationError("bipolar_growth_rate: N=%d disagrees with params N=%d"
                              % (N, p.N))
    if n < 1 or 2 * n >= N:
        raise ValidationError("bipolar_growth_rate: need 1 <= n < N/2")
    lam_p = 2.0 * p.kappa0 * (N - 2 * n) / (p.m * N)
    r = p.gamma / p.m
    return 2.0 * lam_p / (r + np.sqrt(r * r + 4.0 * lam_p))


@dataclass
class GrowthReport:
    """Measured perturbation growth against the predicted rate."""

    kind: str
    predicted: float
    fitted_rate: float
    n_window: int
    initial_dev: float
    max_dev: float
    final_dev: float

    def as_dict(self):
        return {"kind": self.kind, "predicted": self.predicted,
                "fitted_rate": self.fitted_rate, "n_window": self.n_window,
                "initial_dev": self.initial_dev, "max_dev": self.max_dev,
                "final_dev": self.final_dev}


def measure_bipolar_growth(p, n, eps=1e-6, dt=1e-3, t_end=16.0, control=False):
    """Seed the unstable mode and fit the perturbation's exponential rate.

    The bipolar rest state is perturbed along the lifted unstable direction:
    the first minority particle moves by eps * anchor (radially, toward the
    majority pole) and picks up velocity lambda_plus * eps * anchor.  The
    stability field is integrated with plain RK4 and the state deviation from
    the equilibrium is fitted log-linearly over the window where it lies in
    [10 eps, 1e-2]; below that is seed-dominated transient, above it
    nonlinear saturation.  With control=True the same protocol runs from the
    aggregated state, where the fitted rate comes from all samples past t = 1
    (the window is never reached) and should be non-positive.
    """
    lam = bipolar_growth_rate(p, p.N, n)
    spec = EquilibriumSpec("aggregated" if control else "bipolar", p.N, p.d, n=None if control else n)
    eq = make_equilibrium(spec)
    z = eq.z.copy()
    w = eq.w.copy()
    z[0] = z[0] + eps * spec.anchor
    w[0] = w[0] + eps * lam * spec.anchor

    n_steps = int(round(t_end / dt))
    devs = np.empty(n_steps + 1)
    times = np.empty(n_steps + 1)

    def deviation(z, w):
        return float(np.sqrt(np.sum(np.abs(z - eq.z) ** 2)
                             + np.sum(np.abs(w - eq.w) ** 2)))

    devs[0] = deviation(z, w)
    times[0] = 0.0
    for k in range(1, n_steps + 1):
        k1z, k1w = rhs_stability(p, z, w)
        k2z, k2w = rhs_stability(p, z + 0.5 * dt * k1z, w + 0.5 * dt * k1w)
        k3z, k3w = rhs_stability(p, z + 0.5 * dt * k2z, w + 0.5 * dt * k2w)
        k4z, k4w = rhs_stability(p, z + dt * k3z, w + dt * k3w)
        z = z + (dt / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        w = w + (dt / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        devs[k] = deviation(z, w)
        times[k] = k * dt

    mask = (devs >= 10.0 * eps) & (devs <= 1e-2)
    if np.count_nonzero(mask) < 20:
        mask = times >= 1.0
    logs = np.log(np.maximum(devs[mask], 1e-300))
    rate = float(np.polyfit(times[mask], logs, 1)[0])
    return GrowthReport(
        kind="aggregated_control" if control else "bipolar",
        predicted=lam, fitted_rate=rate, n_window=int(np.count_nonzero(mask)),
        initial_dev=float(devs[0]), max_dev=float(np.max(devs)),
        final_dev=float(devs[-1]))
