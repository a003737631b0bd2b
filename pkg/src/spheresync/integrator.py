"""Fixed-step classical RK4 time stepping for all model variants.

The hot paths (second- and first-order ensembles) run in the selected kernel
backend; the gauge and phase models integrate in plain numpy here.  Norm drift
is monitored every step: with renormalization off the run aborts once
max_j |norm(z_j) - 1| exceeds the configured tolerance, so an integrator
problem cannot masquerade as physics.
"""

from dataclasses import dataclass

import numpy as np

from . import model as _model
from .backend import kernel
from .errors import DriftError, NonFiniteError, ValidationError
from .linalg import SkewExpFamily
from .model import EnsembleState, KuramotoState, kuramoto_embed, rhs_kuramoto

MODELS = ("second_order", "first_order", "gauge", "kuramoto")


@dataclass
class IntegratorConfig:
    t_end: float
    dt: float = None
    observe_every: int = 1
    renormalize: bool = False
    drift_tolerance: float = 1e-6

    def __post_init__(self):
        if self.t_end < 0:
            raise ValidationError("IntegratorConfig: t_end must be >= 0")
        if self.dt is not None and not self.dt > 0:
            raise ValidationError("IntegratorConfig: dt must be positive")
        if self.observe_every != int(self.observe_every) or self.observe_every < 1:
            raise ValidationError("IntegratorConfig: observe_every must be an integer >= 1")
        self.observe_every = int(self.observe_every)
        if not self.drift_tolerance > 0:
            raise ValidationError("IntegratorConfig: drift_tolerance must be positive")


def default_dt(p):
    """Step size tracking the stiffest linear rates of the parameter set.

    Baseline min(1e-3, 0.1 gamma / (kappa0 + kappa1 + Omega_inf + 1)).  With
    inertia the damping rate gamma/m also binds, so an extra 0.5 m/gamma cap
    applies when m > 0.  Always overridable through IntegratorConfig.dt.
    """
    dt = min(1e-3, 0.1 * p.gamma / (p.kappa0 + p.kappa1 + p.omega_inf + 1.0))
    if p.m > 0:
        dt = min(dt, 0.5 * p.m / p.gamma)
    return dt


def _check_finite(arrs, step):
    for a in arrs:
        if not np.all(np.isfinite(np.asarray(a).view(float))):
            raise NonFiniteError("non-finite values after step %d" % step, step=step)


def step_rk4(rhs, state, dt, params=None, renormalize=False):
    """One classical RK4 step.  Three state shapes are accepted.

    EnsembleState:   rhs(state) -> (dz, dw); returns a new EnsembleState.
    KuramotoState:   rhs(state) -> dtheta;   returns a new KuramotoState.
    (t, y) pair:     rhs(t, y) -> dy with y a scalar or array; returns (t', y').

    With renormalize=True (EnsembleState only; params required) the sphere
    constraint is re-imposed after the step: each z_j is scaled to unit norm
    and w_j re-projected through project_admissible.
    """
    if not dt > 0:
        raise ValidationError("step_rk4: dt must be positive")
    if isinstance(state, EnsembleState):
        t, z, w = state.t, state.z, state.w
        k1z, k1w = rhs(state)
        k2z, k2w = rhs(EnsembleState(t + 0.5 * dt, z + 0.5 * dt * k1z, w + 0.5 * dt * k1w))
        k3z, k3w = rhs(EnsembleState(t + 0.5 * dt, z + 0.5 * dt * k2z, w + 0.5 * dt * k2w))
        k4z, k4w = rhs(EnsembleState(t + dt, z + dt * k3z, w + dt * k3w))
        zn = z + (dt / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        wn = w + (dt / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        _check_finite((zn, wn), 1)
        if renormalize:
            if params is None:
                raise ValidationError("step_rk4: renormalize requires params")
            zn = zn / np.linalg.norm(zn, axis=1)[:, None]
            wn = _model.project_admissible(params, zn, wn)
        return EnsembleState(t + dt, zn, wn)
    if isinstance(state, KuramotoState):
        t, th = state.t, state.theta
        mk = lambda tt, x: KuramotoState(tt, x, state.nus, state.kappa)
        k1 = rhs(state)
        k2 = rhs(mk(t + 0.5 * dt, th + 0.5 * dt * k1))
        k3 = rhs(mk(t + 0.5 * dt, th + 0.5 * dt * k2))
        k4 = rhs(mk(t + dt, th + dt * k3))
        thn = th + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_finite((thn,), 1)
        return mk(t + dt, thn)
    t, y = state
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return t + dt, y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass
class Trajectory:
    """Sampled run: struct-of-arrays storage with list-like views on top.

    Z and W are (n_samples, N, d+1) complex arrays.  For first-order runs W
    holds the instantaneous dz/dt at each sample; for phase-model runs Z and W
    are None and theta holds the (n_samples, N) phases.  Physical coordinates
    are stored even for gauge-integrated runs (the gauge map is undone at each
    sample), so every downstream consumer sees one representation.
    """

    params: object
    model: str
    times: np.ndarray
    Z: np.ndarray = None
    W: np.ndarray = None
    theta: np.ndarray = None
    nus: np.ndarray = None
    kappa: float = None
    norm_drift: np.ndarray = None
    backend: str = ""

    @property
    def n_samples(self):
        return len(self.times)

    @property
    def states(self):
        if self.theta is not None:
            return [KuramotoState(t, self.theta[i], self.nus, self.kappa)
                    for i, t in enumerate(self.times)]
        return [EnsembleState(t, self.Z[i], self.W[i])
                for i, t in enumerate(self.times)]

    @property
    def final_state(self):
        return self.states[-1]

    @property
    def diagnostics(self):
        from . import diagnostics as _diag
        if self.theta is not None:
            Z, W = self._embedded_phase_arrays()
            return _diag.build_series(self.params, self.times, Z, W)
        return _diag.build_series(self.params, self.times, self.Z, self.W)

    def _embedded_phase_arrays(self):
        """Lift phase samples to the plane so one diagnostics path serves all."""
        n, N = self.theta.shape
        Z = np.empty((n, N, 2), dtype=complex)
        W = np.empty_like(Z)
        for i in range(n):
            s = KuramotoState(self.times[i], self.theta[i], self.nus, self.kappa)
            Z[i] = kuramoto_embed(self.theta[i])
            rate = rhs_kuramoto(s)
            W[i, :, 0] = -np.sin(self.theta[i]) * rate
            W[i, :, 1] = np.cos(self.theta[i]) * rate
        return Z, W


def _validate_ensemble_init(p, init, tol, need_admissible):
    if not isinstance(init, EnsembleState):
        raise ValidationError("simulate: this model needs an EnsembleState initial condition")
    if init.z.shape != (p.N, p.D):
        raise ValidationError(
            "simulate: initial state shape %r does not match params (%d, %d)"
            % (init.z.shape, p.N, p.D))
    norms = np.linalg.norm(init.z, axis=1)
    dev = float(np.max(np.abs(norms - 1.0)))
    if dev > tol:
        raise ValidationError(
            "simulate: initial norms deviate from 1 by %.3g (tolerance %.3g)" % (dev, tol))
    if need_admissible:
        defect = _model.admissibility_defect(p, init.z, init.w)
        if defect > 1e-8:
            raise ValidationError(
                "simulate: initial velocities are not admissible "
                "(max |Re<z_j, v_j>| = %.3g > 1e-8); apply project_admissible first"
                % defect)


def _raise_from_status(status, bad_step, drift, tol):
    if status == 1:
        raise DriftError(
            "norm drift %.3g exceeded tolerance %.3g at step %d "
            "(renormalize is off)" % (float(drift[-1]), tol, bad_step),
            step=bad_step)
    if status == 2:
        raise NonFiniteError("non-finite values after step %d" % bad_step, step=bad_step)


def simulate(p, init, cfg, model="second_order"):
    """Integrate one of the model variants and return a sampled Trajectory.

    model is one of "second_order", "first_order", "gauge", "kuramoto".
    The initial snapshot is always included; sampling then happens every
    cfg.observe_every steps.  n_steps = round(t_end / dt), so t_end = 0 yields
    a single-snapshot trajectory.
    """
    if model not in MODELS:
        raise ValidationError("simulate: unknown model %r (choose from %s)"
                              % (model, ", ".join(MODELS)))
    dt = cfg.dt if cfg.dt is not None else default_dt(p)
    n_steps = int(round(cfg.t_end / dt))
    has_omega = p.omega_inf > 0.0

    if model == "second_order":
        if p.m <= 0:
            raise ValidationError("simulate: second_order requires m > 0")
        _validate_ensemble_init(p, init, cfg.drift_tolerance, need_admissible=True)
        times, Z, W, drift, status, bad = kernel.run_second_order(
            np.ascontiguousarray(init.z, dtype=complex),
            np.ascontiguousarray(init.w, dtype=complex),
            np.ascontiguousarray(p.omegas, dtype=complex), has_omega,
            p.m, p.gamma, p.kappa0, p.kappa1,
            dt, n_steps, cfg.observe_every, cfg.renormalize,
            cfg.drift_tolerance, init.t)
        _raise_from_status(status, bad, drift, cfg.drift_tolerance)
        return Trajectory(params=p, model=model, times=times, Z=Z, W=W,
                          norm_drift=drift, backend=kernel.BACKEND_NAME)

    if model == "first_order":
        _validate_ensemble_init(p, init, cfg.drift_tolerance, need_admissible=False)
        times, Z, W, drift, status, bad = kernel.run_first_order(
            np.ascontiguousarray(init.z, dtype=complex),
            np.ascontiguousarray(p.omegas, dtype=complex), has_omega,
            p.kappa0, p.kappa1,
            dt, n_steps, cfg.observe_every, cfg.renormalize,
            cfg.drift_tolerance, init.t)
        _raise_from_status(status, bad, drift, cfg.drift_tolerance)
        return Trajectory(params=p, model=model, times=times, Z=Z, W=W,
                          norm_drift=drift, backend=kernel.BACKEND_NAME)

    if model == "gauge":
        return _simulate_gauge(p, init, cfg, dt, n_steps)

    if not isinstance(init, KuramotoState):
        raise ValidationError("simulate: the kuramoto model needs a KuramotoState")
    return _simulate_kuramoto(p, init, cfg, dt, n_steps)


def _simulate_gauge(p, init, cfg, dt, n_steps):
    """Integrate the gauge-transformed second-order system, sampling in
    physical coordinates.

    State is (u, du/dt) with u_j(t) = exp(-t Omega_j / gamma) z_j(t); matched
    initial data at t = 0 is (z, v).  At every sample the gauge map is undone:
    z = exp(t Omega/gamma) u and dz/dt = exp(t Omega/gamma)(du/dt + Omega u / gamma).
    """
    if p.m <= 0:
        raise ValidationError("simulate: gauge requires m > 0")
    _validate_ensemble_init(p, init, cfg.drift_tolerance, need_admissible=True)
    fam = SkewExpFamily(p.omegas)
    g0 = _model.gauge_initial_state(p, init)
    u = g0.z.copy()
    ud = g0.w.copy()

    n_samples = n_steps // cfg.observe_every + 1
    times = np.empty(n_samples)
    Z = np.empty((n_samples, p.N, p.D), dtype=complex)
    W = np.empty((n_samples, p.N, p.D), dtype=complex)
    drift = np.empty(n_samples)

    def to_physical(t, u, ud):
        s = t / p.gamma
        z = fam.apply(s, u)
        w = fam.apply(s, ud + np.einsum("jab,jb->ja", p.omegas, u) / p.gamma)
        return z, w

    def record(i, t, u, ud, d):
        times[i] = t
        Z[i], W[i] = to_physical(t, u, ud)
        drift[i] = d

    record(0, 0.0, u, ud, float(np.max(np.abs(np.linalg.norm(u, axis=1) - 1.0))))
    out = 1
    for step in range(1, n_steps + 1):
        t = (step - 1) * dt
        a1 = _model.rhs_gauge(p, t, u, ud, fam)
        u2 = u + 0.5 * dt * ud
        ud2 = ud + 0.5 * dt * a1
        a2 = _model.rhs_gauge(p, t + 0.5 * dt, u2, ud2, fam)
        u3 = u + 0.5 * dt * ud2
        ud3 = ud + 0.5 * dt * a2
        a3 = _model.rhs_gauge(p, t + 0.5 * dt, u3, ud3, fam)
        u4 = u + dt * ud3
        ud4 = ud + dt * a3
        a4 = _model.rhs_gauge(p, t + dt, u4, ud4, fam)
        u = u + (dt / 6.0) * (ud + 2.0 * ud2 + 2.0 * ud3 + ud4)
        ud = ud + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)

        if not (np.all(np.isfinite(u.view(float))) and np.all(np.isfinite(ud.view(float)))):
            raise NonFiniteError("non-finite values after step %d" % step, step=step)
        norms = np.linalg.norm(u, axis=1)
        d = float(np.max(np.abs(norms - 1.0)))
        if cfg.renormalize:
            u = u / norms[:, None]
            c = np.einsum("ja,ja->j", u.conj(), ud).real
            ud = ud - c[:, None] * u
        elif d > cfg.drift_tolerance:
            raise DriftError(
                "norm drift %.3g exceeded tolerance %.3g at step %d "
                "(renormalize is off)" % (d, cfg.drift_tolerance, step),
                step=step)
        if step % cfg.observe_every == 0:
            record(out, step * dt, u, ud, d)
            out += 1

    return Trajectory(params=p, model="gauge", times=times[:out], Z=Z[:out],
                      W=W[:out], norm_drift=drift[:out], backend="python")


def _simulate_kuramoto(p, init, cfg, dt, n_steps):
    n = init.theta.size
    n_samples = n_steps // cfg.observe_every + 1
    times = np.empty(n_samples)
    TH = np.empty((n_samples, n))
    times[0] = init.t
    TH[0] = init.theta
    s = init.copy()
    out = 1
    for step in range(1, n_steps + 1):
        s = step_rk4(_model.rhs_kuramoto, s, dt)
        s.t = init.t + step * dt
        if step % cfg.observe_every == 0:
            times[out] = s.t
            TH[out] = s.theta
            out += 1
    return Trajectory(params=p, model="kuramoto", times=times[:out],
                      theta=TH[:out], nus=init.nus.copy(), kappa=init.kappa,
                      norm_drift=np.zeros(out), backend="python")
