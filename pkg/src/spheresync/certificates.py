"""Sufficient-condition checkers, closed-form decay envelopes, and
trajectory-level verification of the proven differential inequalities.

Frameworks are checked strictly (zero slack) and every condition carries its
computed margin, so near-boundary cases are visible instead of silently
passing.  Envelope formulas are the exact solutions of the comparison ODE
a y'' + b y' + c y + d = 0 with matched initial data, which is why the unit
tests can pin them against a brute-force scalar integration.
"""

from dataclasses import dataclass, field

import numpy as np

from . import diagnostics as diag
from .errors import ValidationError
from .model import velocity_v

_DISC_EPS = 1e-12


@dataclass
class Condition:
    name: str
    lhs: float
    comparator: str
    rhs: float
    passed: bool
    margin: float

    def as_dict(self):
        return {"name": self.name, "lhs": self.lhs, "comparator": self.comparator,
                "rhs": self.rhs, "passed": self.passed, "margin": self.margin}


def _lt(name, lhs, rhs):
    return Condition(name, float(lhs), "<", float(rhs), bool(lhs < rhs),
                     float(rhs - lhs))


def _gt(name, lhs, rhs):
    return Condition(name, float(lhs), ">", float(rhs), bool(lhs > rhs),
                     float(lhs - rhs))


@dataclass
class FrameworkReport:
    framework: str
    conditions: list

    @property
    def overall(self):
        return all(c.passed for c in self.conditions)

    def as_dict(self):
        return {"framework": self.framework, "overall": self.overall,
                "conditions": [c.as_dict() for c in self.conditions]}

    def condition(self, name):
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)


def _initial_functionals(p, init, reduced):
    """G(0), Gdot(0), M1 and max_j |v_j(0)| for the framework checks.

    reduced=True evaluates Gdot on the rotation-adjusted velocities v_j,
    matching the common-frequency reduction under which the homogeneous
    frameworks are stated; reduced=False (heterogeneous framework) uses the
    physical dz/dt.
    """
    z, w = init.z, init.w
    v = velocity_v(p, z, w)
    g0 = diag.aggregation_G(z)
    gd0 = diag.aggregation_Gdot(z, v if reduced else w)
    m1 = max(float(np.max(np.linalg.norm(v, axis=1))),
             2.0 * (p.kappa0 + p.kappa1) / p.gamma)
    r3 = float(np.max(np.linalg.norm(v, axis=1)))
    return g0, gd0, m1, r3


def _require_inertial(p, who):
    if p.m <= 0:
        raise ValidationError("%s: the framework applies to the inertial model (m > 0)" % who)


def check_framework_A(p, init):
    """Overdamped sufficient conditions for complete aggregation
    (homogeneous ensembles only)."""
    _require_inertial(p, "check_framework_A")
    if not p.homogeneous:
        raise ValidationError("check_framework_A: homogeneous ensembles only; "
                              "use check_framework_C for mixed frequencies")
    g0, gd0, m1, _ = _initial_functionals(p, init, reduced=True)
    disc = p.gamma ** 2 - 16.0 * p.m * p.kappa0 * p.delta
    plateau = (8.0 * p.kappa1 + 16.0 * p.m * m1 ** 2) / (4.0 * p.kappa0 * p.delta)
    threshold = (1.0 - p.delta) ** 2 / p.N
    conds = [_gt("discriminant_positive", disc, 0.0),
             _lt("G0_below_plateau", g0, plateau),
             _lt("plateau_below_threshold", plateau, threshold)]
    if disc > 0:
        nu1 = (p.gamma + disc ** 0.5) / (2.0 * p.m)
        conds.append(_lt("slope_condition", gd0 + nu1 * g0, nu1 * plateau))
    else:
        conds.append(Condition("slope_condition", float("nan"), "<", float("nan"),
                               False, float("nan")))
    return FrameworkReport("A", conds)


def check_framework_B(p, init):
    """Underdamped sufficient conditions for complete aggregation
    (homogeneous ensembles only)."""
    _require_inertial(p, "check_framework_B")
    if not p.homogeneous:
        raise ValidationError("check_framework_B: homogeneous ensembles only; "
                              "use check_framework_C for mixed frequencies")
    g0, gd0, m1, _ = _initial_functionals(p, init, reduced=True)
    disc = p.gamma ** 2 - 16.0 * p.m * p.kappa0 * p.delta
    base = 8.0 * p.kappa1 + 16.0 * p.m * m1 ** 2
    plateau = (4.0 * p.m / p.gamma ** 2) * base
    threshold = (1.0 - p.delta) ** 2 / p.N
    conds = [_lt("discriminant_negative", disc, 0.0),
             _lt("G0_below_plateau", g0, plateau),
             _lt("plateau_below_threshold", plateau, threshold),
             _lt("slope_condition",
                 gd0 + (p.gamma / (2.0 * p.m)) * g0,
                 (2.0 / p.gamma) * base)]
    return FrameworkReport("B", conds)


def check_framework_C(p, init):
    """Overdamped sufficient conditions for practical aggregation;
    heterogeneous frequency matrices allowed."""
    _require_inertial(p, "check_framework_C")
    g0, gd0, _, r3 = _initial_functionals(p, init, reduced=False)
    disc = p.gamma ** 2 - 16.0 * p.m * p.kappa0 * p.delta
    om = p.omega_inf
    u = 4.0 * om + 8.0 * p.kappa1 + (16.0 * p.m / p.gamma ** 2) \
        * (om + 2.0 * (p.kappa0 + p.kappa1)) ** 2
    plateau = u / (4.0 * p.kappa0 * p.delta)
    threshold = (1.0 - p.delta) ** 2 / p.N
    conds = [_gt("discriminant_positive", disc, 0.0),
             _lt("initial_velocity_bound", r3,
                 2.0 * (p.kappa0 + p.kappa1) / p.gamma),
             _lt("G0_below_plateau", g0, plateau),
             _lt("plateau_below_threshold", plateau, threshold)]
    if disc > 0:
        nu1 = (p.gamma + disc ** 0.5) / (2.0 * p.m)
        conds.append(_lt("slope_condition", gd0 + nu1 * g0, nu1 * plateau))
    else:
        conds.append(Condition("slope_condition", float("nan"), "<", float("nan"),
                               False, float("nan")))
    return FrameworkReport("C", conds)


@dataclass
class GronwallBound:
    """Coefficients of the comparison problem a y'' + b y' + c y + d = 0.

    case is derived from the discriminant sign when omitted; constructing a
    bound whose stated case contradicts b^2 - 4ac, or one within 1e-12 of the
    critically damped borderline, is refused.
    """

    a: float
    b: float
    c: float
    d: float
    y0: float
    ydot0: float
    case: str = None

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and self.c > 0):
            raise ValidationError("GronwallBound: a, b, c must be positive")
        disc = self.b ** 2 - 4.0 * self.a * self.c
        if abs(disc) <= _DISC_EPS:
            raise ValidationError(
                "GronwallBound: |b^2 - 4ac| = %.3g is critically damped; "
                "no closed-form envelope is provided there" % abs(disc))
        derived = "overdamped" if disc > 0 else "underdamped"
        if self.case is None:
            self.case = derived
        elif self.case != derived:
            raise ValidationError(
                "GronwallBound: case %r contradicts discriminant %.3g"
                % (self.case, disc))
        self.disc = disc


def gronwall_envelope(g, t):
    """Closed-form envelope value(s) at time(s) t for a GronwallBound.

    Overdamped: -d/c + (y0 + d/c) e^{-nu1 t}
                + (a/sqrt(disc)) (ydot0 + nu1 y0 + 2d/(b - sqrt(disc)))
                  (e^{-nu2 t} - e^{-nu1 t}).
    Underdamped: -4ad/b^2 + e^{-bt/2a} [y0 + 4ad/b^2
                + ((b/2a) y0 + ydot0 + 2d/b) t].
    Scalar in, scalar out; arrays vectorize.
    """
    t_arr = np.asarray(t, dtype=float)
    a, b, c, d = g.a, g.b, g.c, g.d
    if g.case == "overdamped":
        root = g.disc ** 0.5
        nu1 = (b + root) / (2.0 * a)
        nu2 = (b - root) / (2.0 * a)
        amp = (a / root) * (g.ydot0 + nu1 * g.y0 + 2.0 * d / (b - root))
        out = (-d / c + (g.y0 + d / c) * np.exp(-nu1 * t_arr)
               + amp * (np.exp(-nu2 * t_arr) - np.exp(-nu1 * t_arr)))
    else:
        shift = 4.0 * a * d / b ** 2
        slope = (b / (2.0 * a)) * g.y0 + g.ydot0 + 2.0 * d / b
        out = -shift + np.exp(-b * t_arr / (2.0 * a)) * (g.y0 + shift + slope * t_arr)
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(out)
    return out


def framework_envelope(p, init, framework="A"):
    """GronwallBound for the aggregation functional under a framework.

    Coefficients are (m, gamma, 4 kappa0 delta) with forcing -d equal to the
    framework's constant right-hand side: 8 kappa1 + 16 m M1^2 for A and B,
    the heterogeneous constant U for C.  Initial data are G(0) and the
    analytic Gdot(0) in the same variables the corresponding checker uses.
    """
    _require_inertial(p, "framework_envelope")
    if framework in ("A", "B"):
        if not p.homogeneous:
            raise ValidationError("framework_envelope: %s needs a homogeneous ensemble"
                                  % framework)
        g0, gd0, m1, _ = _initial_functionals(p, init, reduced=True)
        forcing = 8.0 * p.kappa1 + 16.0 * p.m * m1 ** 2
    elif framework == "C":
        g0, gd0, _, _ = _initial_functionals(p, init, reduced=False)
        om = p.omega_inf
        forcing = 4.0 * om + 8.0 * p.kappa1 + (16.0 * p.m / p.gamma ** 2) \
            * (om + 2.0 * (p.kappa0 + p.kappa1)) ** 2
    else:
        raise ValidationError("framework_envelope: unknown framework %r" % framework)
    return GronwallBound(a=p.m, b=p.gamma, c=4.0 * p.kappa0 * p.delta,
                         d=-forcing, y0=g0, ydot0=gd0)


@dataclass
class InequalityReport:
    """Outcome of checking a proven differential inequality along a run."""

    variant: str
    slack: float
    n_interior: int
    max_residual: float
    time_of_max: float
    n_violations: int
    times: np.ndarray = field(repr=False)
    residual: np.ndarray = field(repr=False)

    @property
    def passed(self):
        return self.max_residual <= self.slack

    def as_dict(self):
        return {"variant": self.variant, "slack": self.slack,
                "n_interior": self.n_interior,
                "max_residual": self.max_residual,
                "time_of_max": self.time_of_max,
                "n_violations": self.n_violations,
                "passed": self.passed}


def verify_inequality_F26(traj, p=None, slack=None, variant="auto"):
    """Check the second-order differential inequality for G along a run.

    Homogeneous variant:    m G'' + gamma G' + 4 kappa0 G
                            <= 4 kappa0 sqrt(N) G^{3/2} + 2 kappa1 R2 + 16 m R1.
    Heterogeneous variant adds the frequency-spread forcing instead:
                            ... <= 4 kappa0 sqrt(N) G^{3/2}
                                 + (4 m Om/gamma)(R3 + sqrt(R1))
                                 + 12 m R1 + 4 m R3^2 + 4 Om + 8 kappa1.
    G'' comes from central differences of the analytic G' samples, so the run
    must be uniformly and densely sampled (observe_every=1 recommended).
    Residual = lhs - rhs at interior samples; the report counts residuals
    beyond slack (default 1e-3 * max(1, kappa0)).
    """
    if p is None:
        p = traj.params
    times = np.asarray(traj.times, dtype=float)
    if len(times) < 3:
        raise ValidationError("verify_inequality_F26: need at least 3 samples")
    h = np.diff(times)
    h0 = float(h[0])
    if h0 <= 0 or float(np.max(np.abs(h - h0))) > 1e-9 * max(h0, 1.0):
        raise ValidationError("verify_inequality_F26: samples must be uniformly spaced")
    if variant == "auto":
        variant = "homogeneous" if p.homogeneous else "heterogeneous"
    if variant not in ("homogeneous", "heterogeneous"):
        raise ValidationError("verify_inequality_F26: unknown variant %r" % variant)
    if slack is None:
        slack = 1e-3 * max(1.0, p.kappa0)

    series = diag.build_series(p, times, traj.Z, traj.W)
    G = series.G
    Gd = series.Gdot
    Gdd = (Gd[2:] - Gd[:-2]) / (2.0 * h0)
    mid = slice(1, -1)
    lhs = p.m * Gdd + p.gamma * Gd[mid] + 4.0 * p.kappa0 * G[mid]
    rhs = 4.0 * p.kappa0 * np.sqrt(p.N) * G[mid] ** 1.5
    if variant == "homogeneous":
        rhs = rhs + 2.0 * p.kappa1 * series.R2[mid] + 16.0 * p.m * series.R1[mid]
    else:
        om = p.omega_inf
        r1 = series.R1[mid]
        r3 = series.R3[mid]
        rhs = rhs + (4.0 * p.m * om / p.gamma) * (r3 + np.sqrt(r1)) \
            + 12.0 * p.m * r1 + 4.0 * p.m * r3 ** 2 + 4.0 * om + 8.0 * p.kappa1
    residual = lhs - rhs
    k = int(np.argmax(residual))
    return InequalityReport(
        variant=variant, slack=float(slack), n_interior=int(residual.size),
        max_residual=float(residual[k]), time_of_max=float(times[1 + k]),
        n_violations=int(np.sum(residual > slack)),
        times=times[mid].copy(), residual=residual)


def practical_bound(p):
    """Uniform asymptotic ceiling for G under the heterogeneous framework:
    (Om + 2 kappa1)/(kappa0 delta) + 4 m [Om + 2(kappa0+kappa1)]^2 / (gamma^2 kappa0 delta).
    """
    if p.kappa0 <= 0:
        raise ValidationError("practical_bound: kappa0 must be positive")
    om = p.omega_inf
    return (om + 2.0 * p.kappa1) / (p.kappa0 * p.delta) \
        + 4.0 * p.m * (om + 2.0 * (p.kappa0 + p.kappa1)) ** 2 \
        / (p.gamma ** 2 * p.kappa0 * p.delta)


def practical_bound_simplified(p, m0, eta):
    """Large-coupling form of practical_bound under the inertia ansatz
    m = m0 / kappa0^(1+eta):
    (Om + 2 kappa1)/(kappa0 delta) + 64 m0 / (gamma^2 delta kappa0^eta).

    Dominates the full bound once kappa0 >= max(Om, 2 kappa1).  Refuses
    params whose m does not actually follow the ansatz.
    """
    if p.kappa0 <= 0:
        raise ValidationError("practical_bound_simplified: kappa0 must be positive")
    expected_m = m0 / p.kappa0 ** (1.0 + eta)
    if abs(p.m - expected_m) > 1e-12 * max(1.0, abs(expected_m)):
        raise ValidationError(
            "practical_bound_simplified: params have m = %.6g but the ansatz "
            "gives %.6g; pass the m0, eta actually used" % (p.m, expected_m))
    om = p.omega_inf
    return (om + 2.0 * p.kappa1) / (p.kappa0 * p.delta) \
        + 64.0 * m0 / (p.gamma ** 2 * p.delta * p.kappa0 ** eta)
