"""Named scenario checks shared by the CLI and the test suite.

Each check consumes the finished trajectory plus its diagnostics series and
returns a CheckResult whose details dict is JSON-ready.  Data-dependent
refusals (for example a critically damped envelope) fail the check with an
error message instead of aborting the run.
"""

from dataclasses import dataclass

import numpy as np

from . import certificates as cert
from . import stability as stab
from .errors import ValidationError
from .integrator import simulate
from .model import EnsembleState, kuramoto_embed

_BOUND_SLACK = 1e-9
_ENVELOPE_SLACK = 1e-6
_ENERGY_STEP_SLACK = 1e-8
_GAUGE_TOL = 1e-6
_KURAMOTO_TOL = 1e-6


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict

    def as_dict(self):
        return {"name": self.name, "passed": self.passed, "details": self.details}


def _framework_result(name, report, series, plateau):
    sup_g = float(np.max(series.G))
    within = sup_g < plateau + _BOUND_SLACK
    details = report.as_dict()
    details["trajectory"] = {"sup_G": sup_g, "plateau": plateau,
                             "within_bound": bool(within)}
    return CheckResult(name, bool(report.overall and within), details)


def check_framework_A(cfg, traj, series):
    p = cfg.params
    report = cert.check_framework_A(p, cfg.init)
    plateau = report.condition("G0_below_plateau").rhs
    return _framework_result("framework_A", report, series, plateau)


def check_framework_B(cfg, traj, series):
    p = cfg.params
    report = cert.check_framework_B(p, cfg.init)
    plateau = report.condition("G0_below_plateau").rhs
    return _framework_result("framework_B", report, series, plateau)


def check_framework_C(cfg, traj, series):
    p = cfg.params
    report = cert.check_framework_C(p, cfg.init)
    plateau = report.condition("G0_below_plateau").rhs
    return _framework_result("framework_C", report, series, plateau)


def check_energy_monotone(cfg, traj, series):
    p = cfg.params
    if not series.has_energy:
        return CheckResult("energy_monotone", False,
                           {"error": "energy is not defined for this run"})
    E = series.energy
    worst_step = float(np.max(np.diff(E))) if len(E) > 1 else 0.0
    mono_ok = worst_step <= _ENERGY_STEP_SLACK
    details = {"max_step_increase": worst_step,
               "step_slack": _ENERGY_STEP_SLACK}
    f7_ok = True
    if len(E) >= 5:
        h = float(traj.times[1] - traj.times[0])
        dEdt = (-E[4:] + 8.0 * E[3:-1] - 8.0 * E[1:-3] + E[:-4]) / (12.0 * h)
        rho = series.rho[2:-2]
        resid = dEdt + (2.0 * p.gamma / p.m) * E[2:-2] \
            - (2.0 * p.kappa0 * p.gamma / p.m) * (1.0 - rho ** 2)
        scale = max(float(np.max(np.abs(E))), 1e-12)
        tol = 1e-4 * scale
        worst = float(np.max(np.abs(resid)))
        f7_ok = worst <= tol
        details["balance_residual_max"] = worst
        details["balance_residual_tol"] = tol
    else:
        details["balance_residual_max"] = None
    return CheckResult("energy_monotone", bool(mono_ok and f7_ok), details)


def check_gronwall_envelope(cfg, traj, series):
    p = cfg.params
    fw = "A" if p.homogeneous else "C"
    bound = cert.framework_envelope(p, cfg.init, fw)
    env = cert.gronwall_envelope(bound, traj.times - traj.times[0])
    exceed = float(np.max(series.G - env))
    return CheckResult("gronwall_envelope", bool(exceed <= _ENVELOPE_SLACK),
                       {"case": bound.case, "max_exceedance": exceed,
                        "slack": _ENVELOPE_SLACK,
                        "asymptote": -bound.d / bound.c})


def check_F26(cfg, traj, series):
    report = cert.verify_inequality_F26(traj, cfg.params)
    return CheckResult("F26", bool(report.passed), report.as_dict())


def check_practical_bound(cfg, traj, series):
    p = cfg.params
    bound = cert.practical_bound(p)
    sup_g = float(np.max(series.G))
    n_tail = max(1, int(np.ceil(0.2 * len(series))))
    tail_g = float(np.max(series.G[-n_tail:]))
    return CheckResult("practical_bound", bool(sup_g <= bound),
                       {"bound": bound, "sup_G": sup_g, "tail_G": tail_g})


def check_stability_incoherent(cfg, traj, series):
    p = cfg.params
    eq = stab.make_equilibrium(stab.EquilibriumSpec("incoherent", p.N, p.d))
    J = stab.jacobian_fd(p, eq)
    tr_num = stab.trace_Ms_numeric(J)
    tr_ana = stab.trace_Ms_analytic(p)
    blocks = stab.block_structure_residuals(p, J)
    trace_ok = abs(tr_num - tr_ana) <= 1e-5 * abs(tr_ana)
    blocks_ok = max(blocks.values()) <= 2e-8
    passed = trace_ok and blocks_ok and tr_num > 0
    return CheckResult("stability_incoherent", bool(passed),
                       {"trace_numeric": tr_num, "trace_analytic": tr_ana,
                        "block_residuals": blocks})


def check_stability_bipolar(cfg, traj, series):
    p = cfg.params
    grown = stab.measure_bipolar_growth(p, cfg.init_n)
    control = stab.measure_bipolar_growth(p, cfg.init_n, control=True)
    rel = abs(grown.fitted_rate - grown.predicted) / grown.predicted
    passed = rel <= 0.05 and control.fitted_rate < 0.05 * grown.predicted
    return CheckResult("stability_bipolar", bool(passed),
                       {"bipolar": grown.as_dict(), "control": control.as_dict(),
                        "relative_rate_error": rel})


def _wrap_angle(x):
    return (x + np.pi) % (2.0 * np.pi) - np.pi


def check_kuramoto_equivalence(cfg, traj, series):
    s0 = cfg.init
    z0 = kuramoto_embed(s0.theta)
    twin = simulate(cfg.params, EnsembleState(0.0, z0, np.zeros_like(z0)),
                    cfg.integrator, "first_order")
    phases = np.arctan2(twin.Z[:, :, 1].real, twin.Z[:, :, 0].real)
    diff = np.abs(_wrap_angle(traj.theta - phases))
    worst = float(np.max(diff))
    final = float(np.max(diff[-1]))
    return CheckResult("kuramoto_equivalence", bool(worst <= _KURAMOTO_TOL),
                       {"max_discrepancy": worst, "final_discrepancy": final,
                        "tolerance": _KURAMOTO_TOL})


def check_gauge_equivalence(cfg, traj, series):
    other = "gauge" if cfg.model == "second_order" else "second_order"
    twin = simulate(cfg.params, cfg.init, cfg.integrator, other)
    n = min(len(traj.times), len(twin.times))
    gap = np.linalg.norm(traj.Z[:n] - twin.Z[:n], axis=2)
    worst = float(np.max(gap))
    k = int(np.argmax(np.max(gap, axis=1)))
    return CheckResult("gauge_equivalence", bool(worst <= _GAUGE_TOL),
                       {"max_discrepancy": worst,
                        "time_of_max": float(traj.times[k]),
                        "tolerance": _GAUGE_TOL, "compared_against": other})


CHECKS = {
    "framework_A": check_framework_A,
    "framework_B": check_framework_B,
    "framework_C": check_framework_C,
    "energy_monotone": check_energy_monotone,
    "gronwall_envelope": check_gronwall_envelope,
    "F26": check_F26,
    "practical_bound": check_practical_bound,
    "stability_incoherent": check_stability_incoherent,
    "stability_bipolar": check_stability_bipolar,
    "kuramoto_equivalence": check_kuramoto_equivalence,
    "gauge_equivalence": check_gauge_equivalence,
}


def run_checks(cfg, traj, series):
    """Run the scenario's requested checks in order; each appears once."""
    results = []
    for name in cfg.checks:
        try:
            results.append(CHECKS[name](cfg, traj, series))
        except ValidationError as exc:
            results.append(CheckResult(name, False, {"error": str(exc)}))
    return results
