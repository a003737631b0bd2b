"""Acceptance checklist, one test per numbered criterion in the README.

Runs are sized for a laptop (the slowest single item is the kappa0 = 1000
sweep point, about two seconds).  Scenarios that have a shipped config under
configs/ are loaded from there so the checklist also covers those files.

test_c04b_underdamped_certificate is expected to fail: the underdamped
certificate conditions exclude each other for every parameter choice (the
algebra is in its docstring), and the suite keeps that visible rather than
weakening the requirement.
"""

import csv
import json
import pathlib

import numpy as np
import pytest

from conftest import random_ensemble
from spheresync import (EnsembleState, EquilibriumSpec, GronwallBound,
                        IntegratorConfig, ModelParams, bipolar_growth_rate,
                        block_structure_residuals, check_framework_A,
                        check_framework_B, framework_envelope,
                        gronwall_envelope, jacobian_fd, kuramoto_embed,
                        kuramoto_phases, load_config, make_equilibrium,
                        measure_bipolar_growth, simulate, trace_Ms_numeric,
                        verify_inequality_F26)
from spheresync.cli import main

CONFIGS = pathlib.Path(__file__).resolve().parents[1] / "configs"


def _scalar_solve(a, b, c, d, y0, ydot0, t_end, dt=1e-5):
    """RK4 reference solve of a y'' + b y' + c y + d = 0."""
    y, yd = y0, ydot0
    for _ in range(int(round(t_end / dt))):
        def acc(y_, yd_):
            return -(b * yd_ + c * y_ + d) / a
        k1y, k1v = yd, acc(y, yd)
        k2y, k2v = yd + 0.5 * dt * k1v, acc(y + 0.5 * dt * k1y, yd + 0.5 * dt * k1v)
        k3y, k3v = yd + 0.5 * dt * k2v, acc(y + 0.5 * dt * k2y, yd + 0.5 * dt * k2v)
        k4y, k4v = yd + dt * k3v, acc(y + dt * k3y, yd + dt * k3v)
        y += dt / 6 * (k1y + 2 * k2y + 2 * k3y + k4y)
        yd += dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return y


@pytest.fixture(scope="module")
def hetero_runs():
    """Direct and gauge-coordinate trajectories of the reference scenario."""
    cfg = load_config(str(CONFIGS / "hetero_reference.toml"))
    direct = simulate(cfg.params, cfg.init, cfg.integrator, "second_order")
    gauge = simulate(cfg.params, cfg.init, cfg.integrator, "gauge")
    return direct, gauge


@pytest.fixture(scope="module")
def cone_run():
    """Densely sampled long run of the aggregation-certificate scenario."""
    cfg = load_config(str(CONFIGS / "aggregation_certificate.toml"))
    traj = simulate(cfg.params, cfg.init, cfg.integrator, cfg.model)
    return cfg.params, cfg.init, traj, traj.diagnostics


def test_c01_norm_conservation(hetero_runs):
    direct, _ = hetero_runs
    assert direct.norm_drift.max() <= 1e-6


def test_c02_gauge_route_agrees(hetero_runs):
    direct, gauge = hetero_runs
    k = 500
    assert direct.times[k] == pytest.approx(5.0, abs=1e-12)
    gap = np.max(np.linalg.norm(direct.Z[k] - gauge.Z[k], axis=1))
    assert gap <= 1e-6


def test_c03_energy_dissipation():
    cfg = load_config(str(CONFIGS / "energy_dissipation.toml"))
    p = cfg.params
    traj = simulate(p, cfg.init, cfg.integrator, cfg.model)
    series = traj.diagnostics
    E, rho = series.energy, series.rho
    assert np.diff(E).max() <= 1e-8
    h = series.t[1] - series.t[0]
    dEdt = (-E[4:] + 8 * E[3:-1] - 8 * E[1:-3] + E[:-4]) / (12 * h)
    resid = dEdt + (2 * p.gamma / p.m) * E[2:-2] \
        - (2 * p.kappa0 * p.gamma / p.m) * (1.0 - rho[2:-2] ** 2)
    assert np.abs(resid).max() <= 1e-4


def test_c04a_overdamped_aggregation(cone_run):
    p, s0, traj, series = cone_run
    report = check_framework_A(p, s0)
    assert report.overall
    assert series.G[-1] <= 1e-6
    assert np.sqrt(series.R1[-1]) <= 1e-6
    assert series.rho[-1] >= 1.0 - 1e-6
    plateau = report.condition("G0_below_plateau").rhs
    assert series.G.max() < plateau


def test_c04b_underdamped_certificate():
    """Try to exhibit an underdamped aggregation certificate.

    The underdamped route needs gamma^2 < 16 m kappa0 delta together with
    plateau < (1 - delta)^2 / N, where

        plateau = (4 m / gamma^2) (8 kappa1 + 16 m M1^2),
        M1 >= 2 (kappa0 + kappa1) / gamma.

    Substituting the smallest admissible mass m > gamma^2 / (16 kappa0 delta)
    and the smallest possible M1 gives

        plateau > (4 / (16 kappa0 delta)) * 16 * (gamma^2 / (16 kappa0 delta))
                  * 4 kappa0^2 / gamma^2 = 1 / delta^2 > 1,

    while the target threshold is below (1 - delta)^2 <= 1.  The two
    conditions therefore exclude each other for every parameter choice, and
    the gap is at least a factor N / (delta^2 (1 - delta)^2) >= 16 N, so at
    least 32 for any ensemble with two or more particles.  The grid search
    below documents the obstruction numerically; the final assertion states
    the checklist requirement anyway and is expected to fail.
    """
    best = None
    for delta in np.linspace(0.05, 0.95, 19):
        for k0 in np.logspace(-3.0, 3.0, 25):
            for k1_frac in (0.0, 0.01, 0.1):
                k1 = k1_frac * k0
                m1 = 2.0 * (k0 + k1)
                for f in (1.0 + 1e-9, 1.5, 2.0, 4.0):
                    m = f / (16.0 * k0 * delta)
                    plateau = 4.0 * m * (8.0 * k1 + 16.0 * m * m1 ** 2)
                    for N in (2, 5, 20):
                        ratio = plateau * N / (1.0 - delta) ** 2
                        if best is None or ratio < best[0]:
                            best = (ratio, delta, k0, k1, m, N)
    ratio, delta, k0, k1, m, N = best
    assert ratio > 32.0 * (1.0 - 1e-9)

    p = ModelParams(N=N, d=1, m=m, gamma=1.0, kappa0=k0, kappa1=k1,
                    delta=delta)
    rng = np.random.default_rng(1)
    z = np.array([0.0, 1.0], complex)[None, :] \
        + 1e-3 * (rng.standard_normal((p.N, 2)) + 1j * rng.standard_normal((p.N, 2)))
    z /= np.linalg.norm(z, axis=1)[:, None]
    report = check_framework_B(p, EnsembleState(0.0, z, np.zeros_like(z)))
    failed = [c.name for c in report.conditions if not c.passed]
    assert report.overall, (
        "no underdamped certificate exists: best plateau/threshold ratio "
        "%.3f (delta=%.2f, kappa0=%.3g, m=%.3g, N=%d); failing conditions: %s"
        % (ratio, delta, k0, m, N, ", ".join(failed)))


def test_c05_envelope_domination(cone_run):
    p, s0, traj, series = cone_run
    env = framework_envelope(p, s0)
    vals = gronwall_envelope(env, series.t - series.t[0])
    assert np.max(series.G - vals) <= 1e-6

    overdamped = ((1.0, 3.0, 2.0, -2.0, 0.0, 0.0), (0.5, 3.0, 1.0, -0.7, 0.2, -0.1))
    for coeffs in overdamped:
        g = GronwallBound(*coeffs)
        for t in (0.4, 1.3):
            assert gronwall_envelope(g, t) == pytest.approx(
                _scalar_solve(*coeffs, t), abs=1e-8)
    a, b, c, d, y0, yd0 = 1.0, 1.0, 10.0, -2.0, 1.0, 0.0
    g = GronwallBound(a, b, c, d, y0, yd0)
    for t in (0.4, 1.3):
        comparison = _scalar_solve(a, b, b * b / (4 * a), d, y0, yd0, t)
        assert gronwall_envelope(g, t) == pytest.approx(comparison, abs=1e-8)


def test_c06_differential_inequality(cone_run):
    p, s0, traj, series = cone_run
    report = verify_inequality_F26(traj, p)
    assert report.passed
    assert report.n_violations == 0
    assert report.n_interior == traj.n_samples - 2


def test_c07_practical_aggregation_sweep(tmp_path):
    out = str(tmp_path)
    code = main(["sweep", str(CONFIGS / "practical_sweep.toml"),
                 "--output-dir", out, "--workers", "1", "--quiet"])
    assert code == 0
    with open(tmp_path / "practical_sweep_sweep.json") as fh:
        points = json.load(fh)["points"]
    assert [pt["error"] for pt in points] == [None, None, None]
    with open(tmp_path / "practical_sweep_sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    tails = [float(r["tail_G"]) for r in rows]
    bounds = [float(r["practical_bound"]) for r in rows]
    assert [float(r["kappa0"]) for r in rows] == [10.0, 100.0, 1000.0]
    assert tails[0] > tails[1] > tails[2]
    for tail, bound in zip(tails, bounds):
        assert tail <= bound

    # the recorded bound must be the closed form for the m0 = 1, eta = 1 ansatz
    cfg = load_config(str(CONFIGS / "practical_sweep.toml"))
    om = cfg.params.omega_inf
    for r in rows:
        k0 = float(r["kappa0"])
        expected = om / (k0 * 0.5) + 64.0 / (0.5 * k0)
        assert float(r["practical_bound"]) == pytest.approx(expected, rel=1e-12)


def test_c08_kuramoto_reduction():
    cfg = load_config(str(CONFIGS / "kuramoto_reference.toml"))
    trk = simulate(cfg.params, cfg.init, cfg.integrator, "kuramoto")
    z0 = kuramoto_embed(cfg.init.theta)
    s0 = EnsembleState(0.0, z0, np.zeros_like(z0))
    trf = simulate(cfg.params, s0, cfg.integrator, "first_order")
    diff = np.angle(np.exp(1j * (kuramoto_phases(trf.Z[-1]) - trk.theta[-1])))
    assert np.abs(diff).max() <= 1e-6


def test_c09_incoherent_jacobian():
    p = ModelParams(N=4, d=1, m=1.0, gamma=1.0, kappa0=1.0, kappa1=0.5)
    eq = make_equilibrium(EquilibriumSpec("incoherent", 4, 1))
    J = jacobian_fd(p, eq)
    assert abs(trace_Ms_numeric(J) - 5.0) <= 1e-5
    assert max(block_structure_residuals(p, J).values()) <= 2e-8


def test_c10_bipolar_growth():
    p = ModelParams(N=5, d=1, m=1.0, gamma=1.0, kappa0=1.0, kappa1=0.0)
    lam = bipolar_growth_rate(p, 5, 1)
    assert lam == pytest.approx(0.70416, abs=5e-6)
    grown = measure_bipolar_growth(p, 1, eps=1e-5, dt=1e-3, t_end=8.0)
    assert grown.kind == "bipolar"
    assert abs(grown.fitted_rate - lam) / lam <= 0.05
    control = measure_bipolar_growth(p, 1, eps=1e-5, dt=1e-3, t_end=8.0,
                                     control=True)
    assert control.fitted_rate < 0.0


def test_c11_trichotomy():
    cfg = load_config(str(CONFIGS / "bipolar_rest.toml"))
    traj = simulate(cfg.params, cfg.init, cfg.integrator, cfg.model)
    rho = traj.diagnostics.rho
    assert np.abs(rho - 0.6).max() <= 1e-8

    p = ModelParams(N=6, d=2, m=0.5, gamma=1.0, kappa0=1.0, kappa1=0.2)
    s0 = random_ensemble(p, seed=33)
    traj = simulate(p, s0, IntegratorConfig(t_end=50.0, dt=1e-3,
                                            observe_every=50), "second_order")
    assert traj.diagnostics.rho[-1] >= 1.0 - 1e-4


def test_c12_first_order_decay():
    cfg = load_config(str(CONFIGS / "first_order_decay.toml"))
    p = cfg.params
    assert p.kappa0 > 2 * p.kappa1
    traj = simulate(p, cfg.init, cfg.integrator, cfg.model)
    JM = traj.diagnostics.JM
    assert JM[0] < np.sqrt(1.0 - 2.0 * p.kappa1 / p.kappa0)
    assert np.all(np.diff(JM) < 0.0)
    mask = (traj.times >= 2.0) & (traj.times <= 10.0)
    rate = np.polyfit(traj.times[mask], np.log(JM[mask]), 1)[0]
    print("first-order worst-pair decay: fitted exponential rate %.4f "
          "(no target value asserted)" % rate)
    assert rate < 0.0
