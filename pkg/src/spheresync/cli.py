"""Command line entry points: single scenario runs and coupling sweeps.

Exit codes: 0 all requested checks passed, 1 a check failed (or a sweep point
errored), 2 config parse problems, 3 parameter or state validation problems,
4 runtime failures (integration aborts, unwritable output).
"""

import argparse
import copy
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict, replace

import numpy as np

from .certificates import practical_bound, practical_bound_simplified
from .checks import run_checks
from .config import build_scenario, load_config, load_raw
from .errors import ConfigError, IntegrationError, ValidationError
from .integrator import default_dt, simulate

_CSV_FIELDS = ("t", "G", "Gdot", "energy", "rho", "DZ", "DW",
               "R1", "R2", "R3", "JM", "norm_drift")
_ENV_OUTPUT = "SPHERESYNC_OUTPUT_DIR"


def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return "%.17g" % x


def _jsonable(obj):
    """Recursively make a structure strict-JSON safe (NaN -> null)."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return None if not math.isfinite(x) else x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _resolve_output_dir(flag_value, cfg_value):
    out = flag_value or cfg_value or os.environ.get(_ENV_OUTPUT) or "spheresync_runs"
    os.makedirs(out, exist_ok=True)
    return out


@dataclass
class RunSummary:
    run_id: str
    model: str
    backend: str
    n_samples: int
    wall_time_s: float
    final: dict
    checks: list
    all_passed: bool
    outputs: dict

    def as_dict(self):
        return _jsonable(asdict(self))


def write_series_csv(path, traj, series):
    drift = traj.norm_drift
    with open(path, "w", newline="") as fh:
        fh.write(",".join(_CSV_FIELDS) + "\n")
        for i in range(len(series)):
            row = [getattr(series, name)[i] for name in _CSV_FIELDS[:-1]]
            row.append(drift[i])
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _execute(cfg, run_id, outdir):
    """Integrate one scenario, run its checks, write CSV + JSON outputs."""
    t0 = time.perf_counter()
    traj = simulate(cfg.params, cfg.init, cfg.integrator, cfg.model)
    series = traj.diagnostics
    results = run_checks(cfg, traj, series)
    wall = time.perf_counter() - t0

    csv_path = os.path.join(outdir, run_id + "_series.csv")
    json_path = os.path.join(outdir, run_id + "_summary.json")
    write_series_csv(csv_path, traj, series)

    summary = RunSummary(
        run_id=run_id,
        model=cfg.model,
        backend=traj.backend,
        n_samples=traj.n_samples,
        wall_time_s=wall,
        final=asdict(series.record(len(series) - 1)),
        checks=[r.as_dict() for r in results],
        all_passed=all(r.passed for r in results),
        outputs={"series_csv": csv_path, "summary_json": json_path},
    )
    with open(json_path, "w") as fh:
        json.dump(summary.as_dict(), fh, indent=2, allow_nan=False)
        fh.write("\n")
    return summary, results, series


def run_scenario(config_path, output_dir=None, quiet=False):
    cfg = load_config(config_path)
    run_id = os.path.splitext(os.path.basename(config_path))[0]
    outdir = _resolve_output_dir(output_dir, cfg.output)
    summary, results, _ = _execute(cfg, run_id, outdir)
    if not quiet:
        print("run %s: %d samples, backend %s, %.2fs"
              % (run_id, summary.n_samples, summary.backend,
                 summary.wall_time_s))
        for r in results:
            print("  check %s: %s" % (r.name, "PASS" if r.passed else "FAIL"))
        print("  wrote %s" % summary.outputs["series_csv"])
        print("  wrote %s" % summary.outputs["summary_json"])
    return summary


def _sweep_point(payload):
    """Worker for one sweep grid point; must stay top level for pickling."""
    run_id, raw, outdir, target, ansatz = payload
    row = {"kappa0": raw["params"]["kappa0"], "m": raw["params"]["m"],
           "tail_G": float("nan"), "practical_bound": float("nan"),
           "error": None, "run_id": run_id}
    try:
        cfg = build_scenario(raw)
        p = cfg.params
        dt = cfg.integrator.dt if cfg.integrator.dt is not None else default_dt(p)
        n_steps = int(round(cfg.integrator.t_end / dt))
        observe = max(1, n_steps // target)
        integ = replace(cfg.integrator, dt=dt, observe_every=observe)
        cfg = replace(cfg, integrator=integ)
        _, _, series = _execute(cfg, run_id, outdir)
        n_tail = max(1, int(np.ceil(0.2 * len(series))))
        row["tail_G"] = float(np.max(series.G[-n_tail:]))
        if ansatz is not None:
            row["practical_bound"] = practical_bound_simplified(p, *ansatz)
        else:
            row["practical_bound"] = practical_bound(p)
    except Exception as exc:
        row["error"] = "%s: %s" % (type(exc).__name__, exc)
    return row


def run_sweep(config_path, output_dir=None, workers=None, quiet=False):
    raw = load_raw(config_path)
    cfg = build_scenario(raw)
    if cfg.sweep is None:
        raise ConfigError("sweep command needs a [sweep] section in the config")
    stem = os.path.splitext(os.path.basename(config_path))[0]
    outdir = _resolve_output_dir(output_dir, cfg.output)

    sw = cfg.sweep
    ansatz = (sw["m0"], sw["eta"]) if sw["m0"] is not None else None
    payloads = []
    for idx, k0 in enumerate(sw["kappa0"]):
        point = copy.deepcopy(raw)
        point.pop("sweep", None)
        point["params"]["kappa0"] = k0
        if ansatz is not None:
            m0, eta = ansatz
            point["params"]["m"] = m0 / k0 ** (1.0 + eta)
        point.setdefault("integrator", {}).pop("dt", None)
        run_id = "%s_p%02d" % (stem, idx)
        payloads.append((run_id, point, outdir, sw["target_samples"], ansatz))

    if workers is not None and workers == 1:
        rows = [_sweep_point(pl) for pl in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, payloads))

    csv_path = os.path.join(outdir, stem + "_sweep.csv")
    json_path = os.path.join(outdir, stem + "_sweep.json")
    with open(csv_path, "w", newline="") as fh:
        fh.write("kappa0,m,tail_G,practical_bound\n")
        for row in rows:
            fh.write(",".join(_fmt(row[k]) for k in
                              ("kappa0", "m", "tail_G", "practical_bound")) + "\n")
    with open(json_path, "w") as fh:
        json.dump(_jsonable({"points": rows}), fh, indent=2, allow_nan=False)
        fh.write("\n")

    if not quiet:
        print("sweep %s: %d points" % (stem, len(rows)))
        print("  %-12s %-12s %-14s %-14s" % ("kappa0", "m", "tail_G", "bound"))
        for row in rows:
            if row["error"]:
                print("  %-12g ERROR %s" % (row["kappa0"], row["error"]))
            else:
                print("  %-12g %-12g %-14.6g %-14.6g"
                      % (row["kappa0"], row["m"], row["tail_G"],
                         row["practical_bound"]))
        print("  wrote %s" % csv_path)
    return rows, csv_path


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="spheresync",
        description="Integrate sphere-synchronization scenarios and check "
                    "their certificates.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="integrate one scenario and run checks")
    run_p.add_argument("config", help="scenario TOML file")
    sweep_p = sub.add_parser("sweep", help="run a coupling-strength sweep")
    sweep_p.add_argument("config", help="scenario TOML file with a [sweep] section")
    sweep_p.add_argument("--workers", type=int, default=None,
                         help="worker processes (default: one per core)")
    for sp in (run_p, sweep_p):
        sp.add_argument("--output-dir", default=None,
                        help="where to write CSV/JSON (default: config, then "
                             "$%s, then ./spheresync_runs)" % _ENV_OUTPUT)
        sp.add_argument("--quiet", action="store_true",
                        help="suppress progress output")
    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            summary = run_scenario(args.config, args.output_dir, args.quiet)
            return 0 if summary.all_passed else 1
        rows, _ = run_sweep(args.config, args.output_dir, args.workers,
                            args.quiet)
        return 1 if any(r["error"] for r in rows) else 0
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except ValidationError as exc:
        print("validation error: %s" % exc, file=sys.stderr)
        return 3
    except (IntegrationError, OSError) as exc:
        print("runtime error: %s" % exc, file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
