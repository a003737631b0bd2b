"""TOML scenario configs: strict schema, deterministic construction.

Unknown keys anywhere are ConfigErrors (catches typos before a long run), as
are missing required keys and wrong types.  Everything random is driven by
seeds in the file, so a config fully determines its outputs.

Schema (see README for a walkthrough):

    model = "second_order"            # second_order | first_order | gauge | kuramoto
    output = "runs/demo"              # optional
    checks = ["framework_A"]          # optional list

    [params]                          # required except for model = "kuramoto"
    N, d, m, gamma, kappa0, kappa1 = ...; delta = 0.5
    [params.omega]                    # optional; omitted means zero
    kind = "zero" | "random" | "kuramoto" | "explicit"
    scale, seed, common = ...         # random
    nus = [...]                       # kuramoto
    entries = nested [re, im]         # explicit, shape N x (d+1) x (d+1)

    [init]
    kind = "random" | "aggregated" | "bipolar" | "incoherent" | "explicit" | "cone"
    seed = ...                        # random, cone; also w_scale for tangent speeds
    sigma = ...                       # cone half-width
    n = ...                           # bipolar minority size
    z, w = nested [re, im]            # explicit
    theta = [...]                     # kuramoto model

    [kuramoto]                        # kuramoto model only
    kappa = ...; nus = [...]

    [integrator]
    t_end = ...; dt = ...; observe_every = 1; renormalize = false
    drift_tolerance = 1e-6

    [sweep]                           # sweep command only
    kappa0 = [...]; m0, eta = ...     # inertia ansatz m = m0 / kappa0^(1+eta)
    target_samples = 4000
"""

from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import model as _model
from . import stability as _stability
from .errors import ConfigError, ValidationError
from .integrator import IntegratorConfig
from .linalg import random_skew_hermitian, random_unit_vector
from .model import EnsembleState, KuramotoState, ModelParams

CHECK_NAMES = ("framework_A", "framework_B", "framework_C", "energy_monotone",
               "gronwall_envelope", "F26", "practical_bound",
               "stability_incoherent", "stability_bipolar",
               "kuramoto_equivalence", "gauge_equivalence")

_MODELS = ("second_order", "first_order", "gauge", "kuramoto")


def _where(path):
    return ".".join(path) if path else "top level"


def _check_keys(table, allowed, path):
    for key in table:
        if key not in allowed:
            raise ConfigError("unknown key '%s' in %s (allowed: %s)"
                              % (key, _where(path), ", ".join(sorted(allowed))))


def _get(table, key, types, path, required=True, default=None):
    if key not in table:
        if required:
            raise ConfigError("missing required key '%s' in %s" % (key, _where(path)))
        return default
    val = table[key]
    if types is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if types is int and isinstance(val, bool):
        raise ConfigError("key '%s' in %s must be an integer, got a boolean"
                          % (key, _where(path)))
    if not isinstance(val, types if isinstance(types, tuple) else (types,)):
        raise ConfigError("key '%s' in %s has wrong type %s"
                          % (key, _where(path), type(val).__name__))
    return val


def _float_list(table, key, path, required=True):
    val = _get(table, key, list, path, required=required)
    if val is None:
        return None
    try:
        return [float(x) for x in val]
    except (TypeError, ValueError):
        raise ConfigError("key '%s' in %s must be a list of numbers"
                          % (key, _where(path)))


def _complex_array(raw, shape, key, path):
    """Nested [re, im] lists into a complex array of the given shape."""
    arr = np.asarray(raw, dtype=float)
    expected = shape + (2,)
    if arr.shape != expected:
        raise ConfigError("key '%s' in %s must have nested shape %s of [re, im] "
                          "pairs, got %s" % (key, _where(path), expected, arr.shape))
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass
class ScenarioConfig:
    model: str
    params: object            # ModelParams; None only for pure kuramoto runs
    init: object              # EnsembleState or KuramotoState
    integrator: IntegratorConfig
    checks: list
    output: str
    sweep: dict               # None unless a [sweep] section was present
    init_kind: str
    init_n: int               # bipolar minority size when init_kind == "bipolar"


def load_raw(path):
    """Read a scenario file into a plain dict, mapping IO and syntax errors."""
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config %s is not valid TOML: %s" % (path, exc))


def load_config(path):
    """Parse and validate a scenario file into a ScenarioConfig."""
    return build_scenario(load_raw(path))


def build_scenario(raw):
    _check_keys(raw, {"model", "output", "checks", "params", "init",
                      "kuramoto", "integrator", "sweep"}, [])
    model = _get(raw, "model", str, [])
    if model not in _MODELS:
        raise ConfigError("model must be one of %s, got '%s'"
                          % (", ".join(_MODELS), model))
    output = _get(raw, "output", str, [], required=False)
    checks = _get(raw, "checks", list, [], required=False, default=[])
    for name in checks:
        if name not in CHECK_NAMES:
            raise ConfigError("unknown check '%s' (known: %s)"
                              % (name, ", ".join(CHECK_NAMES)))
    if len(set(checks)) != len(checks):
        raise ConfigError("checks list contains duplicates")

    integ = _integrator_config(raw)
    sweep = _sweep_config(raw) if "sweep" in raw else None

    if model == "kuramoto":
        if "params" in raw:
            raise ConfigError("model = 'kuramoto' takes a [kuramoto] section, "
                              "not [params]")
        init = _kuramoto_init(raw)
        params = _model.kuramoto_equivalent_params(init)
        cfg = ScenarioConfig(model, params, init, integ, list(checks), output,
                             sweep, init_kind="kuramoto", init_n=None)
    else:
        params = _params_from(raw)
        init, kind, n = _ensemble_init(raw, params, model)
        cfg = ScenarioConfig(model, params, init, integ, list(checks), output,
                             sweep, init_kind=kind, init_n=n)
    _validate_checks(cfg)
    return cfg


def _params_from(raw):
    if "params" not in raw:
        raise ConfigError("missing required section [params]")
    tab = raw["params"]
    path = ["params"]
    _check_keys(tab, {"N", "d", "m", "gamma", "kappa0", "kappa1", "delta",
                      "omega"}, path)
    N = _get(tab, "N", int, path)
    d = _get(tab, "d", int, path)
    m = _get(tab, "m", float, path)
    gamma = _get(tab, "gamma", float, path)
    kappa0 = _get(tab, "kappa0", float, path)
    kappa1 = _get(tab, "kappa1", float, path)
    delta = _get(tab, "delta", float, path, required=False, default=0.5)
    omegas = _omegas_from(tab.get("omega"), N, d)
    try:
        return ModelParams(N=N, d=d, m=m, gamma=gamma, kappa0=kappa0,
                           kappa1=kappa1, delta=delta, omegas=omegas)
    except ValidationError as exc:
        raise ConfigError("invalid [params]: %s" % exc)


def _omegas_from(tab, N, d):
    if tab is None:
        return None
    path = ["params", "omega"]
    kind = _get(tab, "kind", str, path)
    D = d + 1
    if kind == "zero":
        _check_keys(tab, {"kind"}, path)
        return None
    if kind == "random":
        _check_keys(tab, {"kind", "scale", "seed", "common"}, path)
        scale = _get(tab, "scale", float, path)
        seed = _get(tab, "seed", int, path)
        common = _get(tab, "common", bool, path, required=False, default=False)
        rng = np.random.default_rng(seed)
        if common:
            om = random_skew_hermitian(rng, d, scale)
            return np.broadcast_to(om, (N, D, D)).copy()
        return np.stack([random_skew_hermitian(rng, d, scale) for _ in range(N)])
    if kind == "kuramoto":
        _check_keys(tab, {"kind", "nus"}, path)
        if d != 1:
            raise ConfigError("[params.omega] kind 'kuramoto' needs d = 1")
        nus = _float_list(tab, "nus", path)
        if len(nus) != N:
            raise ConfigError("[params.omega] nus must list N = %d values" % N)
        return _model.kuramoto_omegas(np.asarray(nus))
    if kind == "explicit":
        _check_keys(tab, {"kind", "entries"}, path)
        entries = _get(tab, "entries", list, path)
        return _complex_array(entries, (N, D, D), "entries", path)
    raise ConfigError("[params.omega] kind must be zero, random, kuramoto, "
                      "or explicit, got '%s'" % kind)


def _ensemble_init(raw, p, model):
    if "init" not in raw:
        raise ConfigError("missing required section [init]")
    tab = raw["init"]
    path = ["init"]
    kind = _get(tab, "kind", str, path)
    D = p.D
    n = None
    if kind == "random":
        _check_keys(tab, {"kind", "seed", "w_scale"}, path)
        seed = _get(tab, "seed", int, path)
        w_scale = _get(tab, "w_scale", float, path, required=False, default=0.0)
        rng = np.random.default_rng(seed)
        z = np.stack([random_unit_vector(rng, p.d) for _ in range(p.N)])
        w = _random_admissible_w(p, z, rng, w_scale)
    elif kind == "cone":
        _check_keys(tab, {"kind", "seed", "sigma", "w_scale"}, path)
        seed = _get(tab, "seed", int, path)
        sigma = _get(tab, "sigma", float, path)
        w_scale = _get(tab, "w_scale", float, path, required=False, default=0.0)
        rng = np.random.default_rng(seed)
        anchor = np.zeros(D, dtype=complex)
        anchor[D - 1] = 1.0
        z = anchor[None, :] + sigma * (rng.standard_normal((p.N, D))
                                       + 1j * rng.standard_normal((p.N, D)))
        z = z / np.linalg.norm(z, axis=1)[:, None]
        w = _random_admissible_w(p, z, rng, w_scale)
    elif kind in ("aggregated", "bipolar", "incoherent"):
        allowed = {"kind", "n"} if kind == "bipolar" else {"kind"}
        _check_keys(tab, allowed, path)
        if kind == "bipolar":
            n = _get(tab, "n", int, path)
        try:
            spec = _stability.EquilibriumSpec(kind, p.N, p.d, n=n)
        except ValidationError as exc:
            raise ConfigError("invalid [init]: %s" % exc)
        state = _stability.make_equilibrium(spec)
        z, w = state.z, state.w
    elif kind == "explicit":
        _check_keys(tab, {"kind", "z", "w"}, path)
        z = _complex_array(_get(tab, "z", list, path), (p.N, D), "z", path)
        w_raw = _get(tab, "w", list, path, required=False)
        if w_raw is None:
            w = _zero_velocity(p, z)
        else:
            w = _complex_array(w_raw, (p.N, D), "w", path)
    else:
        raise ConfigError("[init] kind must be random, cone, aggregated, "
                          "bipolar, incoherent, or explicit, got '%s'" % kind)
    return EnsembleState(0.0, z, w), kind, n


def _zero_velocity(p, z):
    """w giving v = 0, the admissible rest choice: w = Omega z / gamma."""
    return np.einsum("jab,jb->ja", p.omegas, z) / p.gamma


def _random_admissible_w(p, z, rng, w_scale):
    w = _zero_velocity(p, z)
    if w_scale > 0:
        v = w_scale * (rng.standard_normal(z.shape) + 1j * rng.standard_normal(z.shape))
        w = _model.project_admissible(p, z, w + v)
    return w


def _kuramoto_init(raw):
    if "kuramoto" not in raw:
        raise ConfigError("missing required section [kuramoto]")
    ktab = raw["kuramoto"]
    kpath = ["kuramoto"]
    _check_keys(ktab, {"kappa", "nus"}, kpath)
    kappa = _get(ktab, "kappa", float, kpath)
    nus = np.asarray(_float_list(ktab, "nus", kpath))

    if "init" not in raw:
        raise ConfigError("missing required section [init]")
    tab = raw["init"]
    path = ["init"]
    kind = _get(tab, "kind", str, path)
    if kind == "random":
        _check_keys(tab, {"kind", "seed"}, path)
        seed = _get(tab, "seed", int, path)
        rng = np.random.default_rng(seed)
        theta = rng.uniform(-np.pi, np.pi, size=nus.size)
    elif kind == "explicit":
        _check_keys(tab, {"kind", "theta"}, path)
        theta = np.asarray(_float_list(tab, "theta", path))
        if theta.shape != nus.shape:
            raise ConfigError("[init] theta must list one phase per oscillator")
    else:
        raise ConfigError("[init] kind for the kuramoto model must be random "
                          "or explicit, got '%s'" % kind)
    return KuramotoState(0.0, theta, nus, kappa)


def _integrator_config(raw):
    if "integrator" not in raw:
        raise ConfigError("missing required section [integrator]")
    tab = raw["integrator"]
    path = ["integrator"]
    _check_keys(tab, {"t_end", "dt", "observe_every", "renormalize",
                      "drift_tolerance"}, path)
    t_end = _get(tab, "t_end", float, path)
    dt = _get(tab, "dt", float, path, required=False)
    observe_every = _get(tab, "observe_every", int, path, required=False, default=1)
    renormalize = _get(tab, "renormalize", bool, path, required=False, default=False)
    drift_tol = _get(tab, "drift_tolerance", float, path, required=False,
                     default=1e-6)
    try:
        return IntegratorConfig(t_end=t_end, dt=dt, observe_every=observe_every,
                                renormalize=renormalize,
                                drift_tolerance=drift_tol)
    except ValidationError as exc:
        raise ConfigError("invalid [integrator]: %s" % exc)


def _sweep_config(raw):
    tab = raw["sweep"]
    path = ["sweep"]
    _check_keys(tab, {"kappa0", "m0", "eta", "target_samples"}, path)
    grid = _float_list(tab, "kappa0", path)
    if not grid or any(k <= 0 for k in grid):
        raise ConfigError("[sweep] kappa0 must be a nonempty list of positive values")
    m0 = _get(tab, "m0", float, path, required=False)
    eta = _get(tab, "eta", float, path, required=False)
    if (m0 is None) != (eta is None):
        raise ConfigError("[sweep] m0 and eta must be given together")
    target = _get(tab, "target_samples", int, path, required=False, default=4000)
    if target < 2:
        raise ConfigError("[sweep] target_samples must be >= 2")
    return {"kappa0": grid, "m0": m0, "eta": eta, "target_samples": target}


def _validate_checks(cfg):
    """Compatibility rules between requested checks and the scenario."""
    p = cfg.params
    ensemble = cfg.model in ("second_order", "gauge")
    for name in cfg.checks:
        if name in ("framework_A", "framework_B", "energy_monotone"):
            if not ensemble:
                raise ValidationError("check %s needs an inertial ensemble model" % name)
            if not p.homogeneous:
                raise ValidationError("check %s needs a homogeneous ensemble" % name)
        if name in ("framework_A", "framework_B", "framework_C",
                    "gronwall_envelope", "stability_incoherent",
                    "stability_bipolar"):
            if p.m <= 0:
                raise ValidationError("check %s needs m > 0" % name)
        if name == "framework_C" and not ensemble:
            raise ValidationError("check framework_C needs an inertial ensemble model")
        if name == "energy_monotone" and p.kappa0 + p.kappa1 <= 0:
            raise ValidationError("check energy_monotone needs kappa0 + kappa1 > 0")
        if name == "F26":
            if not ensemble:
                raise ValidationError("check F26 needs an inertial ensemble model")
            if cfg.integrator.observe_every != 1:
                raise ValidationError("check F26 needs observe_every = 1")
        if name == "practical_bound" and p.kappa0 <= 0:
            raise ValidationError("check practical_bound needs kappa0 > 0")
        if name in ("stability_incoherent", "stability_bipolar") and p.omega_inf > 0:
            raise ValidationError("check %s needs zero frequency matrices" % name)
        if name == "stability_bipolar" and cfg.init_kind != "bipolar":
            raise ValidationError("check stability_bipolar needs [init] kind = 'bipolar'")
        if name == "kuramoto_equivalence" and cfg.model != "kuramoto":
            raise ValidationError("check kuramoto_equivalence needs model = 'kuramoto'")
        if name == "gauge_equivalence" and cfg.model not in ("second_order", "gauge"):
            raise ValidationError("check gauge_equivalence needs the inertial model")
        if name == "gronwall_envelope" and not ensemble:
            raise ValidationError("check gronwall_envelope needs an inertial ensemble model")
