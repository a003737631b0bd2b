import numpy as np
import pytest

from spheresync import EnsembleState, KuramotoState
from spheresync.config import CHECK_NAMES, build_scenario, load_config
from spheresync.errors import ConfigError, ValidationError


def _write(tmp_path, text):
    f = tmp_path / "scenario.toml"
    f.write_text(text)
    return str(f)


BASE = """
model = "second_order"

[params]
N = 4
d = 1
m = 0.5
gamma = 1.0
kappa0 = 1.0
kappa1 = 0.2

[init]
kind = "random"
seed = 3

[integrator]
t_end = 0.5
dt = 1e-3
"""


def test_minimal_scenario_loads(tmp_path):
    cfg = load_config(_write(tmp_path, BASE))
    assert cfg.model == "second_order"
    assert cfg.params.N == 4 and cfg.params.D == 2
    assert isinstance(cfg.init, EnsembleState)
    assert np.max(np.abs(np.linalg.norm(cfg.init.z, axis=1) - 1.0)) < 1e-12
    assert cfg.integrator.t_end == 0.5
    assert cfg.checks == []


def test_seeded_init_is_reproducible(tmp_path):
    a = load_config(_write(tmp_path, BASE))
    b = load_config(_write(tmp_path, BASE))
    assert np.array_equal(a.init.z, b.init.z)
    assert np.array_equal(a.init.w, b.init.w)


def test_missing_file_and_bad_toml(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.toml"))
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, "model = [unterminated"))


def test_missing_required_key_names_it(tmp_path):
    text = BASE.replace("gamma = 1.0\n", "")
    with pytest.raises(ConfigError, match="gamma"):
        load_config(_write(tmp_path, text))


def test_unknown_keys_rejected(tmp_path):
    with pytest.raises(ConfigError, match="turbo"):
        load_config(_write(tmp_path, BASE + "\n[sweep]\nkappa0 = [1.0]\nturbo = 1\n"))
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, BASE.replace("seed = 3", "seed = 3\nflavor = 'x'")))


def test_type_discipline(tmp_path):
    # booleans are not integers here
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, BASE.replace("N = 4", "N = true")))
    # ints promote to floats where a float is expected
    cfg = load_config(_write(tmp_path, BASE.replace("gamma = 1.0", "gamma = 2")))
    assert cfg.params.gamma == 2.0
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, BASE.replace('kind = "random"', "kind = 7")))


def test_unknown_model_and_checks(tmp_path):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, BASE.replace('"second_order"', '"third_order"')))
    def with_checks(lst):
        return BASE.replace('model = "second_order"',
                            'model = "second_order"\nchecks = %s' % lst)

    with pytest.raises(ConfigError, match="unknown check"):
        load_config(_write(tmp_path, with_checks('["tea_leaves"]')))
    with pytest.raises(ConfigError, match="duplicate"):
        load_config(_write(tmp_path, with_checks('["F26", "F26"]')))


def test_param_domain_violation_is_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, BASE.replace("gamma = 1.0", "gamma = -1.0")))


def test_omega_kinds(tmp_path):
    rand = BASE + """
[params.omega]
kind = "random"
scale = 0.5
seed = 9
"""
    cfg = load_config(_write(tmp_path, rand))
    assert cfg.params.omega_inf > 0
    assert not cfg.params.homogeneous

    common = rand + "common = true\n"
    cfg2 = load_config(_write(tmp_path, common))
    assert cfg2.params.homogeneous and cfg2.params.omega_inf > 0

    kur = BASE + """
[params.omega]
kind = "kuramoto"
nus = [0.1, -0.2, 0.3, 0.0]
"""
    cfg3 = load_config(_write(tmp_path, kur))
    assert cfg3.params.omegas[0, 1, 0].real == pytest.approx(0.1)

    short = BASE + """
[params.omega]
kind = "kuramoto"
nus = [0.1]
"""
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, short))


def test_init_kinds(tmp_path):
    bi = BASE.replace('kind = "random"\nseed = 3', 'kind = "bipolar"\nn = 1')
    cfg = load_config(_write(tmp_path, bi))
    assert cfg.init_kind == "bipolar" and cfg.init_n == 1

    bad = BASE.replace('kind = "random"\nseed = 3', 'kind = "bipolar"\nn = 2')
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, bad))

    cone = BASE.replace('kind = "random"\nseed = 3',
                        'kind = "cone"\nseed = 3\nsigma = 0.05')
    cfg2 = load_config(_write(tmp_path, cone))
    from spheresync import aggregation_G
    assert aggregation_G(cfg2.init.z) < 0.05

    expl = BASE.replace(
        'kind = "random"\nseed = 3',
        'kind = "explicit"\nz = [[[1.0,0],[0,0]],[[0,0],[1,0]],'
        '[[1,0],[0,0]],[[0,0],[0,1]]]')
    cfg3 = load_config(_write(tmp_path, expl))
    assert cfg3.init.z[0, 0] == 1.0 + 0j


def _with_checks(text, lst):
    return text.replace('model = "second_order"',
                        'model = "second_order"\nchecks = %s' % lst)


def test_check_compatibility_validation(tmp_path):
    het = _with_checks(BASE, '["framework_A"]') + """
[params.omega]
kind = "random"
scale = 0.5
seed = 1
"""
    with pytest.raises(ValidationError):
        load_config(_write(tmp_path, het))

    f26 = _with_checks(BASE.replace("dt = 1e-3", "dt = 1e-3\nobserve_every = 5"),
                       '["F26"]')
    with pytest.raises(ValidationError):
        load_config(_write(tmp_path, f26))

    with pytest.raises(ValidationError):
        load_config(_write(tmp_path, _with_checks(BASE, '["stability_bipolar"]')))


def test_kuramoto_scenario(tmp_path):
    text = """
model = "kuramoto"
checks = ["kuramoto_equivalence"]

[kuramoto]
kappa = 0.8
nus = [0.1, -0.1, 0.4]

[init]
kind = "explicit"
theta = [0.0, 1.0, 2.0]

[integrator]
t_end = 1.0
dt = 1e-3
"""
    cfg = load_config(_write(tmp_path, text))
    assert isinstance(cfg.init, KuramotoState)
    assert cfg.params.kappa0 == pytest.approx(0.8)
    assert cfg.params.m == 0.0
    with_params = text + "\n[params]\nN = 3\n"
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, with_params))


def test_sweep_section(tmp_path):
    text = BASE + """
[sweep]
kappa0 = [1.0, 10.0]
m0 = 1.0
eta = 1.0
target_samples = 100
"""
    cfg = load_config(_write(tmp_path, text))
    assert cfg.sweep["kappa0"] == [1.0, 10.0]
    half = BASE + "\n[sweep]\nkappa0 = [1.0]\nm0 = 1.0\n"
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, half))
    empty = BASE + "\n[sweep]\nkappa0 = []\n"
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, empty))


def test_check_names_cover_registry():
    from spheresync.checks import CHECKS
    assert set(CHECK_NAMES) == set(CHECKS)


def test_build_scenario_accepts_plain_dict():
    raw = {
        "model": "second_order",
        "params": {"N": 2, "d": 1, "m": 1.0, "gamma": 1.0,
                   "kappa0": 1.0, "kappa1": 0.0},
        "init": {"kind": "aggregated"},
        "integrator": {"t_end": 0.1},
    }
    cfg = build_scenario(raw)
    assert cfg.init_kind == "aggregated"
    assert cfg.integrator.dt is None
