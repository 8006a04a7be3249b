import math
import pathlib

import pytest

from mzi_twophase.config import (
    ScenarioConfig,
    fig2_defaults,
    fig3_defaults,
    load_config,
    parse_config,
)
from mzi_twophase.errors import ConfigurationError


def test_figure_defaults():
    f2 = fig2_defaults()
    assert (f2.probe.alpha1, f2.probe.alpha2 ** 2, f2.probe.r) == pytest.approx((0.0, 10.0, 1.7))
    assert (f2.truth.phi_s, f2.truth.phi_d) == (0.7, 1.1)
    assert f2.lo.mode == "tuned" and f2.lo.k == 0.25
    assert f2.sweep.axis == "nu" and f2.sweep.values == (200, 500, 1000, 2000)
    assert f2.run.repetitions == 200 and f2.run.nu == 2000
    f3 = fig3_defaults()
    assert f3.sweep.axis == "N" and f3.sweep.values == (8, 16, 32, 64, 128)


def test_load_file_merges_with_base(tmp_path):
    path = tmp_path / "s.toml"
    path.write_text(
        '[probe]\nalpha1 = 0.5\n[lo]\nmode = "explicit"\ntheta1 = 0.1\ntheta2 = 0.2\n'
        '[run]\nseed = 7\nrepetitions = 10\n[sweep]\naxis = "beta"\nvalues = [0.0, 0.5]\n'
        '[bound]\nweights = [0.6, 0.8]\n'
    )
    cfg = load_config(path, fig2_defaults())
    assert cfg.probe.alpha1 == 0.5 and cfg.probe.alpha2 == pytest.approx(math.sqrt(10))
    assert (cfg.lo.theta1, cfg.lo.theta2) == (0.1, 0.2)
    assert cfg.run.seed == 7 and cfg.run.repetitions == 10
    assert cfg.sweep.values == (0.0, 0.5)
    assert cfg.weights == (0.6, 0.8)
    assert cfg.to_dict()["sweep"]["values"] == [0.0, 0.5]


def test_shared_k_and_overrides():
    cfg = parse_config({"lo": {"k": 0.3}})
    assert (cfg.lo.k1, cfg.lo.k2) == (0.3, 0.3)
    cfg = cfg.with_overrides(seed=2**64 - 1, directory="elsewhere", threads=3)
    assert cfg.run.seed == 2**64 - 1 and cfg.outputs.directory == "elsewhere" and cfg.run.threads == 3


def test_nu_values_become_integers():
    cfg = parse_config({"sweep": {"axis": "nu", "values": [100.0, 300]}})
    assert cfg.sweep.values == (100, 300) and all(isinstance(v, int) for v in cfg.sweep.values)


@pytest.mark.parametrize(
    "raw, field",
    [
        ({"probe": {"r": "big"}}, "probe.r"),
        ({"probe": {"alpha3": 1}}, "probe.alpha3"),
        ({"extra": {}}, "extra"),
        ({"run": 3}, "run"),
        ({"run": {"nu": 0}}, "run.nu"),
        ({"run": {"repetitions": 1}}, "run.repetitions"),
        ({"run": {"seed": -1}}, "run.seed"),
        ({"run": {"seed": 2**64}}, "run.seed"),
        ({"run": {"estimator": "bayes"}}, "run.estimator"),
        ({"lo": {"mode": "adaptive"}}, "lo.mode"),
        ({"lo": {"mode": "explicit", "theta1": 0.1}}, "lo.theta2"),
        ({"lo": {"k": 0.1, "k1": 0.2}}, "lo.k"),
        ({"sweep": {"values": []}}, "sweep.values"),
        ({"sweep": {"values": [500, 200]}}, "sweep.values"),
        ({"sweep": {"values": [0, 200]}}, "sweep.values"),
        ({"sweep": {"values": [200.5, 300]}}, "sweep.values"),
        ({"sweep": {"axis": "r"}}, "sweep.axis"),
        ({"sweep": {"axis": "beta", "values": [0.5, 1.0]}}, "sweep.values"),
        ({"sweep": {"beta": 1.5}}, "sweep.beta"),
        ({"outputs": {"formats": ["gif"]}}, "outputs.formats"),
        ({"bound": {"weights": [1.0]}}, "bound.weights"),
        ({"truth": {"phi_s": float("nan")}}, "truth.phi_s"),
        ({"run": {"threads": True}}, "run.threads"),
    ],
)
def test_invalid_settings_name_the_field(raw, field):
    with pytest.raises(ConfigurationError) as err:
        parse_config(raw)
    assert err.value.field == field


def test_malformed_toml(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("[probe\nr = 1")
    with pytest.raises(ConfigurationError):
        load_config(path)


def test_axis_change_requires_values():
    with pytest.raises(ConfigurationError, match="sweep.values"):
        parse_config({"sweep": {"axis": "N"}}, ScenarioConfig())


def test_shipped_configs_are_valid():
    root = pathlib.Path(__file__).resolve().parent.parent / "configs"
    paths = sorted(root.glob("*.toml"))
    assert paths
    for path in paths:
        load_config(path)
