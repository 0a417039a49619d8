import json

import numpy as np
import pytest

from relequil import presets
from relequil.config import format_config, load_config, reference_config, parse_config_text, save_config
from relequil.errors import ConfigError

MINIMAL = """
# reference magnets
reduced_mass = 3.828816e-4
alpha = 3.87228183489e7
beta  = 3.87228183489e7
l1 = 0.01
l2 = 0.01
kappa1 = 7.7734375
kappa2 = 7.7734375
r0 = 0.01
m3 = 5e-5
n3 = 5e-5
"""


def test_parse_minimal():
    cfg = parse_config_text(MINIMAL)
    assert cfg.params.reduced_mass == 3.828816e-4
    assert cfg.potential_name == "cylinder4charge"
    assert cfg.radius() == 0.01 and cfg.spins() == (5e-5, 5e-5)
    assert cfg.state is None


def test_state_triples():
    text = MINIMAL + "x0 = 0.01, 0, 0\np0 = [0, 6.491e-4, 0]\nmu = 0,0,1\nm = 0,0,5e-5\nnu = 0,0,-1\nn = 0,0,5e-5\n"
    cfg = parse_config_text(text)
    np.testing.assert_array_equal(cfg.state.p, [0, 6.491e-4, 0])


def test_spins_from_state():
    text = MINIMAL.replace("m3 = 5e-5\nn3 = 5e-5\n", "")
    text += "x0 = 0.02, 0, 0\np0 = 0, 1e-3, 0\nmu = 0,0,1\nm = 0,0,2e-5\nnu = 0,0,-1\nn = 0,0,3e-5\n"
    cfg = parse_config_text(text)
    assert cfg.spins() == (2e-5, 3e-5)
    assert cfg.radius() == 0.01  # explicit r0 wins over |x0|


@pytest.mark.parametrize(
    "text, fragment",
    [
        (MINIMAL + "colour = red\n", "unknown keys"),
        (MINIMAL.replace("alpha = 3.87228183489e7\n", ""), "missing keys"),
        (MINIMAL.replace("l1 = 0.01", "l1 = ten"), "cannot parse"),
        (MINIMAL.replace("l1 = 0.01", "l1 = -0.01"), "l1"),
        (MINIMAL + "potential = solenoid\n", "unknown potential"),
        (MINIMAL + "x0 = 1, 2\np0 = 0,0,0\nmu = 0,0,1\nm = 0,0,0\nnu = 0,0,1\nn = 0,0,0\n", "three"),
        (MINIMAL + "x0 = 0.01, 0, 0\n", "state needs"),
        (MINIMAL + "just words\n", "key = value"),
    ],
)
def test_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config_text(text)


def test_non_unit_axis_is_config_error():
    text = MINIMAL + "x0 = 0.01, 0, 0\np0 = 0, 1e-3, 0\nmu = 0,0,2\nm = 0,0,0\nnu = 0,0,-1\nn = 0,0,0\n"
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_missing_file_names_path(tmp_path):
    path = tmp_path / "nope.cfg"
    with pytest.raises(ConfigError, match="nope.cfg"):
        load_config(path)


@pytest.mark.parametrize("suffix", [".cfg", ".json"])
def test_round_trip(tmp_path, suffix):
    cfg = reference_config()
    path = tmp_path / f"run{suffix}"
    save_config(path, cfg)
    back = load_config(path)
    assert back.params == cfg.params
    np.testing.assert_array_equal(back.state.values, cfg.state.values)
    assert (back.r0, back.m3, back.n3) == (cfg.r0, cfg.m3, cfg.n3)


def test_json_is_plain(tmp_path):
    path = tmp_path / "run.json"
    save_config(path, reference_config())
    data = json.loads(path.read_text())
    assert data["potential"] == "cylinder4charge" and len(data["x0"]) == 3


def test_reference_config_on_orbit():
    cfg = reference_config()
    assert cfg.params == presets.reference_params()
    assert cfg.state.p[1] == pytest.approx(6.491e-4, rel=1e-4)
    assert "r0 = 0.01" in format_config(cfg)
