import math

import pytest

from cvbell import ConfigError
from cvbell.config import (
    loads_config,
    parse_angle,
    parse_complex,
    parse_eval,
    parse_experiment,
    parse_sample,
    parse_sweep,
)


@pytest.mark.parametrize(
    "text, value",
    [
        ("pi/4", math.pi / 4),
        ("3*pi/8", 3 * math.pi / 8),
        ("3pi/8", 3 * math.pi / 8),
        ("-pi", -math.pi),
        ("pi", math.pi),
        (" pi / 2 ", math.pi / 2),
        ("0.25", 0.25),
        (1, 1.0),
        (0.5, 0.5),
    ],
)
def test_parse_angle(text, value):
    assert math.isclose(parse_angle(text), value)


@pytest.mark.parametrize("bad", ["tau/4", "pi/", True, None, "1/4"])
def test_parse_angle_rejects(bad):
    with pytest.raises(ConfigError):
        parse_angle(bad)


def test_parse_complex():
    assert parse_complex(0.5, "c1") == 0.5
    assert parse_complex([0.6, 0.8], "c1") == 0.6 + 0.8j
    assert parse_complex("0.6+0.8j", "c1") == 0.6 + 0.8j
    with pytest.raises(ConfigError):
        parse_complex("abc", "c1")


def test_state_section():
    cfg = loads_config('[state]\nvariant = "single_photon"\ntheta = "pi/4"\nphi = 0\n')
    assert cfg.state.variant == "single_photon"
    assert math.isclose(cfg.state.params["theta"], math.pi / 4)
    ghz = loads_config('[state]\nvariant = "ghz_vacuum"\nN = 3\nk = 1\nc1 = [0.6, 0]\nc2 = "0.8j"\np_s = 0.5\n')
    assert ghz.state.params == {"n_modes": 3, "k": 1, "c1": 0.6 + 0j, "c2": 0.8j, "p_s": 0.5}


@pytest.mark.parametrize(
    "text, fragment",
    [
        ('[state]\nvariant = "tmss"\nrr = 0.5\n', "rr"),
        ('[state]\nvariant = "warp"\n', "warp"),
        ('[state]\nr = 0.5\n', "variant"),
        ('[stat]\nvariant = "tmss"\n', "stat"),
        ('[eval]\nfamilies = ["first"]\n', "[state]"),
        ('[state\nvariant = "tmss"\n', "line 1"),
        ('state = 3\n', "section"),
    ],
)
def test_config_errors_name_the_problem(text, fragment):
    with pytest.raises(ConfigError) as err:
        loads_config(text)
    assert fragment in str(err.value)


def test_eval_section():
    opts = parse_eval({"families": "second", "k": 2, "eta": 0.5})
    assert opts["families"] == ("second",) and opts["k"] == [2] and opts["eta"] == 0.5
    with pytest.raises(ConfigError):
        parse_eval({"families": ["third"]})
    with pytest.raises(ConfigError):
        parse_eval({"eta": 2})
    with pytest.raises(ConfigError):
        parse_eval({"etaa": 0.5})


def test_sweep_section():
    opts = parse_sweep({"axis": "theta", "values": ["pi/8", "pi/4"]})
    assert math.isclose(opts["values"][1], math.pi / 4)
    assert parse_sweep({"axis": "k", "values": [1, 2]})["values"] == [1, 2]
    with pytest.raises(ConfigError, match="axis"):
        parse_sweep({"axis": "zeta", "values": [1]})
    with pytest.raises(ConfigError):
        parse_sweep({"axis": "r", "values": []})


def test_experiment_section():
    cfg = loads_config('[state]\nvariant = "tmss"\nr = 0.5\n')
    exp = parse_experiment({"p_d": 0.5, "setting_probs": [0.5, 0.25, 0.25]}, cfg.state, seed=9)
    assert exp.seed == 9 and exp.setting_probs == ((0.5, 0.25, 0.25),) * 2
    with pytest.raises(ConfigError):
        parse_experiment({"p_D": 0.5}, cfg.state)
    with pytest.raises(ConfigError):
        parse_experiment({"p_d": 1.5}, cfg.state)


def test_sample_section():
    opts = parse_sample({"thetas": ["pi/2", 0], "trials": 10}, seed=4)
    assert opts["seed"] == 4 and math.isclose(opts["thetas"][0], math.pi / 2)
    with pytest.raises(ConfigError):
        parse_sample({"measurement": "heterodyne"})
