import pytest

from config.config_manager import DEFAULT_CONFIG, load_config, sampler_options


def test_defaults_are_not_mutated():
    config = load_config({"samplers": {"direct": {"cond_cap": 1e4}}})

    assert config["samplers"]["direct"] == {"cond_cap": 1e4, "root_tol": 1e-10}
    assert DEFAULT_CONFIG["samplers"]["direct"]["cond_cap"] == 1e8


@pytest.mark.parametrize("override", [
    {"samplers": {"tir_mode": "backward"}},
    {"samplers": {"max_attempts": 0}},
    {"stationary": {"norm": "two"}},
    {"stationary": {"eps": 0.0}},
    {"inference": {"method": "gillespie"}},
    {"inference": {"burn_in": 150}},
    {"inference": {"prior_b": -1.0}},
    {"bench": {"methods": ["rej", "xyz"]}},
    {"bench": {"endpoint_draws": 0}},
    {"study": {"delta": 20.0}},
    {"study": {"mcem_tail": 151}},
])
def test_invalid_config(override):
    with pytest.raises(ValueError, match=r"\[CONFIG\]"):
        load_config(override)


def test_sampler_options():
    config = load_config({"samplers": {"tir_mode": "forward"}})

    assert sampler_options(config, "rej") == {}
    assert sampler_options(config, "tir") == {"mode": "paper"}
    assert sampler_options(config, "mor") == {"max_forced_jumps": 10_000}
    assert sampler_options(config, "dir") == {"cond_cap": 1e8, "root_tol": 1e-10}
    assert sampler_options(config, "uni") == {"mass_tol": 1e-10}
    assert sampler_options(config, "bis") == {"max_depth": 60}

    with pytest.raises(ValueError):
        sampler_options(config, "xyz")


def test_defaults():
    config = load_config()

    assert config["inference"]["method"] == "uni"
    assert config["samplers"]["tir_mode"] == "reversed"
    assert config["bench"]["resume"] is False

    paper = load_config({"samplers": {"tir_mode": "paper"}})
    assert sampler_options(paper, "tir") == {"mode": "paper"}
