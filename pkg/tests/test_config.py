import pytest

from holidet.changepoint import StopRule
from holidet.config import PipelineConfig, load_config, parse_config_text
from holidet.errors import ConfigError


def test_defaults():
    c = PipelineConfig()
    assert (c.grid_size, c.cost, c.threshold, c.classifier, c.ratio) == (144, "gaussian", 250.0, "F_var", 0.5)
    assert (c.min_holiday_days, c.n_permutations, c.max_error, c.max_iterations, c.gap_fill_limit) == \
        (3.0, 100, 2, 4, 4)
    assert c.stop_rule == StopRule.max_cost(250.0)
    assert c.classifier_spec.name == "F_var" and c.classifier_spec.ratio == 0.5
    assert c.extraction.autoperiod.n_permutations == 100


@pytest.mark.parametrize("bad", [
    {"grid_size": 1}, {"cost": "poisson"}, {"classifier": "F_med"}, {"ratio": 0.0},
    {"ratio": 2.0}, {"min_holiday_days": -1}, {"n_permutations": 1}, {"max_error": -1},
    {"max_iterations": 0}, {"gap_fill_limit": -1}, {"min_coverage": 1.5}, {"threshold": float("nan")},
])
def test_validation(bad):
    with pytest.raises(ConfigError):
        PipelineConfig(**bad)


def test_dict_round_trip():
    c = PipelineConfig(ratio=0.1, seed=5)
    assert PipelineConfig.from_dict(c.to_dict()) == c
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({"nope": 1})


def test_text_round_trip():
    c = PipelineConfig(classifier="N_var", threshold=120.5)
    assert PipelineConfig.from_dict(parse_config_text(c.to_text())) == c


def test_parse_text():
    text = "# comment\ngrid-size = 96\n\ncost = 'l2'  # trailing\nratio=0.25\n"
    assert parse_config_text(text) == {"grid_size": 96, "cost": "l2", "ratio": 0.25}


@pytest.mark.parametrize("text", ["grid_size 96", "grid_size = x", "bogus = 1", "seed = 1\nseed = 2"])
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_load_precedence(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("ratio = 0.2\nseed = 4\n")
    c = load_config(p, {"seed": 9, "ratio": None})
    assert (c.ratio, c.seed, c.grid_size) == (0.2, 9, 144)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")
