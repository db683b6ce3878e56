import pytest
import yaml

from quantization_core.diffusion_model import brownian
from quantization_core.exceptions import ConfigError
from quantization_core.io.run_config import RunConfig, parse_budget, parse_range


def write_config(tmp_path, values):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(values), encoding="utf-8")
    return path


def test_defaults():
    config = RunConfig.resolve()
    assert config.model == "pseudo_cev"
    assert config.n == 120
    assert config.sizes() == [1] + [400] * 120


def test_file_then_flags_precedence(tmp_path):
    path = write_config(tmp_path, {"model": "black_scholes", "sigma": 0.3, "n": 10, "strike": 90})
    config = RunConfig.resolve(path, {"sigma": 0.4, "x0": None})
    assert config.model == "black_scholes"
    assert config.sigma == 0.4
    assert config.n == 10
    assert config.strike == 90.0
    assert config.x0 == 100.0


def test_model_names_are_normalized():
    assert RunConfig.resolve(overrides={"model": "Pseudo-CEV"}).model == "pseudo_cev"


def test_unknown_keys(tmp_path):
    path = write_config(tmp_path, {"modle": "brownian"})
    with pytest.raises(ConfigError, match="modle"):
        RunConfig.resolve(path)


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.resolve(tmp_path / "missing.yaml")
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        RunConfig.resolve(path)


@pytest.mark.parametrize(
    "overrides",
    [
        {"model": "heston"},
        {"n": 0},
        {"T": -1.0},
        {"nr_iters": 0},
        {"payoff": "digital"},
        {"workers": 0},
        {"sigma": "wide"},
    ],
)
def test_invalid_values(overrides):
    with pytest.raises(ConfigError):
        RunConfig.resolve(overrides=overrides)


def test_builds_model_and_payoff():
    config = RunConfig.resolve(overrides={"model": "black_scholes", "sigma": 0.25, "payoff": "call", "strike": 95})
    assert config.build_model().describe() == {"name": "black_scholes", "r": 0.15, "sigma": 0.25}
    payoff = config.build_payoff()
    assert (payoff.kind, payoff.strike) == ("call", 95.0)


def test_bad_model_parameters_become_config_errors():
    config = RunConfig.resolve(overrides={"model": "pseudo_cev", "delta": 1.5})
    with pytest.raises(ConfigError):
        config.build_model()


def test_parse_budget_modes():
    assert parse_budget("equal:12", 4) == [1, 3, 3, 3, 3]
    assert parse_budget("const:7", 2) == [1, 7, 7]
    assert parse_budget("1,4,5", 2) == [1, 4, 5]
    assert parse_budget([1, 2, 3], 2) == [1, 2, 3]
    assert parse_budget("optimal:250", 50, model=brownian(), x0=0.0, T=1.0)[-1] == 6


@pytest.mark.parametrize(
    "spec,n",
    [("equal:3", 4), ("const:0", 2), ("fancy:10", 2), ("1,2", 2), ("2,3,3", 2), ("equal:x", 2), ("optimal:100", 2)],
)
def test_parse_budget_errors(spec, n):
    with pytest.raises(ConfigError):
        parse_budget(spec, n)


def test_parse_range():
    values = parse_range("250:5000:50")
    assert values[0] == 250
    assert values[-1] == 5000
    assert len(values) == 96
    assert parse_range("1:3") == [1, 2, 3]
    assert parse_range("250, 1000") == [250, 1000]


@pytest.mark.parametrize("spec", ["5:1:1", "1:10:0", "a:b", "1:2:3:4"])
def test_parse_range_errors(spec):
    with pytest.raises(ConfigError):
        parse_range(spec)
