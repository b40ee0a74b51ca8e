import os

import pytest
import yaml
from pydantic import ValidationError

from maassqe.input import (
    CACHE_ENV,
    SCHEMA_VERSION,
    RunConfig,
    Window,
    Psi,
    read_inputfile,
    apply_overrides,
    generate_metadata,
)


def test_read_input():
    config = read_inputfile(os.path.join(os.path.dirname(__file__), "input.yaml"))
    assert isinstance(config, RunConfig)
    assert len(config.t_range) == 2
    assert config.window.kernel().T == config.window.T


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        read_inputfile("does_not_exist.yaml")


def test_defaults_and_pairs(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump({"t_range": "9 12", "parity": "odd", "qe": {"shift": 2}}))
    config = read_inputfile(str(path))
    assert config.t_range == [9.0, 12.0]
    assert config.parities == ["odd"]
    assert config.qe.shift == 2
    assert config.window.T == 12.0
    assert RunConfig().parities == ["even", "odd"]


def test_empty_file(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    assert read_inputfile(str(path)).density == 20


@pytest.mark.parametrize(
    "data",
    [
        {"t_range": [12.0, 9.0]},
        {"parity": "neither"},
        {"density": 5},
        {"transform_x": [1.0, -1.0]},
        {"window": {"T": 12.0, "G": -1.0}},
        {"window": {"T": 12.0, "G": None}},
        {"window": {"T": 12.0, "theta": 0.2}},
        {"psi": {"a": 2.0, "b": 1.0}},
        {"segment": {"y_min": 1.0, "y_max": 0.5}},
    ],
)
def test_validation(data):
    with pytest.raises(ValidationError):
        RunConfig(**data)


def test_theta_window():
    w = Window(T=100.0, G=None, theta=0.5).kernel()
    assert abs(w.G - 10.0) < 1e-12
    assert Psi(a=0.5, b=3.0).test_function().support == (0.5, 3.0)


def test_cache_env(monkeypatch, tmp_path):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path / "env.jsonl"))
    config = RunConfig()
    assert config.cache == str(tmp_path / "env.jsonl")
    flagged = apply_overrides(config, {"cache": "flag.jsonl"})
    assert flagged.cache == "flag.jsonl"


def test_overrides():
    config = RunConfig()
    updated = apply_overrides(config, {"window.T": 20.0, "qe.shift": 3, "n": 2, "m": None})
    assert updated.window.T == 20.0
    assert updated.window.G == config.window.G
    assert updated.qe.shift == 3
    assert updated.n == 2 and updated.m == 1
    with pytest.raises(ValidationError):
        apply_overrides(config, {"density": 3})


def test_metadata():
    md = generate_metadata(RunConfig(window={"T": 100.0, "G": None, "theta": 0.5}))
    assert md["software"]["name"] == "maassqe"
    assert md["schema_version"] == SCHEMA_VERSION
    assert abs(md["parameters"]["A_recorded"] - 1000.0) < 1e-9
    assert "parameters" not in generate_metadata()
