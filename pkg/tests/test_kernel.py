import os

import pytest

from maassqe.input import CACHE_ENV
from maassqe.kernel import main, build_config, _parser, EXIT_OK, EXIT_USAGE, EXIT_CACHE
from maassqe.postprocessing import read_report


@pytest.fixture(autouse=True)
def no_cache_env(monkeypatch):
    monkeypatch.delenv(CACHE_ENV, raising=False)


def test_version_and_help(capsys):
    assert main(["--version"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "0.1.0"
    assert main([]) == EXIT_USAGE


def test_kloosterman(tmp_path, capsys):
    code = main(["kloosterman", "--n", "1", "--m", "1", "--c", "3", "--outdir", str(tmp_path)])
    assert code == EXIT_OK
    assert abs(float(capsys.readouterr().out.strip()) + 1.0) < 1e-12
    df = read_report(str(tmp_path / "kloosterman.csv"))
    assert df["weil_ratio"][0] <= 1.0
    assert os.path.exists(tmp_path / "maassqe.log")


def test_transform(tmp_path):
    code = main(["transform", "--T", "12", "--G", "3", "--x", "0.5", "1", "--outdir", str(tmp_path), "--format", "json"])
    assert code == EXIT_OK
    df = read_report(str(tmp_path / "transform.json"))
    assert list(df["x"]) == [0.5, 1.0]


def test_missing_cache(tmp_path):
    code = main(["coeffs", "--cache", str(tmp_path / "none.jsonl"), "--outdir", str(tmp_path)])
    assert code == EXIT_CACHE


def test_configuration_errors(tmp_path):
    assert main(["qe", "--workers", "0", "--outdir", str(tmp_path)]) == EXIT_USAGE
    assert main(["nodal", "-i", str(tmp_path / "missing.yaml")]) == EXIT_USAGE
    assert main(["nodal", "--density", "4", "--outdir", str(tmp_path)]) == EXIT_USAGE


def test_flag_precedence(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("window:\n  T: 30.0\n  G: 4.0\nn: 3\n")
    args = vars(_parser().parse_args(["kuznetsov-check", "-i", str(path), "--G", "5", "--cache", "x.jsonl"]))
    config = build_config(args)
    assert config.window.T == 30.0
    assert config.window.G == 5.0
    assert config.n == 3
    assert config.cache == "x.jsonl"


def test_theta_replaced_by_width():
    args = vars(_parser().parse_args(["transform", "--T", "100", "--theta", "0.5"]))
    assert build_config(args).window.kernel().G == pytest.approx(10.0)


def test_invariant_failure_exit(tmp_path, monkeypatch):
    import maassqe.kernel as kernel
    from maassqe.errors import InvariantFailure

    def failing(*args, **kwargs):
        raise InvariantFailure("residual above tolerance")

    monkeypatch.setattr(kernel, "run_kloosterman", failing)
    code = main(["kloosterman", "--n", "1", "--m", "1", "--c", "3", "--outdir", str(tmp_path)])
    assert code == kernel.EXIT_INVARIANT
