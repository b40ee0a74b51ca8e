import json

import pytest
import numpy as np

from maassqe.input import SCHEMA_VERSION, generate_metadata
from maassqe.postprocessing import write_rows, read_report, gather_reports

rows = [
    {"t": 9.533695261353557, "parity": "odd", "passed": True, "value": np.float64(0.1)},
    {"t": 12.173008324679677, "parity": "odd", "passed": False, "value": 1e-17},
]


def test_csv_roundtrip(tmp_path):
    path = write_rows(rows, str(tmp_path / "spectrum.txt"))
    assert path.endswith("spectrum.csv")
    with open(path) as fin:
        text = fin.read()
    assert "\r" not in text
    assert "9.533695261353557" in text
    df = read_report(path)
    assert list(df["t"]) == [r["t"] for r in rows]
    assert list(df["passed"]) == [True, False]
    assert list(df["value"]) == [0.1, 1e-17]


def test_csv_floats_bit_exact(tmp_path):
    values = np.random.default_rng(7).uniform(-1, 1, 200) * 10.0 ** np.arange(-100, 100)
    path = write_rows([{"x": float(v)} for v in values], str(tmp_path / "floats.csv"))
    back = read_report(path)["x"].to_numpy()
    assert np.array_equal(back, values)


def test_json_document(tmp_path):
    path = write_rows(rows + [{"t": 1.0, "parity": "x", "passed": True, "value": 1 + 2j}], str(tmp_path / "qe"), fmt="json", metadata=generate_metadata())
    with open(path) as fin:
        document = json.load(fin)
    assert document["schema_version"] == SCHEMA_VERSION
    assert document["metadata"]["software"]["name"] == "maassqe"
    assert document["rows"][-1]["value"] == {"re": 1.0, "im": 2.0}
    df = read_report(path)
    assert len(df) == 3


def test_schema_mismatch(tmp_path):
    path = tmp_path / "old.json"
    path.write_text(json.dumps({"schema_version": SCHEMA_VERSION + 1, "rows": []}))
    with pytest.raises(ValueError):
        read_report(str(path))
    with pytest.raises(FileNotFoundError):
        read_report(str(tmp_path / "missing.csv"))


def test_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        write_rows(rows, str(tmp_path / "a"), fmt="xml")


def test_gather_reports(tmp_path):
    write_rows(rows, str(tmp_path / "a.csv"))
    write_rows(rows, str(tmp_path / "b.json"), fmt="json")
    (tmp_path / "maassqe.log").write_text("log\n")
    df = gather_reports(str(tmp_path))
    assert len(df) == 4
    assert sorted(set(df["report"])) == ["a", "b"]
