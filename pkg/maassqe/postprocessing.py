"""
maassqe: a Python library and command line interface for numerical
experiments with Maass-Hecke cusp forms and quantum ergodicity.

maassqe is published and distributed under the BSD 3-Clause "New" or "Revised" License.
maassqe is distributed in the hope that it will be useful for academic research,
but WITHOUT ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the LICENSE FILE for more details.

Report writers and readers. Floats are always written as their shortest
round-trip decimal string.
"""

import os
import json
import logging

import numpy as np

from maassqe.helpers import float_repr
from maassqe.input import SCHEMA_VERSION

logger = logging.getLogger(__name__)


def _pandas():
    try:
        import pandas as pd
    except ImportError:
        raise ImportError("Please install pandas to use this function")
    return pd


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    return value


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        return float_repr(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (list, tuple, dict, np.ndarray)):
        return json.dumps(_jsonable(value), sort_keys=True)
    return value


def write_rows(rows, path, fmt="csv", metadata=None):
    """
    Write report rows to `path`

    Parameters
    ----------
    rows : list of dict
        one dict per row, same keys

    path : str
        output file, the extension is replaced by `fmt`

    fmt : {"csv", "json"}

    metadata : dict, optional
        embedded in JSON output

    Returns
    -------
    path : str
        file that was written
    """
    path = os.path.splitext(path)[0] + "." + fmt
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    if fmt == "csv":
        pd = _pandas()
        df = pd.DataFrame([{k: _cell(v) for k, v in row.items()} for row in rows])
        df.to_csv(path, index=False, float_format=None, lineterminator="\n")
    elif fmt == "json":
        document = {
            "schema_version": SCHEMA_VERSION,
            "metadata": _jsonable(metadata or {}),
            "rows": _jsonable(list(rows)),
        }
        with open(path, "w") as fout:
            fout.write(json.dumps(document, sort_keys=True, indent=1) + "\n")
    else:
        raise ValueError(f"unknown output format {fmt}")
    logger.info(f"wrote {len(rows)} rows to {path}")
    return path


def read_report(path):
    """
    Read one CSV or JSON report into a DataFrame
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"file {path} not found")
    pd = _pandas()
    if path.endswith(".json"):
        with open(path, "r") as fin:
            document = json.load(fin)
        if document.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"{path} has schema version {document.get('schema_version')}")
        return pd.DataFrame(document["rows"])
    return pd.read_csv(path, float_precision="round_trip")


def gather_reports(outdir):
    """
    Collect all CSV and JSON reports of a run directory into one DataFrame
    with a `report` column naming the source file

    Parameters
    ----------
    outdir : str
        output directory of a run

    Returns
    -------
    df : pandas DataFrame
    """
    pd = _pandas()
    frames = []
    for name in sorted(os.listdir(outdir)):
        stem, ext = os.path.splitext(name)
        if ext not in (".csv", ".json"):
            continue
        df = read_report(os.path.join(outdir, name))
        df.insert(0, "report", stem)
        frames.append(df)
    if not frames:
        return pd.DataFrame()
    return pd.concat(frames, ignore_index=True, sort=False)
