"""Scenario files and result tables.

A scenario is a JSON document::

    {
      "dimension": 1,
      "h": 0.0, "r": 2.0, "rho": 1.0, "n": 1,
      "gt_density": [{"weight": 1.0, "lo": [0.0], "hi": [1.0]}],
      "gr_density": [{"weight": 1.0, "lo": [2.0], "hi": [3.0]}]
    }

``h`` (0), ``r`` (2), ``rho`` (1) and ``n`` (1) are optional. Box corners
may be bare numbers in one dimension.

Result tables have the fixed columns ``mode,n,lambda,p_uav,p_gt,se_uav,se_gt``;
deployment dumps have ``run_id,relay_index,x[,y]``. Floats are written with
``repr`` so they re-read bit-exactly; infinite values are written ``inf``
in CSV and ``null`` in JSON.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .cost import Deployment, Scenario
from .density import WEIGHT_TOL, Density
from .errors import ScenarioParseError, UsageError

RESULT_COLUMNS = ("mode", "n", "lambda", "p_uav", "p_gt", "se_uav", "se_gt")
SCENARIO_DEFAULTS = {"h": 0.0, "r": 2.0, "rho": 1.0, "n": 1}
_KNOWN_KEYS = {"dimension", "gt_density", "gr_density", *SCENARIO_DEFAULTS}
BUILTIN_SCENARIOS = ("ex1",)


def _number(value, field, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioParseError(f"expected a number, got {value!r}", field)
    if integer and int(value) != value:
        raise ScenarioParseError(f"expected an integer, got {value!r}", field)
    if not math.isfinite(value):
        raise ScenarioParseError("value must be finite", field)
    return int(value) if integer else float(value)


def _corner(value, field, dim):
    vals = [value] if not isinstance(value, list) else value
    if len(vals) != dim:
        raise ScenarioParseError(f"expected {dim} coordinate(s), got {len(vals)}", field)
    return [_number(v, f"{field}[{i}]") for i, v in enumerate(vals)]


def _density(raw, field, dim):
    if not isinstance(raw, list) or not raw:
        raise ScenarioParseError("expected a nonempty list of {weight, lo, hi} boxes", field)
    comps = []
    for k, box in enumerate(raw):
        where = f"{field}[{k}]"
        if not isinstance(box, dict):
            raise ScenarioParseError("expected an object with weight, lo, hi", where)
        for key in ("weight", "lo", "hi"):
            if key not in box:
                raise ScenarioParseError(f"missing key {key!r}", where)
        extra = set(box) - {"weight", "lo", "hi"}
        if extra:
            raise ScenarioParseError(f"unknown key(s) {sorted(extra)}", where)
        w = _number(box["weight"], f"{where}.weight")
        if w <= 0:
            raise ScenarioParseError("weight must be positive", f"{where}.weight")
        lo = _corner(box["lo"], f"{where}.lo", dim)
        hi = _corner(box["hi"], f"{where}.hi", dim)
        for a in range(dim):
            if lo[a] >= hi[a]:
                raise ScenarioParseError(f"lo >= hi on axis {a} ({lo[a]!r} >= {hi[a]!r})", f"{where}.hi")
        comps.append((w, lo, hi))
    total = sum(c[0] for c in comps)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise ScenarioParseError(f"weights sum {total:.12g}, expected 1", field)
    return Density.mixture(comps)


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioParseError("top level must be an object")
    unknown = set(doc) - _KNOWN_KEYS
    if unknown:
        raise ScenarioParseError(f"unknown key(s) {sorted(unknown)}")
    for key in ("dimension", "gt_density", "gr_density"):
        if key not in doc:
            raise ScenarioParseError(f"missing key {key!r}", key)
    dim = _number(doc["dimension"], "dimension", integer=True)
    if dim not in (1, 2):
        raise ScenarioParseError("dimension must be 1 or 2", "dimension")
    vals = {k: doc.get(k, v) for k, v in SCENARIO_DEFAULTS.items()}
    h = _number(vals["h"], "h")
    r = _number(vals["r"], "r")
    rho = _number(vals["rho"], "rho")
    n = _number(vals["n"], "n", integer=True)
    if h < 0:
        raise ScenarioParseError("must be >= 0", "h")
    if r < 1:
        raise ScenarioParseError("must be >= 1", "r")
    if rho < 0:
        raise ScenarioParseError("must be >= 0", "rho")
    if n < 1:
        raise ScenarioParseError("must be >= 1", "n")
    fX = _density(doc["gt_density"], "gt_density", dim)
    fY = _density(doc["gr_density"], "gr_density", dim)
    return Scenario(fX, fY, h=h, r=r, rho=rho, n=n)


def parse_scenario_text(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(exc.msg, line=exc.lineno) from None
    return scenario_from_dict(doc)


def parse_scenario(path: Union[str, Path]) -> Scenario:
    """Read and validate a scenario file; ``ex1`` names the bundled example."""
    if str(path) in BUILTIN_SCENARIOS:
        text = resources.files("uavrelay.scenarios").joinpath(f"{path}.json").read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read scenario {path}: {exc.strerror}") from None
    return parse_scenario_text(text)


def _density_doc(f: Density) -> list:
    return [
        {"weight": float(w), "lo": lo.tolist(), "hi": hi.tolist()}
        for w, lo, hi in zip(f.weights, f.lo, f.hi)
    ]


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "dimension": s.d,
        "h": s.h,
        "r": s.r,
        "rho": s.rho,
        "n": s.n,
        "gt_density": _density_doc(s.fX),
        "gr_density": _density_doc(s.fY),
    }


def emit_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2) + "\n"


def result_row(mode, n, lam, p_uav, p_gt, se_uav=0.0, se_gt=0.0) -> dict:
    return dict(zip(RESULT_COLUMNS, (mode, n, lam, p_uav, p_gt, se_uav, se_gt)))


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def _json_value(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return None if not math.isfinite(v) else float(v)
    return v


def results_csv(rows: Iterable[dict]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in RESULT_COLUMNS])
    return buf.getvalue()


def deployment_rows(deployments: Iterable[tuple]) -> list:
    """Flatten ``(run_id, Deployment)`` pairs into dump rows."""
    rows = []
    for run_id, U in deployments:
        for i, p in enumerate(U.positions):
            row = {"run_id": run_id, "relay_index": i, "x": float(p[0])}
            if len(p) > 1:
                row["y"] = float(p[1])
            rows.append(row)
    return rows


def deployments_csv(rows: list) -> str:
    cols = ["run_id", "relay_index", "x"] + (["y"] if rows and "y" in rows[0] else [])
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in cols])
    return buf.getvalue()


def results_json(rows: list, deployments: Optional[list] = None, metadata: Optional[dict] = None) -> str:
    doc = {
        "metadata": metadata or {},
        "columns": list(RESULT_COLUMNS),
        "rows": [{k: _json_value(v) for k, v in row.items()} for row in rows],
    }
    if deployments is not None:
        doc["deployments"] = [{k: _json_value(v) for k, v in row.items()} for row in deployments]
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _parse_cell(col, text):
    if col == "mode":
        return text
    if col == "n":
        return math.inf if text == "inf" else int(text)
    return float(text)


def read_results_csv(path_or_text: Union[str, Path]) -> list:
    """Rows of a results CSV with numeric columns converted back to numbers."""
    text = str(path_or_text)
    if "\n" not in text:
        text = Path(text).read_text()
    reader = csv.DictReader(_io.StringIO(text))
    if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
        raise UsageError(f"unexpected results header {reader.fieldnames}")
    return [{c: _parse_cell(c, row[c]) for c in RESULT_COLUMNS} for row in reader]


def read_deployment_csv(path: Union[str, Path], run_id: Optional[int] = None) -> Deployment:
    """Positions of one run from a deployment dump (the first run by default)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise UsageError(f"deployment file {path} has no rows")
    if run_id is None:
        run_id = int(rows[0]["run_id"])
    picked = sorted((r for r in rows if int(r["run_id"]) == run_id), key=lambda r: int(r["relay_index"]))
    if not picked:
        raise UsageError(f"no rows for run_id {run_id} in {path}")
    cols = ["x", "y"] if "y" in picked[0] and picked[0]["y"] not in (None, "") else ["x"]
    return Deployment(np.array([[float(r[c]) for c in cols] for r in picked]))
