"""Scenario files and output tables.

Scenario files are YAML documents with a strict schema; any key not listed
below is rejected::

    gateways:                 # required for sop / approx
      - {capacity: 10.0, outage_prob: 0.01}
      - {capacity: 10.0, outage_prob: 0.02}
    users:                    # either users ...
      - {demand: 4.0}
    total_demand: 12.0        # ... or total_demand (or both, if consistent)
    extra_gateways:           # optional, for the improvement factor
      - {capacity: 10.0, outage_prob: 0.015}
    experiment:               # required for study
      n_configs: 1000
      prob_range: [0.0, 0.02]
      seed: 0
      grids:
        n: [4, 5, 6, 7, 8, 9, 10]
        ceil_r: [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]
        k: [1, 2, 3, 4]
        base_n: 5
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import yaml

from .errors import ScenarioError
from .experiments import RandomConfigSpec
from .sgd_model import SgdScenario

_TOP_KEYS = {"gateways", "users", "total_demand", "extra_gateways", "experiment"}
_GATEWAY_KEYS = {"capacity", "outage_prob"}
_USER_KEYS = {"demand"}
_EXPERIMENT_KEYS = {"n_configs", "prob_range", "seed", "grids"}
_GRID_KEYS = {"n", "ceil_r", "k", "base_n"}

DEFAULT_N_GRID = tuple(range(4, 11))
DEFAULT_K_GRID = (1, 2, 3, 4)
DEFAULT_BASE_N = 5


@dataclass(frozen=True)
class ExperimentGrids:
    n: tuple[int, ...] = DEFAULT_N_GRID
    ceil_r: tuple[int, ...] = field(default=())
    k: tuple[int, ...] = DEFAULT_K_GRID
    base_n: int = DEFAULT_BASE_N

    def ceil_r_for(self, n_max: int) -> tuple[int, ...]:
        return self.ceil_r or tuple(range(1, n_max + 1))


def _check_keys(obj: Any, allowed: set[str], where: str, required: Sequence[str] = ()) -> dict:
    if not isinstance(obj, dict):
        raise ScenarioError(f"{where}: expected a mapping, got {type(obj).__name__}")
    unknown = set(obj) - allowed
    if unknown:
        raise ScenarioError(f"{where}: unknown key(s) {sorted(map(str, unknown))}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ScenarioError(f"{where}: missing key(s) {missing}")
    return obj


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{where}: expected an integer, got {value!r}")
    return value


def _int_list(value: Any, where: str) -> tuple[int, ...]:
    if not isinstance(value, list) or not value:
        raise ScenarioError(f"{where}: expected a non-empty list of integers")
    return tuple(_integer(v, f"{where}[{i}]") for i, v in enumerate(value))


def load_document(path: str | Path) -> dict:
    """Read and key-check a scenario file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: invalid YAML: {exc}") from exc
    if doc is None:
        raise ScenarioError(f"{path}: empty document")
    return _check_keys(doc, _TOP_KEYS, str(path))


def _gateways(items: Any, where: str) -> tuple[list[float], list[float]]:
    if not isinstance(items, list) or not items:
        raise ScenarioError(f"{where}: expected a non-empty list")
    caps, probs = [], []
    for i, item in enumerate(items):
        entry = _check_keys(item, _GATEWAY_KEYS, f"{where}[{i}]", required=("capacity", "outage_prob"))
        caps.append(_number(entry["capacity"], f"{where}[{i}].capacity"))
        probs.append(_number(entry["outage_prob"], f"{where}[{i}].outage_prob"))
    return caps, probs


def scenario_from_document(doc: dict) -> SgdScenario:
    if "gateways" not in doc:
        raise ScenarioError("scenario needs a 'gateways' list")
    caps, probs = _gateways(doc["gateways"], "gateways")
    demands: list[float] = []
    if "users" in doc:
        users = doc["users"]
        if not isinstance(users, list):
            raise ScenarioError("users: expected a list")
        for i, item in enumerate(users):
            entry = _check_keys(item, _USER_KEYS, f"users[{i}]", required=("demand",))
            demands.append(_number(entry["demand"], f"users[{i}].demand"))
    total = doc.get("total_demand")
    if total is not None:
        total = _number(total, "total_demand")
    if not demands and total is None:
        raise ScenarioError("scenario needs 'users' or 'total_demand'")
    try:
        return SgdScenario(gateway_capacities=caps, outage_probs=probs, user_demands=demands, total_demand=total)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def extra_gateways_from_document(doc: dict) -> tuple[list[float], list[float]] | None:
    if "extra_gateways" not in doc:
        return None
    return _gateways(doc["extra_gateways"], "extra_gateways")


def experiment_from_document(doc: dict) -> tuple[RandomConfigSpec, ExperimentGrids]:
    block = _check_keys(doc.get("experiment", {}), _EXPERIMENT_KEYS, "experiment")
    kwargs: dict[str, Any] = {}
    if "n_configs" in block:
        kwargs["n_configs"] = _integer(block["n_configs"], "experiment.n_configs")
    if "seed" in block:
        kwargs["seed"] = _integer(block["seed"], "experiment.seed")
    if "prob_range" in block:
        rng = block["prob_range"]
        if not isinstance(rng, list) or len(rng) != 2:
            raise ScenarioError("experiment.prob_range: expected [low, high]")
        kwargs["prob_low"] = _number(rng[0], "experiment.prob_range[0]")
        kwargs["prob_high"] = _number(rng[1], "experiment.prob_range[1]")
    grids = ExperimentGrids()
    if "grids" in block:
        g = _check_keys(block["grids"], _GRID_KEYS, "experiment.grids")
        grids = ExperimentGrids(
            n=_int_list(g["n"], "grids.n") if "n" in g else DEFAULT_N_GRID,
            ceil_r=_int_list(g["ceil_r"], "grids.ceil_r") if "ceil_r" in g else (),
            k=_int_list(g["k"], "grids.k") if "k" in g else DEFAULT_K_GRID,
            base_n=_integer(g["base_n"], "grids.base_n") if "base_n" in g else DEFAULT_BASE_N,
        )
    try:
        spec = RandomConfigSpec(**kwargs)
    except ValueError as exc:
        raise ScenarioError(f"experiment: {exc}") from exc
    return spec, grids


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(value)


@dataclass
class OutputTable:
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def add(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} fields, table has {len(self.columns)} columns")
        self.rows.append(list(values))

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.metadata.items():
            buf.write(f"# {key}={format_value(value)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        def clean(v: Any) -> Any:
            if isinstance(v, float) and math.isnan(v):
                return None
            return v

        doc = {
            "metadata": {k: clean(v) for k, v in self.metadata.items()},
            "columns": self.columns,
            "rows": [[clean(v) for v in row] for row in self.rows],
        }
        return json.dumps(doc, indent=2) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


def read_csv_table(text: str) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Parse a table written by :meth:`OutputTable.to_csv` back into metadata and rows."""
    lines = text.splitlines()
    meta = {}
    body_start = 0
    for i, line in enumerate(lines):
        if not line.startswith("# "):
            body_start = i
            break
        key, _, value = line[2:].partition("=")
        meta[key] = value
    rows = list(csv.DictReader(lines[body_start:]))
    return meta, rows
