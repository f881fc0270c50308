"""Versioned JSON reports and CSV time series."""
from __future__ import annotations

import json
import math
from pathlib import Path

import jsonschema
import numpy as np

SCHEMA_VERSION = "graphext-report/1"

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "command", "config", "status", "result"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "command": {"enum": ["classify", "deficiency", "catalogue", "simulate", "certify"]},
        "config": {
            "type": "object",
            "required": ["tolerances", "seed"],
            "properties": {
                "tolerances": {
                    "type": "object",
                    "required": ["unitary", "psd"],
                    "properties": {"unitary": {"type": "number"}, "psd": {"type": "number"}},
                },
                "seed": {"type": "integer"},
                "grid_h": {"type": ["number", "null"]},
                "horizon": {"type": ["number", "null"]},
                "input": {"type": ["string", "null"]},
            },
        },
        "status": {"enum": ["ok", "mismatch", "inconsistent", "horizon exceeded",
                            "inconsistent discretization"]},
        "result": {"type": "object"},
    },
}


def plain(value):
    """JSON-ready copy: numpy scalars and arrays unwrapped, complex numbers
    as [re, im], non-finite floats as null."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, (complex, np.complexfloating)):
        return [plain(value.real), plain(value.imag)]
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def make_report(command: str, config: dict, result: dict, status: str = "ok") -> dict:
    report = {"schema": SCHEMA_VERSION, "command": command, "config": plain(config),
              "status": status, "result": plain(result)}
    validate(report)
    return report


def validate(report: dict):
    jsonschema.validate(report, REPORT_SCHEMA)


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_report(report: dict, path=None) -> str:
    text = dumps(report)
    if path is not None:
        Path(path).write_text(text)
    return text


def load_json(path) -> dict:
    """Read a JSON file; syntax errors carry line and column."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
