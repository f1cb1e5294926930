"""Experiment configuration: JSON schema, validation and normalisation."""

from __future__ import annotations

import copy
import json
from pathlib import Path

import jsonschema

from ..errors import ConfigError

SCHEMA_VERSION = 1

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_int1 = {"type": "integer", "minimum": 1}


def _pair(item=_num):
    return {"type": "array", "items": item, "minItems": 2, "maxItems": 2}


_vec3 = {"type": "array", "items": _num, "minItems": 3, "maxItems": 3}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


MODEL = _obj({
    "zeta": _nonneg, "beta1": _pos, "beta2": _pos, "c": _num, "d": _num,
    "a12": _num, "a21": _num, "h": _num,
})

INTEGRATION = _obj({
    "rtol": _pos, "atol": _pos,
    "max_step": {"anyOf": [_pos, {"type": "null"}]},
    "min_step": _pos, "max_steps": _int1,
})

OUTPUT = _obj({
    "dir": {"type": "string", "minLength": 1},
    "format": {"enum": ["csv", "json"]},
    "name": {"type": "string", "pattern": "^[A-Za-z0-9._-]+$"},
})

SYSTEM = {"oneOf": [
    _obj({"type": {"const": "model"}}, ["type"]),
    _obj({"type": {"const": "normal-form"}, "zeta": _pos, "alpha": _num, "h": _num,
          "printed": {"type": "boolean"}}, ["type"]),
]}

PLANE = _obj({
    "normal": {"type": "array", "items": _num, "minItems": 1},
    "offset": _num,
    "direction": {"enum": ["rising", "falling", "any"]},
    "component": {"anyOf": [{"type": "integer", "minimum": 0}, {"type": "null"}]},
}, ["normal", "offset"])

CRITERIA = _obj({
    "lao_threshold": _num, "gamma_band": _pair(), "transient": _nonneg,
    "horizon": _pos, "n_windows": _int1,
})

EXPERIMENTS = {
    "simulate": _obj({
        "kind": {"const": "simulate"}, "system": SYSTEM, "y0": _vec3, "span": _pair(),
        "time_scale": {"enum": ["slow", "fast"]},
        "store": {"enum": ["nodes", "dense"]},
        "lao_threshold": _num, "sao_min_prominence": _nonneg, "transient": _num,
    }, ["kind", "y0", "span"]),
    "equilibria": _obj({"kind": {"const": "equilibria"}}, ["kind"]),
    "folded": _obj({"kind": {"const": "folded"}}, ["kind"]),
    "fsn2": _obj({"kind": {"const": "fsn2"}, "h_bracket": _pair(), "n_scan": _int1}, ["kind"]),
    "normalform": _obj({"kind": {"const": "normalform"}, "zeta": _pos, "h": _num,
                        "printed": {"type": "boolean"}}, ["kind"]),
    "hopf": _obj({"kind": {"const": "hopf"}, "zeta": _pos,
                  "printed": {"type": "boolean"}}, ["kind"]),
    "poincare": _obj({
        "kind": {"const": "poincare"}, "system": SYSTEM, "y0": _vec3, "plane": PLANE,
        "n_returns": _int1, "transient": _nonneg, "t_max": _pos,
        "aperiodicity_tol": _pos,
    }, ["kind", "y0", "n_returns"]),
    "basin": _obj({
        "kind": {"const": "basin"}, "x0": _num,
        "rect": {"type": "array", "items": _pair(), "minItems": 2, "maxItems": 2},
        "resolution": _pair({"type": "integer", "minimum": 1}),
        "criteria": CRITERIA,
    }, ["kind", "x0", "rect", "resolution"]),
    "scan": _obj({
        "kind": {"const": "scan"}, "h_range": _pair(), "n_h": {"type": "integer", "minimum": 2},
        "transient": _nonneg, "window": _nonneg, "y0": _vec3, "warm_start": {"type": "boolean"},
    }, ["kind", "h_range", "n_h"]),
    "navg": _obj({
        "kind": {"const": "navg"}, "h_range": _pair(), "n_h": {"type": "integer", "minimum": 2},
        "transient": _nonneg, "window": _pos, "y0": _vec3,
        "lao_threshold": _num, "sao_min_prominence": _nonneg,
    }, ["kind", "h_range", "n_h"]),
    "twopar": _obj({
        "kind": {"const": "twopar"}, "h_range": _pair(), "beta1_range": _pair(),
        "resolution": _pair({"type": "integer", "minimum": 8}),
    }, ["kind", "h_range", "beta1_range", "resolution"]),
}

KINDS = tuple(EXPERIMENTS)

TOP = _obj({
    "schema_version": {"const": SCHEMA_VERSION},
    "model": MODEL,
    "integration": INTEGRATION,
    "experiment": {"type": "object", "required": ["kind"],
                   "properties": {"kind": {"enum": list(KINDS)}}},
    "output": OUTPUT,
}, ["schema_version", "experiment"])


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else "/"


def _check(instance, schema, prefix=()):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(instance), key=lambda e: list(e.absolute_path))
    if errors:
        e = min(errors, key=lambda e: (len(e.absolute_path), str(e.absolute_path)))
        ptr = _pointer([*prefix, *e.absolute_path])
        raise ConfigError(e.message, ptr)


def _ranges(exp):
    for key in ("h_range", "beta1_range", "span", "h_bracket"):
        if key in exp:
            a, b = exp[key]
            if not a < b:
                raise ConfigError("range must be increasing",
                                  f"/experiment/{key}")
    if "rect" in exp:
        for i, (a, b) in enumerate(exp["rect"]):
            if not a < b:
                raise ConfigError("range must be increasing",
                                  f"/experiment/rect/{i}")


def validate(doc) -> dict:
    """Check a parsed config and return a deep copy; raises ConfigError."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object", "/")
    _check(doc, TOP)
    exp = doc["experiment"]
    _check(exp, EXPERIMENTS[exp["kind"]], ("experiment",))
    _ranges(exp)
    return copy.deepcopy(doc)


def parse(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} at line {exc.lineno} column {exc.colno}",
                          "/") from None
    if isinstance(doc, dict) and "manifest_version" in doc:
        # a provenance manifest re-runs its embedded config
        if "config" not in doc:
            raise ConfigError("manifest has no config", "/config")
        doc = doc["config"]
    return validate(doc)


def load(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}", "") from None
    return parse(text)
