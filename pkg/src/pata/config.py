"""Run configuration: JSON schema, validation and conversion to solver objects."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema

from .schedules import PowerLaw, PowerStep, RecursiveStep, Theorem2, Theorem3
from .solvers import SolverConfig

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

PROBLEM_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"type": {"const": "rotation2d"}},
            "required": ["type"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": "random"},
                "n": {"type": "integer", "minimum": 2, "multipleOf": 2},
                "zeta": {"type": "number", "minimum": 0},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
            },
            "required": ["type", "n", "zeta", "seed"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"type": {"const": "file"}, "path": {"type": "string"}},
            "required": ["type", "path"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"type": {"const": "inline"}, "data": {"type": "object"}},
            "required": ["type", "data"],
            "additionalProperties": False,
        },
    ]
}

STEP_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "type": {"const": "power"},
                "a": _POS,
                "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
            "required": ["type", "a", "alpha"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": "recursive"},
                "gamma0": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "theta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
            "required": ["type", "gamma0", "theta"],
            "additionalProperties": False,
        },
    ]
}

TIKHONOV_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"type": {"const": "theorem2"}},
            "required": ["type"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": "powerlaw"},
                "c": _POS,
                "beta": {"type": "number", "exclusiveMinimum": 1},
                "slope": _POS,
            },
            "required": ["type"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "type": {"const": "theorem3"},
                "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "eta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
            },
            "required": ["type", "delta"],
            "additionalProperties": False,
        },
    ]
}

RUN_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "problem": PROBLEM_SCHEMA,
        "solver": {"enum": ["pata", "pata_certificate", "baseline"]},
        "step": STEP_SCHEMA,
        "tikhonov": TIKHONOV_SCHEMA,
        "k_max": {"type": "integer", "minimum": 1},
        "tol": _POS,
        "initial": {
            "oneOf": [
                {"const": "boundary-random"},
                {"type": "array", "items": _NUM, "minItems": 1},
            ]
        },
        "seed": {"type": "integer", "minimum": 0},
        "check_every": {"type": "integer", "minimum": 1},
        "normalize_maps": {"type": "boolean"},
        "record_limit": {"type": "integer", "minimum": 1},
        "weighting": {"enum": ["practical", "ergodic"]},
        "lambda": _POS,
        "backend": {"enum": ["auto", "compiled", "python"]},
        "output": {"type": "string"},
        "jobs": {"type": "integer", "minimum": 1},
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "seeds": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
                "zetas": {"type": "array", "items": _POS, "minItems": 1},
                "n": {"type": "integer", "minimum": 2, "multipleOf": 2},
            },
        },
    },
}


class ConfigError(ValueError):
    """Invalid run configuration; ``errors`` lists the schema diagnostics."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class RunConfig:
    raw: dict
    solver: str = "pata"
    problem: dict | None = None
    solver_config: SolverConfig = field(default_factory=SolverConfig)
    lam: float = 0.1
    output: str | None = None
    jobs: int = 1
    sweep: dict = field(default_factory=dict)


def validate(raw: Any, require=()) -> list:
    """Return a list of human-readable schema errors (empty when valid)."""
    v = jsonschema.Draft7Validator(RUN_SCHEMA)
    errs = []
    if not isinstance(raw, dict):
        return ["configuration must be a JSON object"]
    for key in require:
        if key not in raw:
            errs.append(f"missing required key {key!r}")
    for e in sorted(v.iter_errors(raw), key=lambda e: list(e.absolute_path)):
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        errs.append(f"{where}: {e.message}")
    return errs


def _step(d):
    if d["type"] == "power":
        return PowerStep(float(d["a"]), float(d["alpha"]))
    return RecursiveStep(float(d["gamma0"]), float(d["theta"]))


def _tikhonov(d):
    kind = d["type"]
    if kind == "theorem2":
        return Theorem2()
    if kind == "theorem3":
        return Theorem3(float(d["delta"]), float(d.get("eta", 0.01)))
    return PowerLaw(float(d.get("c", 1.0)), float(d.get("beta", 2.0)), float(d.get("slope", 1.0)))


def build(raw: dict, require=(), defaults: dict | None = None) -> RunConfig:
    """Validate ``raw`` (merged over ``defaults``) and build a :class:`RunConfig`."""
    merged = dict(defaults or {})
    merged.update(raw)
    errs = validate(merged, require)
    if errs:
        raise ConfigError(errs)
    kw = {}
    if "step" in merged:
        kw["step_rule"] = _step(merged["step"])
    if "tikhonov" in merged:
        kw["tikhonov"] = _tikhonov(merged["tikhonov"])
    for key in ("k_max", "tol", "seed", "check_every", "normalize_maps", "record_limit",
                "weighting", "backend"):
        if key in merged:
            kw[key] = merged[key]
    if "initial" in merged:
        init = merged["initial"]
        kw["initial"] = init if isinstance(init, str) else tuple(float(x) for x in init)
    solver = merged.get("solver", "pata")
    if solver == "pata_certificate" and not isinstance(kw.get("tikhonov"), Theorem3):
        raise ConfigError(["solver 'pata_certificate' requires a theorem3 tikhonov schedule"])
    try:
        sc = SolverConfig(**kw)
    except ValueError as exc:
        raise ConfigError([str(exc)]) from exc
    return RunConfig(
        raw=merged,
        solver=solver,
        problem=merged.get("problem"),
        solver_config=sc,
        lam=float(merged.get("lambda", 0.1)),
        output=merged.get("output"),
        jobs=int(merged.get("jobs", 1)),
        sweep=merged.get("sweep", {}),
    )


def load(path, require=(), defaults=None) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError([f"cannot read config {path}: {exc}"]) from exc
    return build(raw, require, defaults)
