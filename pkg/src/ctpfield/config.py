"""Experiment configuration: parsing, validation and round-tripping.

A configuration is one JSON document with nested sections (see
``configs/`` for committed examples covering the spacelike, timelike,
adiabatic and nonadiabatic scenarios).  Validation errors carry the
dotted path of the offending field so a reviewer can fix the file without
reading code.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .greens import FieldParams
from .influence import FUNCTIONAL_NAMES, ExperimentSetup
from .numerics import QuadratureSpec
from .protocols import alice_protocol, bob_protocol, bob_protocol_smoothed, zero_protocol

__all__ = ["ExperimentConfig", "SweepAxis", "ConfigError"]


class ConfigError(ValueError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


SWEEPABLE = {
    "field.mass", "field.uv_cutoff", "field.smearing_radius",
    "alice.amplitude", "alice.ramp_time",
    "bob.amplitude", "bob.duration",
    "geometry.separation", "meter.epsilon2",
}

_DEFAULTS = {
    "field": {"mass": 1.0, "uv_cutoff": None, "smearing_radius": None},
    "alice": {"amplitude": 1.0, "ramp_time": 2.0},
    "bob": {"amplitude": 1.0, "duration": 1.0, "edge_smoothing": 0.0},
    "geometry": {"separation": 3.0},
    "meter": {"epsilon2": 1.0},
    "quadrature": {"rel_tol": 1e-8, "abs_tol": 1e-12,
                   "max_subdivisions": 10_000,
                   "oscillatory_periods_per_panel": 0.5},
    "lattice": {"k_max": None, "n_shells": 256, "nodes_per_shell": 8},
    "outputs": None,
    "sweep": [],
}


@dataclass(frozen=True)
class SweepAxis:
    parameter: str
    min: float
    max: float
    points: int
    scale: str = "linear"


@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"line {exc.lineno}, column {exc.colno}",
                                  exc.msg) from exc
        return cls.parse(doc)

    @classmethod
    def parse(cls, doc) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("<root>", "configuration must be a JSON object")
        merged = {}
        for section, defaults in _DEFAULTS.items():
            given = doc.get(section)
            if isinstance(defaults, dict):
                merged[section] = dict(defaults)
                if given is not None:
                    if not isinstance(given, dict):
                        raise ConfigError(section, "must be an object")
                    for key, val in given.items():
                        if key not in defaults:
                            raise ConfigError(f"{section}.{key}", "unknown key")
                        merged[section][key] = val
            else:
                merged[section] = given if given is not None else defaults
        for key in doc:
            if key not in _DEFAULTS:
                raise ConfigError(key, "unknown section")
        cfg = cls(raw=merged)
        cfg._validate()
        return cfg

    # -- validation ---------------------------------------------------------

    def _num(self, section, key, positive=False, allow_none=False):
        val = self.raw[section][key]
        path = f"{section}.{key}"
        if val is None:
            if allow_none:
                return None
            raise ConfigError(path, "must be a number")
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(path, f"must be a number, got {val!r}")
        if positive and not val > 0:
            raise ConfigError(path, f"must be > 0, got {val!r}")
        return float(val)

    def _validate(self):
        self._num("field", "mass")
        if self.raw["field"]["mass"] < 0:
            raise ConfigError("field.mass", "must be >= 0")
        self._num("field", "uv_cutoff", positive=True, allow_none=True)
        self._num("field", "smearing_radius", positive=True, allow_none=True)
        self._num("alice", "amplitude")
        self._num("alice", "ramp_time", positive=True)
        self._num("bob", "amplitude")
        self._num("bob", "duration", positive=True)
        self._num("bob", "edge_smoothing")
        self._num("geometry", "separation", positive=True)
        self._num("meter", "epsilon2", positive=True)
        self._num("quadrature", "rel_tol", positive=True)
        self._num("quadrature", "abs_tol", positive=True)
        if int(self.raw["quadrature"]["max_subdivisions"]) < 16:
            raise ConfigError("quadrature.max_subdivisions", "must be >= 16")
        self._num("quadrature", "oscillatory_periods_per_panel", positive=True)
        outputs = self.raw["outputs"]
        if outputs is not None:
            if not isinstance(outputs, list):
                raise ConfigError("outputs", "must be a list of functional names")
            for name in outputs:
                if name not in FUNCTIONAL_NAMES:
                    raise ConfigError(f"outputs[{name}]",
                                      f"unknown functional; valid: {FUNCTIONAL_NAMES}")
        sweeps = self.raw["sweep"]
        if not isinstance(sweeps, list):
            raise ConfigError("sweep", "must be a list of axis objects")
        for i, ax in enumerate(sweeps):
            path = f"sweep[{i}]"
            if not isinstance(ax, dict):
                raise ConfigError(path, "must be an object")
            for req in ("parameter", "min", "max", "points"):
                if req not in ax:
                    raise ConfigError(f"{path}.{req}", "missing")
            if ax["parameter"] not in SWEEPABLE:
                raise ConfigError(f"{path}.parameter",
                                  f"not sweepable; valid: {sorted(SWEEPABLE)}")
            if int(ax["points"]) < 2:
                raise ConfigError(f"{path}.points", "need at least 2 points")
            if not float(ax["min"]) < float(ax["max"]):
                raise ConfigError(f"{path}.min", "need min < max")
            if ax.get("scale", "linear") not in ("linear", "log"):
                raise ConfigError(f"{path}.scale", "must be 'linear' or 'log'")
            if ax.get("scale") == "log" and not float(ax["min"]) > 0:
                raise ConfigError(f"{path}.min", "log scale needs min > 0")

    # -- realisation ----------------------------------------------------------

    def sweep_axes(self):
        return [SweepAxis(parameter=ax["parameter"], min=float(ax["min"]),
                          max=float(ax["max"]), points=int(ax["points"]),
                          scale=ax.get("scale", "linear"))
                for ax in self.raw["sweep"]]

    def outputs(self):
        out = self.raw["outputs"]
        return tuple(out) if out is not None else None

    def quadrature_spec(self) -> QuadratureSpec:
        q = self.raw["quadrature"]
        return QuadratureSpec(rel_tol=q["rel_tol"], abs_tol=q["abs_tol"],
                              max_subdivisions=int(q["max_subdivisions"]),
                              oscillatory_periods_per_panel=q[
                                  "oscillatory_periods_per_panel"])

    def setup(self, overrides=None) -> ExperimentSetup:
        """Build the experiment, optionally overriding sweepable parameters
        by dotted path."""
        vals = {s: dict(v) for s, v in self.raw.items()
                if isinstance(v, dict)}
        for path, value in (overrides or {}).items():
            section, key = path.split(".", 1)
            vals[section][key] = value
        a = vals["alice"]
        b = vals["bob"]
        if a["amplitude"] == 0.0:
            proto_a = zero_protocol()
        else:
            proto_a = alice_protocol(a["amplitude"], a["ramp_time"])
        if b["amplitude"] == 0.0:
            proto_b = zero_protocol()
        elif b["edge_smoothing"] > 0.0:
            proto_b = bob_protocol_smoothed(b["amplitude"], b["duration"],
                                            b["edge_smoothing"])
        else:
            proto_b = bob_protocol(b["amplitude"], b["duration"])
        fld = FieldParams(m=vals["field"]["mass"],
                          uv_cutoff=vals["field"]["uv_cutoff"],
                          smearing_radius=vals["field"]["smearing_radius"])
        return ExperimentSetup(protocol_A=proto_a, protocol_B=proto_b,
                               separation=vals["geometry"]["separation"],
                               field=fld,
                               meter_epsilon2=vals["meter"]["epsilon2"])

    def to_dict(self):
        return json.loads(json.dumps(self.raw))
