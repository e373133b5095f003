"""Run configuration: the ``spinodal-config v1`` JSON document.

Unknown keys are rejected everywhere so that a config file fully
determines a run.  The SHA-256 of the canonical JSON form is stamped into
every output file.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from spinodal.clifford import build_clifford_rep
from spinodal.errors import ConfigError
from spinodal.fields import GridSpec, SpinorField, synth_field
from spinodal.geometry import ModelMetric
from spinodal.harmonic import HomogeneousSpinorPoly, random_dirac_harmonic

SCHEMA_VERSION = "spinodal-config v1"

_pos = {"type": "number", "exclusiveMinimum": 0}
_vec = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_cvec = {
    "type": "array",
    "minItems": 1,
    "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema", "dimension", "grid"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "dimension": {"type": "integer", "minimum": 2, "maximum": 8},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["radius", "h"],
            "properties": {"radius": _pos, "h": _pos, "sphere_order": {"type": "integer", "minimum": 2}},
        },
        "metric": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {"kind": {"enum": ["flat", "sphere", "hyperbolic"]}, "curvature": _pos},
        },
        "field": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["harmonic_poly", "plane_wave", "planted", "dirac_bubble", "custom", "file"]},
                "degree": {"type": "integer", "minimum": 0, "maximum": 8},
                "poly": {"type": "object"},
                "xi": _vec,
                "sign": {"enum": [-1, 1]},
                "u": _cvec,
                "power": _pos,
                "scale": {"type": "number"},
                "center": _vec,
                "generator": {"const": "random_smooth"},
                "modes": {"type": "integer", "minimum": 1},
                "max_wavenumber": _pos,
                "path": {"type": "string"},
            },
        },
        "center": _vec,
        "radii": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["r0", "count"],
                    "properties": {"r0": _pos, "count": {"type": "integer", "minimum": 1, "maximum": 16}},
                },
                {"type": "array", "items": _pos, "minItems": 1},
            ]
        },
        "audit": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "beta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "C_N": _pos,
                "cap": _pos,
            },
        },
        "decompose": {
            "type": "object",
            "additionalProperties": False,
            "required": ["sigma"],
            "properties": {"sigma": _pos, "radius": _pos},
        },
        "nodal": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "c0": _pos,
                "levels": {"type": "integer", "minimum": 0, "maximum": 6},
                "classify": {"type": "integer", "minimum": 0},
                "box_scales": {"type": "integer", "minimum": 4, "maximum": 10},
            },
        },
        "output_dir": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
    },
}


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    base_dir: Path

    @property
    def sha256(self) -> str:
        return config_hash(self.raw)

    @property
    def n(self) -> int:
        return self.raw["dimension"]

    @property
    def seed(self) -> int:
        return self.raw.get("seed", 0)

    @property
    def grid(self) -> GridSpec:
        g = self.raw["grid"]
        return GridSpec(self.n, g["radius"], g["h"], g.get("sphere_order"))

    @property
    def metric(self) -> ModelMetric:
        m = self.raw.get("metric", {"kind": "flat"})
        if m["kind"] == "flat":
            return ModelMetric.flat(self.n)
        # the config stores |curvature|; the hyperbolic model is negatively curved
        kappa = m.get("curvature", 1.0)
        if m["kind"] == "sphere":
            return ModelMetric.sphere(self.n, kappa)
        return ModelMetric.hyperbolic(self.n, -kappa)

    @property
    def center(self) -> np.ndarray:
        return np.asarray(self.raw.get("center", [0.0] * self.n), dtype=float)

    @property
    def radii(self) -> np.ndarray:
        spec = self.raw.get("radii", {"r0": 0.3 * self.raw["grid"]["radius"], "count": 8})
        if isinstance(spec, list):
            return np.sort(np.asarray(spec, dtype=float))
        return spec["r0"] * 2.0 ** -np.arange(spec["count"])[::-1]

    @property
    def audit(self) -> dict:
        return {"beta": 0.5, "C_N": 1.0, "cap": 1e3, **self.raw.get("audit", {})}

    @property
    def nodal(self) -> dict:
        return {"c0": 1.0, "levels": 3, "classify": 32, "box_scales": 5, **self.raw.get("nodal", {})}

    @property
    def output_dir(self) -> Path:
        return self.base_dir / self.raw.get("output_dir", "spinodal-out")

    def build_field(self) -> SpinorField:
        return build_field(self)


def validate(raw: dict) -> dict:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {path}: {exc.message}") from None
    n = raw["dimension"]
    for key in ("center",):
        if key in raw and len(raw[key]) != n:
            raise ConfigError(f"{key} must have {n} entries")
    fld = raw.get("field", {})
    for key in ("xi", "center"):
        if key in fld and len(fld[key]) != n:
            raise ConfigError(f"field.{key} must have {n} entries")
    return raw


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    return RunConfig(validate(raw), path.parent)


def _spinor(pairs) -> np.ndarray:
    return np.array([complex(a, b) for a, b in pairs])


def build_field(cfg: RunConfig) -> SpinorField:
    """The field described by ``cfg.raw["field"]``; random parts use ``seed``."""
    spec = cfg.raw.get("field")
    if spec is None:
        raise ConfigError("this command needs a 'field' section")
    n = cfg.n
    rep = build_clifford_rep(n)
    N = rep.fiber_dim
    grid = cfg.grid
    rng = np.random.default_rng(cfg.seed)
    kind = spec["kind"]
    if "u" in spec and len(spec["u"]) != N:
        raise ConfigError(f"field.u must have {N} entries")

    def poly():
        if "poly" in spec:
            p = HomogeneousSpinorPoly.from_json(json.dumps(spec["poly"]))
            if (p.n, p.N) != (n, N):
                raise ConfigError("field.poly has the wrong dimension")
            return p
        return random_dirac_harmonic(rep, spec.get("degree", 2), rng)

    def unit_spinor():
        if "u" in spec:
            return _spinor(spec["u"])
        v = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        return v / np.linalg.norm(v)

    where = {"center": spec["center"]} if "center" in spec else {}
    if kind == "harmonic_poly":
        return synth_field(rep, grid, kind, poly=poly(), **where)
    if kind == "plane_wave":
        xi = spec.get("xi", [3.0, 4.0] + [0.0] * (n - 2))
        return synth_field(rep, grid, kind, xi=xi, sign=spec.get("sign", 1))
    if kind == "planted":
        P = poly()
        return synth_field(
            rep, grid, kind, poly=P, u=unit_spinor(), power=spec.get("power", P.k + 1.5), scale=spec.get("scale", 1.0), **where
        )
    if kind == "dirac_bubble":
        u = unit_spinor() if "u" in spec else np.eye(N)[0]
        return synth_field(rep, grid, kind, u=u, **where)
    if kind == "custom":
        return synth_field(
            rep,
            grid,
            kind,
            generator="random_smooth",
            seed=cfg.seed,
            modes=spec.get("modes", 6),
            max_wavenumber=spec.get("max_wavenumber", 3.0),
        )
    # kind == "file"
    if "path" not in spec:
        raise ConfigError("field kind 'file' needs 'path'")
    fpath = cfg.base_dir / spec["path"]
    try:
        text = fpath.read_text()
    except FileNotFoundError:
        raise ConfigError(f"field file {fpath} not found") from None
    f = SpinorField.from_text(text, rep)
    if not math.isclose(f.grid.radius, grid.radius) or not math.isclose(f.grid.h, grid.h):
        raise ConfigError("field file grid does not match the config grid")
    return f
