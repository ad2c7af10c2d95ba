"""Run configuration: a TOML file validated against a JSON schema."""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import jsonschema
import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import ArgumentError
from .jet import FAMILIES, conformal_torus, custom_diagonal, flat_product, jet_from_analytic, sphere_circle_warped
from .metric import VARIANTS
from .tensors import BoundaryGrid

_number = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "input": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "family": {"enum": [*FAMILIES, "conformal_torus"]},
                "eps": _number,
                "r0": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": float(np.pi)},
                "length": _pos,
                "amplitude": _number,
                "rate": _number,
                "table": {"type": "string"},
                "jet_method": {"enum": ["auto", "closed", "fd"]},
            },
            "required": ["family"],
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "variant": {"enum": list(VARIANTS)},
                "resolution": {"type": "integer", "minimum": 8, "multipleOf": 2},
                "dimension": {"type": "integer", "minimum": 2, "maximum": 4},
                "t_samples": {"type": "integer", "minimum": 16},
                "oracle": {"type": "boolean"},
                "oracle_t_samples": {"type": "integer", "minimum": 32},
                "delta_scale": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "max_retries": {"type": "integer", "minimum": 0, "maximum": 32},
                "require_remark1": {"type": "boolean"},
            },
        },
        "audit": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_delta": {"type": "integer", "minimum": 2},
                "n_t": {"type": "integer", "minimum": 2},
                "safety": {"type": "number", "minimum": 1},
                "multiplier": {"type": "integer", "minimum": 1},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: _pos for k in ("R_abs", "junction", "match", "geodesic_theta")},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "format": {"enum": ["json", "csv", "text"]},
            },
        },
    },
    "required": ["input"],
}


@dataclass(frozen=True)
class Tolerances:
    R_abs: float = 1e-8
    junction: float = 1e-10
    match: float = 1e-9
    geodesic_theta: float = 1e-8


@dataclass(frozen=True)
class RunConfig:
    family: str = "sphere_circle_warped"
    params: dict = field(default_factory=lambda: {"eps": 0.01, "r0": float(np.pi / 6)})
    table: str | None = None
    jet_method: str = "auto"
    variant: str = "convex"
    resolution: int = 64
    dimension: int = 2
    t_samples: int = 256
    oracle: bool = True
    oracle_t_samples: int = 128
    delta_scale: float = 1.0
    max_retries: int = 8
    require_remark1: bool | None = None
    n_delta: int = 16
    n_t: int = 32
    safety: float = 1.25
    audit_multiplier: int = 4
    tolerances: Tolerances = Tolerances()
    out_dir: str | None = None
    out_format: str = "json"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ArgumentError(f"unknown variant {self.variant!r}")
        if self.resolution < 8 or self.resolution % 2:
            raise ArgumentError("resolution must be even and >= 8")

    @property
    def remark1_required(self) -> bool:
        if self.require_remark1 is None:
            return self.variant == "convex"
        return self.require_remark1

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def to_dict(self):
        return asdict(self)

    def grid(self) -> BoundaryGrid:
        return BoundaryGrid.uniform(self.dimension, self.resolution)

    def build_jet(self):
        """Sample the configured input on the configured grid."""
        if self.table is not None:
            return load_table_jet(self.table)
        grid = self.grid()
        p = dict(self.params)
        if self.family == "sphere_circle_warped":
            if self.dimension != 2:
                raise ArgumentError("sphere_circle_warped has a two-dimensional boundary")
            spec = sphere_circle_warped(**{k: p[k] for k in ("eps", "r0") if k in p})
        elif self.family == "flat_product":
            spec = flat_product(**{k: p[k] for k in ("length",) if k in p})
        elif self.family == "conformal_torus":
            spec = conformal_torus(grid, **{k: p[k] for k in ("amplitude", "rate") if k in p})
        else:
            raise ArgumentError("custom_diagonal input needs a table file")
        return jet_from_analytic(spec, grid, method=self.jet_method)


def load_table_jet(path):
    """Diagonal jet from an ``.npz`` file with arrays ``h0, h0p, h0pp`` of shape ``(d, *grid)``.

    An optional ``periods`` array gives the torus periods (default ``2 pi``).
    """
    path = Path(path)
    try:
        data = np.load(path)
    except OSError as exc:
        raise ArgumentError(f"cannot read jet table {path}: {exc}") from exc
    missing = {"h0", "h0p", "h0pp"} - set(data.files)
    if missing:
        raise ArgumentError(f"jet table {path} lacks arrays {sorted(missing)}")
    shape = data["h0"].shape[1:]
    periods = tuple(float(x) for x in data["periods"]) if "periods" in data.files else (2 * np.pi,) * len(shape)
    grid = BoundaryGrid(periods, tuple(int(n) for n in shape))
    spec = custom_diagonal(data["h0"], data["h0p"], data["h0pp"])
    return jet_from_analytic(spec, grid, method="closed")


def from_mapping(doc: dict, base_dir=".") -> RunConfig:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ArgumentError(f"invalid config at {loc}: {exc.message}") from exc
    inp = dict(doc["input"])
    family = inp.pop("family")
    table = inp.pop("table", None)
    method = inp.pop("jet_method", "auto")
    if family == "custom_diagonal" and table is None:
        raise ArgumentError("custom_diagonal input needs input.table")
    if table is not None:
        table = str(Path(base_dir) / table)
    run = doc.get("run", {})
    audit = doc.get("audit", {})
    out = doc.get("output", {})
    kw = dict(
        family=family,
        params=inp if inp or family != "sphere_circle_warped" else RunConfig().params,
        table=table,
        jet_method=method,
        tolerances=Tolerances(**doc.get("tolerances", {})),
    )
    kw.update({k: run[k] for k in run})
    if "multiplier" in audit:
        kw["audit_multiplier"] = audit["multiplier"]
    kw.update({k: audit[k] for k in ("n_delta", "n_t", "safety") if k in audit})
    if "dir" in out:
        kw["out_dir"] = out["dir"]
    if "format" in out:
        kw["out_format"] = out["format"]
    return RunConfig(**kw)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ArgumentError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ArgumentError(f"config {path} is not valid TOML: {exc}") from exc
    return from_mapping(doc, base_dir=path.parent)
