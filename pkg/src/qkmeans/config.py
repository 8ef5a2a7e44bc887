"""Experiment configuration files.

A config is a YAML document with four blocks::

    name: iris-su2
    dataset:
      path: builtin:iris          # or a CSV path, relative to the config file
      label_column: species
      feature_columns: null       # null = every column except the label
      has_header: true
      select: null                # optional column subset, names or indices
      scaling: {kind: standard_then_minmax, lo: 0, hi: pi}
    map:                          # omitted for classical runs
      map: efficient_su2
      qubits: 4
      reps: 1
      entanglement: linear
      pauli_strings: []
      theta_seed: [0, 1, 2]       # int or list (sweep)
    clustering:
      algorithm: quantum          # quantum | classical | kernel_matrix
      k: 3
      t_max: 30
      init: random_points
      seed: [0, 1, 2, 3, 4]       # int or list (sweep)
      mode: exact                 # or {shots: 4096, seed: 0}
    output:
      dir: runs/iris-su2
      kernel_cache: null
      plot_features: [2, 3]

Angles in the scaling block accept ``pi``, ``2pi``, ``pi/2`` and the like.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .clustering import DEFAULT_T_MAX, INIT_STRATEGIES
from .data import SCALINGS
from .errors import SchemaError
from .feature_maps import FeatureMapConfig
from .kernel import DEFAULT_SHOTS, EXACT, ShotMode

ALGORITHMS = ("quantum", "classical", "kernel_matrix")
_PI_RE = re.compile(r"^\s*(-?[0-9.]*)\s*\*?\s*pi\s*(?:/\s*([0-9.]+))?\s*$")


def parse_angle(value) -> float:
    if isinstance(value, (int, float)):
        return float(value)
    m = _PI_RE.match(str(value))
    if not m:
        raise SchemaError(f"cannot read {value!r} as a number")
    coef = m.group(1)
    coef = -1.0 if coef == "-" else float(coef) if coef else 1.0
    div = float(m.group(2)) if m.group(2) else 1.0
    return coef * math.pi / div


def _seed_list(value, key):
    if value is None:
        return [0]
    values = value if isinstance(value, list) else [value]
    if not values or not all(isinstance(v, int) and not isinstance(v, bool) for v in values):
        raise SchemaError(f"{key} must be an integer or a non-empty list of integers")
    return values


def _mode(value):
    if value is None or value == "exact":
        return EXACT
    if isinstance(value, dict) and "shots" in value:
        return ShotMode(int(value["shots"]), int(value.get("seed", 0)))
    raise SchemaError(f"mode must be 'exact' or {{shots: S, seed: n}}, got {value!r}")


def _mode_dict(mode):
    return "exact" if mode == EXACT else {"shots": mode.shots, "seed": mode.seed}


@dataclass
class ExperimentConfig:
    name: str
    dataset: dict
    map: dict | None
    clustering: dict
    output: dict = field(default_factory=dict)
    base_dir: Path = field(default_factory=Path.cwd)

    @property
    def algorithm(self) -> str:
        return self.clustering["algorithm"]

    @property
    def mode(self):
        return _mode(self.clustering["mode"])

    @property
    def theta_seeds(self) -> list[int]:
        if self.map is None:
            return [0]
        return self.map["theta_seed"]

    @property
    def init_seeds(self) -> list[int]:
        return self.clustering["seed"]

    def feature_map(self, theta_seed: int | None = None) -> FeatureMapConfig:
        if self.map is None:
            raise SchemaError(f"config {self.name!r} has no map block")
        d = dict(self.map)
        d["theta_seed"] = self.theta_seeds[0] if theta_seed is None else theta_seed
        return FeatureMapConfig.from_dict(d)

    def to_dict(self, with_output: bool = True) -> dict:
        out = {"name": self.name, "dataset": self.dataset, "clustering": self.clustering}
        if self.map is not None:
            out["map"] = self.map
        if with_output:
            out["output"] = self.output
        return copy.deepcopy(out)

    def digest(self) -> str:
        """Hash of the semantic content; output locations are excluded."""
        blob = json.dumps(self.to_dict(with_output=False), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_overrides(self, seed=None, shots=None, kernel_cache=None, out=None) -> ExperimentConfig:
        cfg = copy.deepcopy(self)
        if seed is not None:
            cfg.clustering["seed"] = [int(seed)]
        if shots is not None:
            old = cfg.mode
            cfg.clustering["mode"] = _mode_dict(
                ShotMode(int(shots), 0 if old == EXACT else old.seed)
            )
        if kernel_cache is not None:
            cfg.output["kernel_cache"] = str(kernel_cache)
        if out is not None:
            cfg.output["dir"] = str(out)
        return cfg


def normalize(raw: dict, base_dir: Path | None = None, name: str = "experiment") -> ExperimentConfig:
    """Validate a raw config mapping and fill defaults."""
    if not isinstance(raw, dict):
        raise SchemaError("config must be a mapping")
    unknown = set(raw) - {"name", "dataset", "map", "clustering", "output"}
    if unknown:
        raise SchemaError(f"unknown top-level keys: {sorted(unknown)}")

    ds = raw.get("dataset")
    if not isinstance(ds, dict) or "path" not in ds:
        raise SchemaError("dataset block with a path is required")
    scaling = ds.get("scaling") or {"kind": "standard"}
    if isinstance(scaling, str):
        scaling = {"kind": scaling}
    if scaling.get("kind") not in SCALINGS:
        raise SchemaError(f"dataset.scaling.kind must be one of {SCALINGS}")
    dataset = {
        "path": str(ds["path"]),
        "label_column": ds.get("label_column", -1),
        "feature_columns": ds.get("feature_columns"),
        "has_header": bool(ds.get("has_header", True)),
        "select": ds.get("select"),
        "scaling": {
            "kind": scaling["kind"],
            "lo": parse_angle(scaling.get("lo", 0.0)),
            "hi": parse_angle(scaling.get("hi", 1.0)),
        },
    }

    cl = raw.get("clustering") or {}
    algorithm = cl.get("algorithm", "quantum" if raw.get("map") else "classical")
    if algorithm not in ALGORITHMS:
        raise SchemaError(f"clustering.algorithm must be one of {ALGORITHMS}")
    k = cl.get("k")
    t_max = cl.get("t_max", DEFAULT_T_MAX)
    if not isinstance(k, int) or k < 1:
        raise SchemaError(f"clustering.k must be an integer >= 1, got {k!r}")
    if not isinstance(t_max, int) or t_max < 1:
        raise SchemaError(f"clustering.t_max must be an integer >= 1, got {t_max!r}")
    init = cl.get("init", "random_points")
    if init not in INIT_STRATEGIES:
        raise SchemaError(f"clustering.init must be one of {INIT_STRATEGIES}")
    mode = cl.get("mode", "exact")
    if isinstance(mode, dict):
        mode = {"shots": int(mode.get("shots", DEFAULT_SHOTS)), "seed": int(mode.get("seed", 0))}
    clustering = {
        "algorithm": algorithm,
        "k": k,
        "t_max": t_max,
        "init": init,
        "seed": _seed_list(cl.get("seed"), "clustering.seed"),
        "mode": _mode_dict(_mode(mode)),
    }

    fmap = None
    if algorithm != "classical":
        m = raw.get("map")
        if not isinstance(m, dict) or "map" not in m or "qubits" not in m:
            raise SchemaError(f"{algorithm} clustering needs a map block with map and qubits")
        fmap = {
            "map": m["map"],
            "qubits": int(m["qubits"]),
            "reps": int(m.get("reps", 1)),
            "entanglement": m.get("entanglement", "linear"),
            "pauli_strings": list(m.get("pauli_strings") or []),
            "theta_seed": _seed_list(m.get("theta_seed"), "map.theta_seed"),
        }
        try:
            FeatureMapConfig.from_dict({**fmap, "theta_seed": fmap["theta_seed"][0]})
        except ValueError as exc:
            raise SchemaError(f"map block: {exc}") from exc

    out = raw.get("output") or {}
    output = {
        "dir": out.get("dir"),
        "kernel_cache": out.get("kernel_cache"),
        "plot_features": list(out.get("plot_features", [0, 1])),
    }
    return ExperimentConfig(
        name=str(raw.get("name", name)),
        dataset=dataset,
        map=fmap,
        clustering=clustering,
        output=output,
        base_dir=base_dir or Path.cwd(),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no config at {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    return normalize(raw, base_dir=path.resolve().parent, name=path.stem)
