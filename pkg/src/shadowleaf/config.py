"""Run configuration: JSON in, validated :class:`RunConfig` out."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .dynamics import FourierTerm, Perturbation, PerturbedLift
from .frame import HyperbolicMatrix, NotHyperbolic

DEFAULT_SAMPLES = {
    "nesting": 1000,
    "equivariance": 1000,
    "deck": 1000,
    "dichotomy": 200,
    "c_independence": 500,
    "continuity": 500,
    "contraction": 500,
    "descent": 500,
    "shadowing_bound": 1000,
}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


@dataclass(frozen=True)
class LeafSpec:
    kind: str = "stable"
    coord: float = 0.0
    depth: int = 10


@dataclass(frozen=True)
class RunConfig:
    matrix: HyperbolicMatrix = field(default_factory=lambda: HyperbolicMatrix(2, 1, 1, 1))
    perturbation: Perturbation = field(default_factory=lambda: Perturbation((
        FourierTerm((0, 1), sx=0.05),
        FourierTerm((1, 0), sy=0.03),
    )))
    margin: float = 0.1
    shadow_constant: float | None = None
    theta_tol: float = 1e-8
    inverse_tol: float = 1e-12
    inverse_max_iterations: int = 1000
    max_depth: int = 200
    grid_resolution: int = 512
    oracle_resolution: int = 4096
    depth: int = 40
    nesting_depth: int = 30
    continuity_depth: int = 30
    margins: tuple[float, ...] = (0.01, 0.1, 1.0)
    window: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0)
    window_resolution: int = 256
    flood_depth: int = 3
    leaf: LeafSpec = field(default_factory=LeafSpec)
    samples: dict = field(default_factory=lambda: dict(DEFAULT_SAMPLES))
    dps: int = 32
    seed: int = 42
    branched_cover: bool = True

    def build_lift(self) -> PerturbedLift:
        return PerturbedLift(self.matrix, self.perturbation, inverse_tolerance=self.inverse_tol,
                             inverse_max_iterations=self.inverse_max_iterations, max_depth=self.max_depth)

    def with_seed(self, seed: int) -> RunConfig:
        return replace(self, seed=seed)


def _number(value: Any, path: str, *, positive: bool = False, nonneg: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    if positive and not value > 0:
        raise ConfigError(path, "must be positive")
    if nonneg and value < 0:
        raise ConfigError(path, "must be non-negative")
    return value


def _integer(value: Any, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be at least {minimum}")
    return value


def _matrix(value: Any) -> HyperbolicMatrix:
    if not (isinstance(value, list) and len(value) == 2 and all(isinstance(r, list) and len(r) == 2 for r in value)):
        raise ConfigError("matrix", "expected a 2x2 list of integers")
    for i, row in enumerate(value):
        for j, entry in enumerate(row):
            _integer(entry, f"matrix[{i}][{j}]")
    try:
        return HyperbolicMatrix.from_rows(value)
    except NotHyperbolic as exc:
        raise ConfigError("matrix", str(exc)) from None


def _perturbation(value: Any) -> Perturbation:
    if not isinstance(value, list):
        raise ConfigError("perturbation", "expected a list of Fourier terms")
    terms = []
    for i, item in enumerate(value):
        path = f"perturbation[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(path, "expected an object")
        unknown = set(item) - {"k", "cx", "sx", "cy", "sy"}
        if unknown:
            raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown field")
        k = item.get("k")
        if not (isinstance(k, list) and len(k) == 2):
            raise ConfigError(f"{path}.k", "expected two integers")
        for j, kj in enumerate(k):
            _integer(kj, f"{path}.k[{j}]")
        amps = {name: _number(item.get(name, 0.0), f"{path}.{name}") for name in ("cx", "sx", "cy", "sy")}
        terms.append(FourierTerm((k[0], k[1]), **amps))
    return Perturbation(tuple(terms))


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("$", "expected a JSON object")
    known = set(RunConfig.__dataclass_fields__)
    for key in data:
        if key not in known:
            raise ConfigError(key, "unknown field")

    base = RunConfig()
    kw: dict[str, Any] = {}
    if "matrix" in data:
        kw["matrix"] = _matrix(data["matrix"])
    if "perturbation" in data:
        kw["perturbation"] = _perturbation(data["perturbation"])
    for name in ("margin", "theta_tol", "inverse_tol"):
        if name in data:
            kw[name] = _number(data[name], name, positive=True)
    if data.get("shadow_constant") is not None:
        kw["shadow_constant"] = _number(data["shadow_constant"], "shadow_constant", nonneg=True)
    for name, minimum in (("inverse_max_iterations", 1), ("max_depth", 1), ("grid_resolution", 2),
                          ("oracle_resolution", 2), ("depth", 0), ("nesting_depth", 0),
                          ("continuity_depth", 0), ("window_resolution", 2), ("flood_depth", 0),
                          ("dps", 16), ("seed", 0)):
        if name in data:
            kw[name] = _integer(data[name], name, minimum)
    if "seed" in kw and kw["seed"] >= 2**64:
        raise ConfigError("seed", "must fit in 64 bits")
    if "margins" in data:
        if not isinstance(data["margins"], list) or len(data["margins"]) < 2:
            raise ConfigError("margins", "expected a list of at least two margins")
        kw["margins"] = tuple(_number(m, f"margins[{i}]", positive=True) for i, m in enumerate(data["margins"]))
    if "window" in data:
        w = data["window"]
        if not (isinstance(w, list) and len(w) == 4):
            raise ConfigError("window", "expected [x0, x1, y0, y1]")
        w = tuple(_number(v, f"window[{i}]") for i, v in enumerate(w))
        if not (w[0] < w[1] and w[2] < w[3]):
            raise ConfigError("window", "need x0 < x1 and y0 < y1")
        kw["window"] = w
    if "leaf" in data:
        leaf = data["leaf"]
        if not isinstance(leaf, dict):
            raise ConfigError("leaf", "expected an object")
        kind = leaf.get("kind", "stable")
        if kind not in ("stable", "unstable"):
            raise ConfigError("leaf.kind", "must be 'stable' or 'unstable'")
        kw["leaf"] = LeafSpec(kind, _number(leaf.get("coord", 0.0), "leaf.coord"),
                              _integer(leaf.get("depth", 10), "leaf.depth", 0))
    if "samples" in data:
        samples = data["samples"]
        if not isinstance(samples, dict):
            raise ConfigError("samples", "expected an object")
        merged = dict(DEFAULT_SAMPLES)
        for key, value in samples.items():
            if key not in DEFAULT_SAMPLES:
                raise ConfigError(f"samples.{key}", "unknown field")
            merged[key] = _integer(value, f"samples.{key}", 1)
        kw["samples"] = merged
    if "branched_cover" in data:
        if not isinstance(data["branched_cover"], bool):
            raise ConfigError("branched_cover", "expected true or false")
        kw["branched_cover"] = data["branched_cover"]

    config = replace(base, **kw)
    # module-level preconditions checked up front
    try:
        config.build_lift()
    except ValueError as exc:
        raise ConfigError("perturbation", str(exc)) from None
    for name in ("depth", "nesting_depth", "continuity_depth", "flood_depth"):
        if getattr(config, name) > config.max_depth:
            raise ConfigError(name, f"exceeds max_depth {config.max_depth}")
    if config.leaf.depth > config.max_depth:
        raise ConfigError("leaf.depth", f"exceeds max_depth {config.max_depth}")
    return config


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("$", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from None
    return parse_config(data)


def config_to_dict(config: RunConfig) -> dict:
    return {
        "matrix": config.matrix.rows(),
        "perturbation": config.perturbation.to_dicts(),
        "margin": config.margin,
        "shadow_constant": config.shadow_constant,
        "theta_tol": config.theta_tol,
        "inverse_tol": config.inverse_tol,
        "inverse_max_iterations": config.inverse_max_iterations,
        "max_depth": config.max_depth,
        "grid_resolution": config.grid_resolution,
        "oracle_resolution": config.oracle_resolution,
        "depth": config.depth,
        "nesting_depth": config.nesting_depth,
        "continuity_depth": config.continuity_depth,
        "margins": list(config.margins),
        "window": list(config.window),
        "window_resolution": config.window_resolution,
        "flood_depth": config.flood_depth,
        "leaf": {"kind": config.leaf.kind, "coord": config.leaf.coord, "depth": config.leaf.depth},
        "samples": dict(config.samples),
        "dps": config.dps,
        "seed": config.seed,
        "branched_cover": config.branched_cover,
    }
