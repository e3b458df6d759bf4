"""
Suite configuration: YAML file deep-merged over the shipped defaults, checked
against a JSON schema, then overridden by command-line flags.
"""

from __future__ import annotations

import copy
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import jsonschema
import yaml

from ..core.numerics import QuadratureSettings
from ..errors import ConfigInvalid

logger = logging.getLogger(__name__)

THREADS_ENV = "CVK_THREADS"

DEFAULTS: Dict[str, Any] = {
    "run": {
        "seed": 20240607,
        "points": 3,
        "n_max": 4,
        "k_list": [1, 2, 3, 4],
        "lambda_list": [6.0, 12.0, 24.0],
        "threads": 1,
    },
    "quadrature": {
        "rel_tol": 1e-10,
        "abs_tol": 1e-12,
        "max_subdivisions": 4000,
        "truncation_margin": 1e-2,
        "clearance": 0.05,
    },
    "tolerances": {
        "special": 1e-10,
        "qseries": 1e-11,
        "qaskey": 1e-10,
        "fusion_eigen": 1e-7,
        "fusion_limit_n0": 1e-6,
        "fusion_limit_n1": 1e-5,
        "fusion_limit_n2": 1e-4,
        "confluent_eigen": 1e-7,
        "xyz": 1e-11,
        "conjugation": 1e-11,
        "invariance": 1e-8,
        "polynomial_limit": 1e-10,
        "polynomial_fit": 1e-9,
        "jacobi_limit": 1e-6,
        "finite_sum": 1e-11,
        "coefficient": 1e-11,
        "discretized": 1e-9,
        "scalar_identity": 1e-12,
        "convergence": 1e-2,
        "monotone": 0.999,
    },
}

CONFIG_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "run": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "seed": {"type": "integer"},
                "points": {"type": "integer", "minimum": 1},
                "n_max": {"type": "integer", "minimum": 0},
                "k_list": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
                "lambda_list": {"type": "array", "minItems": 2, "items": {"type": "number", "exclusiveMinimum": 0}},
                "threads": {"type": "integer", "minimum": 1},
            },
        },
        "quadrature": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rel_tol": {"type": "number", "exclusiveMinimum": 0},
                "abs_tol": {"type": "number", "exclusiveMinimum": 0},
                "max_subdivisions": {"type": "integer", "minimum": 1},
                "truncation_margin": {"type": "number", "exclusiveMinimum": 0},
                "clearance": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": {"type": "number", "exclusiveMinimum": 0},
        },
    },
}


def deep_merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    """Nested dict merge; override wins, base is left untouched"""
    merged = copy.deepcopy(dict(base))
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


@dataclass(frozen=True)
class SuiteConfig:
    seed: int
    points: int
    n_max: int
    k_list: Tuple[int, ...]
    lambda_list: Tuple[float, ...]
    threads: int
    clearance: float
    quadrature: QuadratureSettings
    tolerances: Dict[str, float] = field(default_factory=dict)
    raw: Dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    def tolerance(self, family: str) -> float:
        try:
            return self.tolerances[family]
        except KeyError:
            raise ConfigInvalid(f"no tolerance configured for check family '{family}'") from None

    def digest(self) -> str:
        """SHA-256 of the canonical JSON of the effective configuration"""
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _threads(requested: int) -> int:
    value = os.environ.get(THREADS_ENV)
    if value is None:
        return requested
    try:
        cap = int(value)
    except ValueError:
        raise ConfigInvalid(f"{THREADS_ENV} must be an integer, got {value!r}") from None
    if cap < 1:
        raise ConfigInvalid(f"{THREADS_ENV} must be >= 1, got {cap}")
    return min(requested, cap)


def build_config(document: Optional[Mapping[str, Any]] = None,
                 overrides: Optional[Mapping[str, Any]] = None) -> SuiteConfig:
    """Validate and assemble a SuiteConfig from a parsed document plus run overrides"""
    if document is not None and not isinstance(document, Mapping):
        raise ConfigInvalid(f"configuration must be a mapping, got {type(document).__name__}")
    merged = deep_merge(DEFAULTS, document or {})
    if overrides:
        merged = deep_merge(merged, {"run": {k: v for k, v in overrides.items() if v is not None}})
    try:
        jsonschema.validate(merged, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigInvalid(f"{where}: {e.message}") from e

    run, quad = merged["run"], merged["quadrature"]
    qs = QuadratureSettings(rel_tol=quad["rel_tol"], abs_tol=quad["abs_tol"],
                            max_subdivisions=quad["max_subdivisions"],
                            truncation_margin=quad["truncation_margin"])
    config = SuiteConfig(
        seed=run["seed"],
        points=run["points"],
        n_max=run["n_max"],
        k_list=tuple(run["k_list"]),
        lambda_list=tuple(float(v) for v in run["lambda_list"]),
        threads=_threads(run["threads"]),
        clearance=float(quad["clearance"]),
        quadrature=qs,
        tolerances={k: float(v) for k, v in merged["tolerances"].items()},
        raw=merged,
    )
    logger.debug("configuration %s (threads=%d)", config.digest()[:12], config.threads)
    return config


def load_config(path: Optional[Path] = None, overrides: Optional[Mapping[str, Any]] = None) -> SuiteConfig:
    """Read a YAML file (or only the defaults when path is None)"""
    document = None
    if path is not None:
        path = Path(path)
        try:
            with open(path) as f:
                document = yaml.safe_load(f)
        except FileNotFoundError:
            raise ConfigInvalid(f"configuration file '{path}' not found") from None
        except yaml.YAMLError as e:
            raise ConfigInvalid(f"invalid YAML in '{path}': {e}") from e
        if document is None:
            document = {}
    return build_config(document, overrides)


def default_config_path() -> Path:
    return Path(__file__).resolve().parents[3] / "configs" / "default.yml"


def tolerance_families() -> List[str]:
    return sorted(DEFAULTS["tolerances"])
