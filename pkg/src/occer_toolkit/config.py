"""Configuration models for the OCCER toolkit."""

import math
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, NamedTuple, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ConfigError

RegressorKind = Literal["ridge", "lasso", "elastic_net", "random_forest"]
OutputFormat = Literal["json", "csv"]

_SEED_MIN = -(2**63)
_SEED_MAX = 2**64 - 1


class MethodInfo(NamedTuple):
    """Registry entry mapping a CLI method name to an implementation."""
    family: Literal["occer", "lof", "iforest"]
    kind: Optional[str] = None


METHODS: Dict[str, MethodInfo] = {
    "occer-ridge": MethodInfo("occer", "ridge"),
    "occer-lasso": MethodInfo("occer", "lasso"),
    "occer-elastic": MethodInfo("occer", "elastic_net"),
    "occer-rf": MethodInfo("occer", "random_forest"),
    "lof": MethodInfo("lof"),
    "iforest": MethodInfo("iforest"),
}


def _check_seed(value: int) -> int:
    if value < _SEED_MIN or value > _SEED_MAX:
        raise ValueError("seed must fit in 64 bits")
    return value


class RegressorSpec(BaseModel):
    """Hyperparameters for a single-output regressor.

    Fields that do not apply to ``kind`` are kept so a spec round-trips
    through serialization unchanged.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: RegressorKind = Field(default="ridge", description="Regressor family")
    alpha: float = Field(default=1.0, ge=0.0, description="Regularization strength")
    l1_ratio: float = Field(default=0.5, ge=0.0, le=1.0, description="Elastic net L1 mix")
    n_trees: int = Field(default=100, ge=1, description="Trees in a random forest")
    max_features: Optional[Union[int, float]] = Field(
        default=None, description="Split candidates per node: count, fraction, or None for all"
    )
    min_samples_leaf: int = Field(default=1, ge=1, description="Minimum rows per leaf")
    max_depth: Optional[int] = Field(default=None, ge=1, description="Depth limit, None for unlimited")
    cd_tolerance: float = Field(default=1e-4, gt=0.0, description="Coordinate descent stopping tolerance")
    cd_max_iter: int = Field(default=1000, ge=1, description="Coordinate descent sweep limit")
    seed: int = Field(default=0, description="Forest seed")
    n_jobs: int = Field(default=1, ge=1, description="Threads used to grow forest trees")

    @field_validator("max_features")
    @classmethod
    def valid_max_features(cls, v):
        if v is None:
            return v
        if isinstance(v, bool):
            raise ValueError("max_features must be a number")
        if isinstance(v, int):
            if v < 1:
                raise ValueError("max_features count must be positive")
        elif not 0.0 < v <= 1.0:
            raise ValueError("max_features fraction must be in (0, 1]")
        return v

    @field_validator("seed")
    @classmethod
    def valid_seed(cls, v):
        return _check_seed(v)

    def resolve_max_features(self, n_inputs: int) -> int:
        """Number of candidate features per split for ``n_inputs`` columns."""
        if self.max_features is None:
            return n_inputs
        if isinstance(self.max_features, int):
            return min(self.max_features, n_inputs)
        return max(1, min(n_inputs, math.floor(self.max_features * n_inputs)))


def _default_workers() -> int:
    return int(os.getenv("OCCER_WORKERS", "1"))


class RunConfig(BaseModel):
    """Settings for a single fit or score run."""
    model_config = ConfigDict(extra="forbid")

    data: List[Path] = Field(default_factory=list, description="Dataset path(s)")
    label_col: Optional[str] = Field(default=None, description="Name of the class label column")
    target_label: Optional[str] = Field(default=None, description="Label value of the target class")
    has_header: bool = Field(default=True, description="Whether the CSV starts with a header row")
    method: str = Field(default="occer-ridge", description="Detection method")
    keep_fraction: float = Field(default=1.0, gt=0.0, le=1.0, description="Share of regressors kept")
    spec: Dict[str, Any] = Field(default_factory=dict, description="Regressor overrides")
    seed: int = Field(default=0, description="Seed for forests and fold plans")
    out: Optional[Path] = Field(default=None, description="Output path")
    format: OutputFormat = Field(default="csv", description="Output format")
    threshold_quantile: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    workers: int = Field(default_factory=_default_workers, ge=1, description="Worker threads")
    lof_k: int = Field(default=20, ge=1, description="LOF neighbour count")
    iforest_trees: int = Field(default=100, ge=1, description="Isolation forest size")
    iforest_subsample: int = Field(default=256, ge=2, description="Isolation forest subsample size")

    @field_validator("method")
    @classmethod
    def known_method(cls, v):
        if v not in METHODS:
            raise ValueError(f"Unknown method '{v}'. Choose from: {', '.join(METHODS)}")
        return v

    @field_validator("seed")
    @classmethod
    def valid_seed(cls, v):
        return _check_seed(v)

    @model_validator(mode="after")
    def label_requires_target(self):
        if self.label_col is not None and self.target_label is None:
            raise ValueError("target_label is required when label_col is given")
        return self

    def regressor_spec(self, method: Optional[str] = None) -> RegressorSpec:
        """Build the regressor spec for an OCCER method, applying overrides."""
        info = METHODS[method or self.method]
        if info.family != "occer":
            raise ConfigError(f"Method '{method or self.method}' does not use regressors")
        overrides = {k: v for k, v in self.spec.items() if k not in {"kind", "seed"}}
        return RegressorSpec(kind=info.kind, seed=self.seed, **overrides)

    def snapshot(self) -> Dict[str, Any]:
        """JSON-friendly copy embedded in every output."""
        return self.model_dump(mode="json")


class BenchConfig(RunConfig):
    """Settings for a benchmark sweep over datasets, methods and ensemble sizes."""
    methods: List[str] = Field(default_factory=lambda: ["occer-ridge"])
    keep_fractions: List[float] = Field(default_factory=lambda: [1.0])

    @field_validator("methods")
    @classmethod
    def known_methods(cls, v):
        if not v:
            raise ValueError("At least one method must be configured")
        unknown = [m for m in v if m not in METHODS]
        if unknown:
            raise ValueError(f"Unknown methods: {', '.join(unknown)}")
        return v

    @field_validator("keep_fractions")
    @classmethod
    def valid_fractions(cls, v):
        if not v:
            raise ValueError("At least one keep fraction must be configured")
        for fraction in v:
            if not 0.0 < fraction <= 1.0:
                raise ValueError(f"keep fraction {fraction} outside (0, 1]")
        return v


# Keys whose file values are comma-separated lists.
_LIST_KEYS = {"data", "methods", "keep_fractions"}


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Parse a flat ``key = value`` config file.

    Blank lines and ``#`` comments are skipped. ``spec.<field>`` keys are
    collected into the ``spec`` override mapping.

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigError: If a line is not a key-value pair or a key repeats
    """
    config_path = Path(path)
    if not config_path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")

    values: Dict[str, Any] = {}
    spec: Dict[str, Any] = {}
    for line_no, raw in enumerate(config_path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{config_path}:{line_no}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{config_path}:{line_no}: empty key")

        target = values
        if key.startswith("spec."):
            target, key = spec, key[len("spec."):]
        if key in target:
            raise ConfigError(f"{config_path}:{line_no}: duplicate key '{key}'")

        if key in _LIST_KEYS:
            target[key] = [item.strip() for item in value.split(",") if item.strip()]
        elif value.lower() in {"none", "null", ""}:
            target[key] = None
        else:
            target[key] = value

    if spec:
        values["spec"] = spec
    return values


def merge_config(
    file_values: Dict[str, Any],
    flag_values: Dict[str, Any],
) -> Dict[str, Any]:
    """Merge file values with command-line flags; flags win, unset flags are ignored."""
    merged = dict(file_values)
    for key, value in flag_values.items():
        if value is None or value == () or value == []:
            continue
        if key == "spec":
            merged["spec"] = {**merged.get("spec", {}), **value}
        else:
            merged[key] = value
    return merged


def parse_overrides(pairs: Tuple[str, ...]) -> Dict[str, Any]:
    """Turn repeated ``--set field=value`` flags into a spec override mapping."""
    overrides: Dict[str, Any] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"Spec override must look like field=value, got '{pair}'")
        key, value = (part.strip() for part in pair.split("=", 1))
        overrides[key] = None if value.lower() in {"none", "null"} else value
    return overrides
