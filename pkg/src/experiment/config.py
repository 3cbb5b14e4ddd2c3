"""
Experiment Configuration Module

JSON experiment files validated by pydantic before any compute. Unknown keys are
rejected everywhere; the dataset source and the algorithm are discriminated
unions keyed by ``source`` and ``name``.

Example:

    {
      "name": "synthetic-fedns",
      "dataset": {"source": "synthetic_logistic", "n": 2000, "d": 20, "separability": 2.0},
      "objective": {"family": "logistic", "lam": 0.001},
      "partition": {"strategy": "iid", "m": 4},
      "algorithm": {"name": "fedns", "sketch_factor": 1.0, "rounds": 8},
      "seeds": [1, 2, 3]
    }
"""

import hashlib
import json
import logging
import math
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.constants import DEFAULT_LAMBDA, DEFAULT_SKETCH_KIND, SKETCH_KINDS
from src.errors import ConfigError
from src.federation import FedNDESConfig

logger = logging.getLogger(__name__)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# Datasets


class SyntheticLogisticSource(_Strict):
    source: Literal["synthetic_logistic"]
    n: int = Field(ge=1)
    d: int = Field(ge=1)
    separability: float = 2.0
    decay: float = Field(default=2.0, ge=0)
    seed: int = Field(default=0, ge=0)


class SyntheticRidgeSource(_Strict):
    source: Literal["synthetic_ridge"]
    n: int = Field(ge=1)
    d: int = Field(ge=1)
    noise: float = Field(default=0.1, ge=0)
    decay: float = Field(default=2.0, ge=0)
    seed: int = Field(default=0, ge=0)


class LibsvmSource(_Strict):
    source: Literal["libsvm"]
    path: str
    n_features: int | None = Field(default=None, ge=1)
    normalize_labels: bool = True


DatasetSource = Annotated[
    Union[SyntheticLogisticSource, SyntheticRidgeSource, LibsvmSource],
    Field(discriminator="source"),
]


class FeatureMapSpec(_Strict):
    kind: Literal["identity", "random_fourier"] = "identity"
    output_dim: int | None = Field(default=None, ge=1)
    bandwidth: float = Field(default=1.0, gt=0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def check_output_dim(self) -> "FeatureMapSpec":
        if self.kind == "random_fourier" and self.output_dim is None:
            raise ValueError("random_fourier feature map needs output_dim")
        return self


class ObjectiveSpec(_Strict):
    family: Literal["logistic", "squared"] = "logistic"
    lam: float = Field(default=DEFAULT_LAMBDA, gt=0)


class PartitionSpec(_Strict):
    strategy: Literal["iid", "label_skew"] = "iid"
    m: int = Field(ge=1)
    dirichlet_alpha: float | None = Field(default=None, gt=0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def check_alpha(self) -> "PartitionSpec":
        if self.strategy == "label_skew" and self.dirichlet_alpha is None:
            raise ValueError("label_skew partition needs dirichlet_alpha")
        return self


# Algorithms


class _SketchedSpec(_Strict):
    sketch_kind: str = DEFAULT_SKETCH_KIND

    @model_validator(mode="after")
    def check_kind(self):
        if self.sketch_kind not in SKETCH_KINDS:
            raise ValueError(f"sketch_kind must be one of {SKETCH_KINDS}, got {self.sketch_kind!r}")
        return self


class FedNewtonSpec(_Strict):
    name: Literal["fednewton"]
    mu: float = Field(default=1.0, gt=0)
    rounds: int = Field(default=10, ge=0)


class FedNSSpec(_SketchedSpec):
    name: Literal["fedns"]
    mu: float = Field(default=1.0, gt=0)
    rounds: int = Field(default=10, ge=0)
    sketch_size: int | None = Field(default=None, ge=1)
    sketch_factor: float | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def check_one_size(self) -> "FedNSSpec":
        if self.sketch_size is not None and self.sketch_factor is not None:
            raise ValueError("Give either sketch_size or sketch_factor, not both")
        return self

    def resolve_sketch_size(self, M: int) -> int:
        """Explicit sketch_size, else ceil(sketch_factor * M) (factor 1 by default)."""
        if self.sketch_size is not None:
            return self.sketch_size
        return max(1, math.ceil((self.sketch_factor or 1.0) * M))


class FedNDESSpec(_SketchedSpec):
    name: Literal["fedndes"]
    rounds: int = Field(default=20, ge=0)
    fedndes: FedNDESConfig = Field(default_factory=FedNDESConfig)


class FedAvgSpec(_Strict):
    name: Literal["fedavg"]
    rounds: int = Field(default=10, ge=0)
    local_steps: int = Field(default=1, ge=1)
    step_size: float = Field(default=1.0, gt=0)


AlgorithmSpec = Annotated[
    Union[FedNewtonSpec, FedNSSpec, FedNDESSpec, FedAvgSpec],
    Field(discriminator="name"),
]


class ExperimentConfig(_Strict):
    """
    Attributes:
        name: Experiment name (output sub-directory)
        dataset: Dataset source
        feature_map: Feature map applied after the train/test split
        objective: Loss family and lam
        partition: Worker partition
        algorithm: Algorithm and its parameters
        seeds: One run per seed (sketch randomness)
        test_fraction: Held-out share for the accuracy column (0 disables it)
        sweep_k_values: Sketch sizes for ``sweep-k`` (fedns only)
        output: Output directory; the CLI falls back to --out or the default
    """

    name: str = Field(min_length=1)
    dataset: DatasetSource
    feature_map: FeatureMapSpec = Field(default_factory=FeatureMapSpec)
    objective: ObjectiveSpec = Field(default_factory=ObjectiveSpec)
    partition: PartitionSpec
    algorithm: AlgorithmSpec
    seeds: list[Annotated[int, Field(ge=0)]] = Field(default_factory=lambda: [0], min_length=1)
    test_fraction: float = Field(default=0.0, ge=0, lt=1)
    sweep_k_values: list[Annotated[int, Field(ge=1)]] | None = None
    output: str | None = None

    @model_validator(mode="after")
    def check_consistency(self) -> "ExperimentConfig":
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError(f"Duplicate seeds in {self.seeds}")
        if self.sweep_k_values is not None and not self.sweep_k_values:
            raise ValueError("sweep_k_values must not be empty")
        return self

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON dump (sorted keys)."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def parse_config(data: dict) -> ExperimentConfig:
    """
    Validates a decoded config tree.

    Raises:
        ConfigError: With pydantic's description of every violation
    """
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment config:\n{e}") from e


def load_config(path: str) -> ExperimentConfig:
    """
    Reads and validates a JSON experiment file.

    Raises:
        ConfigError: Unreadable or non-UTF-8 file, malformed JSON or schema violation
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise ConfigError(f"Config {path} is not valid UTF-8: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config {path} is not valid JSON: {e}") from e

    config = parse_config(data)
    logger.debug(f"Loaded config {config.name} from {path} (hash {config.config_hash()[:12]})")
    return config
