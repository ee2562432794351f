"""Run configuration for training, evaluation and benchmarking.

A run config is a flat `key=value` file (or a YAML mapping with the same keys). Every key has
a default; unknown keys are rejected.
"""

from pathlib import Path
from typing import Annotated, Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from lformer.core.errors import ConfigurationError, DataError
from lformer.models.config import LFormerConfig, Variant

from .keyvalue import format_keyvalue, parse_keyvalue, split_list

LIST_FIELDS = ("betas", "decay_steps")


class RunConfig(BaseModel):
    """Network, optimizer and path settings of one run"""

    model_config = ConfigDict(extra="forbid")

    bands: Annotated[int, Field(default=4, description="Multispectral band count")]
    width: Annotated[int, Field(default=32, description="Feature width d")]
    blocks: Annotated[int, Field(default=5, description="Attention blocks N")]
    kernel_size: Annotated[int, Field(default=5, description="Evolution kernel length k")]
    variant: Annotated[Variant, Field(default="evolved", description="Attention map strategy")]
    ratio: Annotated[int, Field(default=4, description="Resolution ratio r")]
    heads: Annotated[int, Field(default=1, description="Attention heads")]
    rcb_blocks: Annotated[int, Field(default=1, description="Residual blocks in the detail branch")]
    seed: Annotated[int, Field(default=0, description="Initialization and batch-order seed")]
    dtype: Annotated[Literal["float32", "float64"], Field(default="float32", description="Compute dtype")]

    lr: Annotated[float, Field(default=3e-4, description="Initial learning rate")]
    betas: Annotated[tuple[float, float], Field(default=(0.9, 0.999), description="Adam moment decay rates")]
    eps: Annotated[float, Field(default=1e-8, description="Adam denominator offset")]
    weight_decay: Annotated[float, Field(default=0.1, description="Decoupled weight decay")]
    batch: Annotated[int, Field(default=32, description="Samples per step")]
    steps: Annotated[int, Field(default=1000, description="Optimizer updates")]
    decay_steps: Annotated[
        list[int] | None, Field(default=None, description="Learning-rate milestones; 3/8 and 5/8 of steps if unset")
    ]
    decay_factor: Annotated[float, Field(default=0.1, description="Learning-rate factor per milestone")]
    alpha: Annotated[float, Field(default=0.1, description="Weight of the 1 - SSIM term")]
    checkpoint_every: Annotated[int, Field(default=100, description="Steps between checkpoints")]
    log_every: Annotated[int, Field(default=10, description="Steps between progress log lines")]
    workers: Annotated[int, Field(default=1, description="Threads computing per-sample gradients")]
    data_dir: Annotated[str | None, Field(default=None, description="Dataset root")]
    out_dir: Annotated[str | None, Field(default=None, description="Run output directory")]

    @field_validator("batch", "checkpoint_every", "log_every", "workers")
    @classmethod
    def validate_positive(cls, v: int) -> int:
        if v < 1:
            raise ConfigurationError(f"value must be >= 1, got {v}")
        return v

    @field_validator("steps")
    @classmethod
    def validate_steps(cls, v: int) -> int:
        if v < 0:
            raise ConfigurationError(f"steps must be >= 0, got {v}")
        return v

    @classmethod
    def from_mapping(cls, values: dict[str, Any]) -> "RunConfig":
        try:
            return cls.model_validate(values)
        except ValidationError as e:
            raise ConfigurationError(str(e)) from e

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        """Parse the flat `key=value` format; list values are comma separated"""
        raw: dict[str, Any] = parse_keyvalue(text)
        for key in LIST_FIELDS:
            if key in raw:
                raw[key] = split_list(raw[key]) or None
        for key in ("data_dir", "out_dir"):
            if raw.get(key) == "":
                raw[key] = None
        return cls.from_mapping(raw)

    @classmethod
    def from_yaml(cls, text: str) -> "RunConfig":
        data = yaml.safe_load(text) or {}
        if not isinstance(data, dict):
            raise ConfigurationError("YAML run config must be a mapping")
        return cls.from_mapping(data)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        """Load a `.yaml`/`.yml` mapping or a flat `key=value` file"""
        path = Path(path)
        if not path.is_file():
            raise DataError(f"config file not found: {path}")
        text = path.read_text(encoding="utf-8")
        if path.suffix in (".yaml", ".yml"):
            return cls.from_yaml(text)
        return cls.from_text(text)

    def to_text(self) -> str:
        return format_keyvalue(self.model_dump())

    def network_config(self, **overrides: Any) -> LFormerConfig:
        """The embedded network configuration"""
        fields = {name: getattr(self, name) for name in LFormerConfig.model_fields}
        return LFormerConfig.from_mapping({**fields, **overrides})

    def milestones(self) -> list[int]:
        if self.decay_steps is not None:
            return sorted(self.decay_steps)
        return [int(0.375 * self.steps), int(0.625 * self.steps)]
