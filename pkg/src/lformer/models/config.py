"""Network hyperparameters"""

from typing import Annotated, Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator, model_validator

from lformer.core.errors import ConfigurationError

Variant = Literal["evolved", "recompute", "shared"]
VARIANTS: tuple[str, ...] = ("evolved", "recompute", "shared")


class LFormerConfig(BaseModel):
    """Shape and wiring of an LFormer network.

    `variant` selects how blocks after the first obtain their attention map: evolved from the
    previous map by a learned row convolution, recomputed from fresh query/key projections, or
    shared unchanged from the first cross-attention.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    bands: Annotated[int, Field(default=4, description="Multispectral band count c")]
    width: Annotated[int, Field(default=32, description="Feature width d after projection")]
    blocks: Annotated[int, Field(default=5, description="Number of attention blocks N")]
    kernel_size: Annotated[int, Field(default=5, description="Length k of the row-evolution kernel")]
    variant: Annotated[Variant, Field(default="evolved", description="Attention map strategy for blocks 2..N")]
    ratio: Annotated[int, Field(default=4, description="MS to PAN resolution ratio r")]
    heads: Annotated[int, Field(default=1, description="Attention heads splitting the width")]
    rcb_blocks: Annotated[int, Field(default=1, description="Residual blocks after the detail projection")]
    seed: Annotated[int, Field(default=0, description="Parameter initialization seed")]
    dtype: Annotated[Literal["float32", "float64"], Field(default="float32", description="Parameter dtype")]

    @field_validator("bands", "width", "blocks", "ratio", "heads")
    @classmethod
    def validate_positive(cls, v: int, info: ValidationInfo) -> int:
        if v < 1:
            raise ConfigurationError(f"{info.field_name} must be >= 1, got {v}")
        return v

    @field_validator("kernel_size")
    @classmethod
    def validate_kernel_size(cls, v: int) -> int:
        if v < 1 or v % 2 == 0:
            raise ConfigurationError(f"kernel_size must be a positive odd number, got {v}")
        return v

    @field_validator("rcb_blocks")
    @classmethod
    def validate_rcb_blocks(cls, v: int) -> int:
        if v < 0:
            raise ConfigurationError(f"rcb_blocks must be >= 0, got {v}")
        return v

    @model_validator(mode="after")
    def validate_heads(self) -> "LFormerConfig":
        if self.width % self.heads:
            raise ConfigurationError(f"width {self.width} is not divisible by heads {self.heads}")
        return self

    @classmethod
    def from_mapping(cls, values: dict[str, Any]) -> "LFormerConfig":
        """Validate a plain mapping, reporting schema problems as ConfigurationError"""
        try:
            return cls.model_validate(values)
        except ValidationError as e:
            raise ConfigurationError(str(e)) from e

    def with_variant(self, variant: str) -> "LFormerConfig":
        return self.from_mapping({**self.model_dump(), "variant": variant})
