"""Network layers, attention and the LFormer model."""

from .attention import (
    AttentionMap,
    QKVProjection,
    attention_cosine_similarity,
    cascaded_chain_reference,
    cross_attention_first,
    evolve_attention,
    scaled_dot_attention,
)
from .blocks import (
    Module,
    ProjectionBlock,
    ResidualConvBlock,
    flatten_tokens,
    init_params,
    sobel_apply,
    unflatten_tokens,
)
from .config import VARIANTS, LFormerConfig
from .lformer import ForwardTrace, LFormerModel, build, fib_forward

__all__ = [
    "VARIANTS",
    "AttentionMap",
    "ForwardTrace",
    "LFormerConfig",
    "LFormerModel",
    "Module",
    "ProjectionBlock",
    "QKVProjection",
    "ResidualConvBlock",
    "attention_cosine_similarity",
    "build",
    "cascaded_chain_reference",
    "cross_attention_first",
    "evolve_attention",
    "fib_forward",
    "flatten_tokens",
    "init_params",
    "scaled_dot_attention",
    "sobel_apply",
    "unflatten_tokens",
]
