"""Pan-sharpening network with linearly evolved attention.

The network fuses an upsampled multispectral image `ms_up (H, W, c)` with a panchromatic image
`pan (H, W, 1)`:

* both inputs are projected to width d and the PAN tokens attend over the MS tokens;
* a detail branch projects the Sobel responses of both inputs;
* each further block fuses the global and detail features, updates the values and obtains its
  attention map from the previous one (evolved), from fresh projections (recompute) or from
  the first block (shared);
* a zero-initialized head reconstructs c bands from the integrated features and adds `ms_up`.
  The integration sums the last global features, the last detail features and the shallow
  projections of both inputs, so spatial detail reaches the head even when the evolved maps
  have flattened towards uniform.
"""

import logging
from dataclasses import dataclass, field

from lformer.core import ops
from lformer.core.errors import ConfigurationError, DimensionError
from lformer.core.tensor import Tensor

from .attention import (
    AttentionMap,
    QKVProjection,
    apply_attention,
    cross_attention_first,
    evolve_heads,
    multi_head_attention,
)
from .blocks import (
    Conv2d,
    Module,
    Parameter,
    ProjectionBlock,
    ResidualConvBlock,
    flatten_tokens,
    init_params,
    sobel_apply,
    unflatten_tokens,
)
from .config import VARIANTS, LFormerConfig

logger = logging.getLogger(__name__)


@dataclass
class ForwardTrace:
    """Intermediate results of one forward pass.

    Attributes:
        maps: Attention maps per block, one entry per head.
        globals: Global features F_1g..F_Ng as `(H, W, d)` images.
        details: Detail features F_0d..F_{N-1}d as `(H, W, d)` images.
        output: The fused image.
    """

    maps: list[list[AttentionMap]] = field(default_factory=list)
    globals: list[Tensor] = field(default_factory=list)
    details: list[Tensor] = field(default_factory=list)
    output: Tensor | None = None

    def attention(self, block: int, head: int = 0) -> AttentionMap:
        return self.maps[block][head]

    def head_maps(self, head: int = 0) -> list[AttentionMap]:
        return [per_block[head] for per_block in self.maps]


class FeatureIntegrationBlock(ProjectionBlock):
    """Fuses global and detail features of width d: Cat -> 3x3 conv -> ReLU -> 3x3 conv"""

    def __init__(self, width: int, dtype: str = "float32") -> None:
        super().__init__(2 * width, width, dtype)

    def __call__(self, global_features: Tensor, detail_features: Tensor) -> Tensor:  # type: ignore[override]
        return fib_forward(self, global_features, detail_features)


def fib_forward(block: ProjectionBlock, global_features: Tensor, detail_features: Tensor) -> Tensor:
    if global_features.shape != detail_features.shape:
        raise DimensionError("global and detail features must match", global_features.shape, detail_features.shape)
    fused = ops.concat([global_features, detail_features], axis=2)
    return block.conv2(ops.relu(block.conv1(fused)))


class EvolutionKernel(Module):
    """One learned `(heads, k)` row kernel per block"""

    def __init__(self, heads: int, kernel_size: int, dtype: str = "float32") -> None:
        super().__init__()
        self.kernel = self.register_parameter("kernel", Parameter((heads, kernel_size), dtype, fan_in=kernel_size))


class LFormerBlock(Module):
    """Parameters of one block after the first: FIB, value update and the map strategy"""

    def __init__(self, config: LFormerConfig) -> None:
        super().__init__()
        d = config.width
        self.fib = self.add_module("fib", FeatureIntegrationBlock(d, config.dtype))
        self.value = self.add_module("value", Conv2d(2 * d, d, 1, dtype=config.dtype))
        self.evolve: EvolutionKernel | None = None
        self.qkv: QKVProjection | None = None
        if config.variant == "evolved":
            kernel = EvolutionKernel(config.heads, config.kernel_size, config.dtype)
            self.evolve = self.add_module("evolve", kernel)  # type: ignore[assignment]
        elif config.variant == "recompute":
            self.qkv = self.add_module("qkv", QKVProjection(d, config.dtype))  # type: ignore[assignment]

    @property
    def kernel(self) -> Parameter | None:
        return None if self.evolve is None else self.evolve.kernel


class LFormerModel(Module):
    """The full network. Build with `build(config)` to get initialized parameters."""

    def __init__(self, config: LFormerConfig) -> None:
        super().__init__()
        self.config = config
        c, d, dtype = config.bands, config.width, config.dtype
        self.proj_pan = self.add_module("proj_pan", ProjectionBlock(1, d, dtype))
        self.proj_ms = self.add_module("proj_ms", ProjectionBlock(c, d, dtype))
        self.proj_detail = self.add_module("proj_detail", ProjectionBlock(c + 1, d, dtype))
        self.detail_rcb = self.add_module("detail_rcb", Module())
        for j in range(config.rcb_blocks):
            self.detail_rcb.add_module(str(j), ResidualConvBlock(d, dtype))
        self.blocks = self.add_module("blocks", Module())
        for i in range(config.blocks - 1):
            self.blocks.add_module(str(i + 1), LFormerBlock(config))
        self.head = self.add_module("head", Conv2d(d, c, 3, zero_init=True, dtype=dtype))

    def block_list(self) -> list[LFormerBlock]:
        return list(self.blocks._modules.values())  # type: ignore[arg-type]

    def forward(self, ms_up: Tensor, pan: Tensor, variant: str | None = None) -> tuple[Tensor, ForwardTrace]:
        """Fuse one image pair.

        Args:
            ms_up: Upsampled multispectral image `(H, W, c)`.
            pan: Panchromatic image `(H, W, 1)`.
            variant: Map strategy override. "shared" works with any trained model; "evolved"
                and "recompute" need the matching block parameters.

        Returns:
            The fused `(H, W, c)` image and the trace of intermediate features.

        Raises:
            DimensionError: If the inputs are misaligned or have the wrong band counts.
            ConfigurationError: If the override needs parameters the model does not have.
        """
        cfg = self.config
        variant = variant or cfg.variant
        if variant not in VARIANTS:
            raise ConfigurationError(f"unknown variant '{variant}'")
        if variant != cfg.variant and variant != "shared":
            raise ConfigurationError(f"a {cfg.variant} model cannot run as {variant}")
        if ms_up.ndim != 3 or pan.ndim != 3 or ms_up.shape[:2] != pan.shape[:2]:
            raise DimensionError("ms_up and pan must be spatially aligned images", ms_up.shape, pan.shape)
        if ms_up.shape[2] != cfg.bands or pan.shape[2] != 1:
            raise DimensionError(f"expected {cfg.bands} MS bands and 1 PAN band", ms_up.shape, pan.shape)
        height, width = pan.shape[:2]

        shallow_pan = self.proj_pan(pan)
        shallow_ms = self.proj_ms(ms_up)
        f_pan = flatten_tokens(shallow_pan)
        f_ms = flatten_tokens(shallow_ms)
        global_tokens, maps = cross_attention_first(f_pan, f_ms, cfg.heads)
        first_maps = maps
        global_features = unflatten_tokens(global_tokens, height, width)

        detail = self.proj_detail(ops.concat([sobel_apply(ms_up), sobel_apply(pan)], axis=2))
        for rcb in self.detail_rcb._modules.values():
            detail = rcb(detail)  # type: ignore[operator]

        trace = ForwardTrace(maps=[maps], globals=[global_features], details=[detail])
        for block in self.block_list():
            detail = block.fib(global_features, detail)
            values = flatten_tokens(block.value(ops.concat([global_features, detail], axis=2)))
            if variant == "evolved":
                maps = evolve_heads(maps, block.kernel)  # type: ignore[arg-type]
                global_tokens = apply_attention(maps, values)
            elif variant == "recompute":
                global_tokens, maps = multi_head_attention(*block.qkv(values), heads=cfg.heads)  # type: ignore[misc]
            else:
                maps = first_maps
                global_tokens = apply_attention(maps, values)
            global_features = unflatten_tokens(global_tokens, height, width)
            trace.maps.append(maps)
            trace.globals.append(global_features)
            trace.details.append(detail)

        # long skip: the head sees the detail stream and both shallow projections
        output = self.head(global_features + detail + shallow_pan + shallow_ms) + ms_up
        trace.output = output
        return output, trace

    def __call__(self, ms_up: Tensor, pan: Tensor, variant: str | None = None) -> Tensor:
        return self.forward(ms_up, pan, variant)[0]


def build(config: LFormerConfig) -> LFormerModel:
    """Allocate the network for `config` and initialize it from `config.seed`"""
    model = LFormerModel(config)
    init_params(model, config.seed)
    logger.info(f"Built {config.variant} model with {model.num_parameters()} parameters")
    return model
