"""Scaled dot-product attention and the evolution of attention maps across blocks.

Tokens are `(T, C)` tensors. Maps are `(T, T)` row-stochastic matrices wrapped in
`AttentionMap`; multi-head helpers split the channel axis into equal groups and return one
map per head.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from lformer.core import ops
from lformer.core.errors import ConfigurationError, DimensionError, NumericError
from lformer.core.tensor import Tensor

from .blocks import Conv2d, Module

logger = logging.getLogger(__name__)


@dataclass
class AttentionMap:
    """Row-stochastic `(T, T)` attention weights.

    Attributes:
        matrix: The weights; row i is the distribution of query i over all keys.
        head: Index of the head that produced the map.
    """

    matrix: Tensor
    head: int = 0

    @property
    def tokens(self) -> int:
        return self.matrix.shape[0]

    def numpy(self) -> np.ndarray:
        return self.matrix.data

    def is_row_stochastic(self, atol: float = 1e-5) -> bool:
        a = self.matrix.data
        return bool(np.all(a >= 0) and np.all(a <= 1 + atol) and np.allclose(a.sum(axis=1), 1.0, atol=atol))


class QKVProjection(Module):
    """Three C->C linear maps applied per token, implemented as 1x1 convolutions"""

    def __init__(self, channels: int, dtype: str = "float32") -> None:
        super().__init__()
        if channels <= 0:
            raise ConfigurationError(f"channels must be positive, got {channels}")
        self.channels = channels
        self.q = self.add_module("q", Conv2d(channels, channels, 1, dtype=dtype))
        self.k = self.add_module("k", Conv2d(channels, channels, 1, dtype=dtype))
        self.v = self.add_module("v", Conv2d(channels, channels, 1, dtype=dtype))

    @property
    def scale(self) -> int:
        return self.channels

    def __call__(self, tokens: Tensor) -> tuple[Tensor, Tensor, Tensor]:
        t, c = tokens.shape
        grid = tokens.reshape(1, t, c)
        return tuple(layer(grid).reshape(t, c) for layer in (self.q, self.k, self.v))  # type: ignore[return-value]


def _check_tokens(q: Tensor, k: Tensor, v: Tensor) -> None:
    if q.ndim != 2 or k.ndim != 2 or v.ndim != 2:
        raise DimensionError("attention expects (T, C) tokens", q.shape, k.shape, v.shape)
    if q.shape[1] != k.shape[1] or k.shape[0] != v.shape[0]:
        raise DimensionError("query/key/value shapes disagree", q.shape, k.shape, v.shape)


def scaled_dot_attention(
    q: Tensor, k: Tensor, v: Tensor, scale: float | None = None, head: int = 0
) -> tuple[Tensor, AttentionMap]:
    """softmax(q k^T / sqrt(scale)) v with `scale` defaulting to the channel width.

    Args:
        q: Queries `(T, C)`.
        k: Keys `(T, C)`.
        v: Values `(T, Cv)`.
        scale: Divisor under the square root.
        head: Head index recorded on the returned map.

    Returns:
        Attended values and the attention map.

    Raises:
        DimensionError: If token counts or widths disagree.
    """
    _check_tokens(q, k, v)
    d = q.shape[1] if scale is None else scale
    logits = ops.scale(ops.matmul(q, k.T), 1.0 / math.sqrt(d))
    weights = ops.softmax(logits, axis=-1)
    return ops.matmul(weights, v), AttentionMap(weights, head)


def _head_slices(channels: int, heads: int) -> list[slice]:
    if heads <= 0 or channels % heads:
        raise ConfigurationError(f"width {channels} is not divisible into {heads} heads")
    step = channels // heads
    return [slice(h * step, (h + 1) * step) for h in range(heads)]


def multi_head_attention(q: Tensor, k: Tensor, v: Tensor, heads: int = 1) -> tuple[Tensor, list[AttentionMap]]:
    """Attention over `heads` equal channel groups, each scaled by its group width"""
    _check_tokens(q, k, v)
    if heads == 1:
        out, amap = scaled_dot_attention(q, k, v)
        return out, [amap]
    outputs, maps = [], []
    groups = zip(_head_slices(q.shape[1], heads), _head_slices(v.shape[1], heads), strict=True)
    for h, (cols, vcols) in enumerate(groups):
        out, amap = scaled_dot_attention(q[:, cols], k[:, cols], v[:, vcols], head=h)
        outputs.append(out)
        maps.append(amap)
    return ops.concat(outputs, axis=1), maps


def apply_attention(maps: Sequence[AttentionMap], v: Tensor) -> Tensor:
    """Multiply every head's map with its channel group of `v` and rejoin the groups"""
    if len(maps) == 1:
        return ops.matmul(maps[0].matrix, v)
    groups = _head_slices(v.shape[1], len(maps))
    return ops.concat([ops.matmul(m.matrix, v[:, cols]) for m, cols in zip(maps, groups, strict=True)], axis=1)


def cross_attention_first(f_p: Tensor, f_m: Tensor, heads: int = 1) -> tuple[Tensor, list[AttentionMap]]:
    """First-block cross-modality attention: PAN tokens query, MS tokens are keys and values"""
    if f_p.shape != f_m.shape:
        raise DimensionError("PAN and MS tokens must have equal shapes", f_p.shape, f_m.shape)
    return multi_head_attention(f_p, f_m, f_m, heads)


def evolve_attention(amap: AttentionMap, kernel: Tensor) -> AttentionMap:
    """Next block's map: convolve each row of `amap` with `kernel`, then row-softmax.

    The softmax is applied to the convolved probabilities themselves, so even a unit kernel
    flattens the map towards uniform.

    Raises:
        ConfigurationError: If the kernel length is even.
    """
    evolved = ops.softmax(ops.conv1d_rows(amap.matrix, kernel), axis=-1)
    return AttentionMap(evolved, amap.head)


def evolve_heads(maps: Sequence[AttentionMap], kernels: Tensor) -> list[AttentionMap]:
    """Evolve every head's map with its own row of the `(heads, k)` kernel tensor"""
    if kernels.ndim != 2 or kernels.shape[0] != len(maps):
        raise DimensionError(f"expected one kernel row per head ({len(maps)})", kernels.shape)
    if len(maps) == 1:
        return [evolve_attention(maps[0], kernels)]
    return [evolve_attention(m, kernels[h : h + 1]) for h, m in enumerate(maps)]


def cascaded_chain_reference(
    x: Tensor, projections: Sequence[QKVProjection], blocks: int | None = None
) -> list[tuple[Tensor, AttentionMap]]:
    """Stack of independent self-attention layers, each recomputing its own map.

    Y_0 = x and (Y_r, A_r) = attention(project_r(Y_{r-1})) for r = 1..blocks.
    """
    blocks = len(projections) if blocks is None else blocks
    if blocks < 1 or blocks > len(projections):
        raise ConfigurationError(f"need 1 <= blocks <= {len(projections)}, got {blocks}")
    chain = []
    y = x
    for projection in projections[:blocks]:
        y, amap = scaled_dot_attention(*projection(y))
        chain.append((y, amap))
    return chain


def attention_cosine_similarity(a: AttentionMap | Tensor | np.ndarray, b: AttentionMap | Tensor | np.ndarray) -> float:
    """Cosine similarity of two maps flattened to vectors"""
    x = np.asarray(a.numpy() if isinstance(a, AttentionMap | Tensor) else a, dtype=np.float64).ravel()
    y = np.asarray(b.numpy() if isinstance(b, AttentionMap | Tensor) else b, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DimensionError("attention maps differ in shape", x.shape, y.shape)
    norm = np.linalg.norm(x) * np.linalg.norm(y)
    if norm == 0:
        raise NumericError("cosine similarity of a zero-norm map")
    return float(np.clip(x @ y / norm, -1.0, 1.0))
