"""Reusable network layers: parameter containers, convolution blocks and the Sobel high-pass"""

import logging
from collections.abc import Iterator

import numpy as np

from lformer.core import ops
from lformer.core.errors import DimensionError
from lformer.core.tensor import Tensor

logger = logging.getLogger(__name__)

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T


class Parameter(Tensor):
    """Trainable tensor. `fan_in` selects the initializer: None keeps it at zero."""

    def __init__(self, shape: tuple[int, ...], dtype: str = "float32", fan_in: int | None = None) -> None:
        super().__init__(np.zeros(shape, dtype=dtype), requires_grad=True)
        self.fan_in = fan_in


class Module:
    """Container of named parameters and child modules.

    Registration order is the iteration order of `named_parameters`, which fixes the
    initialization stream and the checkpoint layout.
    """

    def __init__(self) -> None:
        self._parameters: dict[str, Parameter] = {}
        self._modules: dict[str, Module] = {}

    def register_parameter(self, name: str, param: Parameter) -> Parameter:
        self._parameters[name] = param
        return param

    def add_module(self, name: str, module: "Module") -> "Module":
        self._modules[name] = module
        return module

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        for name, param in self._parameters.items():
            yield f"{prefix}{name}", param
        for name, module in self._modules.items():
            yield from module.named_parameters(f"{prefix}{name}.")

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        """Copy arrays into the parameters; names and shapes must match exactly"""
        params = dict(self.named_parameters())
        if set(state) != set(params):
            missing = sorted(set(params) - set(state))
            unexpected = sorted(set(state) - set(params))
            raise DimensionError(f"state mismatch, missing={missing} unexpected={unexpected}")
        for name, value in state.items():
            if value.shape != params[name].shape:
                raise DimensionError(f"parameter {name} has wrong shape", value.shape, params[name].shape)
            params[name].data = np.ascontiguousarray(value, dtype=params[name].dtype)

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None


def init_params(module: Module, seed: int) -> dict[str, np.ndarray]:
    """Draw fan-in scaled uniform weights in +/- sqrt(6 / fan_in); zero everything else.

    Parameters are visited in registration order from a single generator, so the same
    seed always yields bit-identical parameters.

    Args:
        module: Module to initialize in place.
        seed: Generator seed.

    Returns:
        Mapping of parameter name to its new value.
    """
    rng = np.random.default_rng(seed)
    for name, param in module.named_parameters():
        if param.fan_in is None:
            param.data = np.zeros(param.shape, dtype=param.dtype)
            continue
        bound = np.sqrt(6.0 / param.fan_in)
        param.data = rng.uniform(-bound, bound, size=param.shape).astype(param.dtype)
        logger.debug(f"Initialized {name} {param.shape} with bound {bound:.4f}")
    return module.state_dict()


class Conv2d(Module):
    """Stride-1 "same" convolution over `(H, W, Cin)` images"""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int = 3,
        bias: bool = True,
        zero_init: bool = False,
        dtype: str = "float32",
    ) -> None:
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        fan_in = None if zero_init else kernel_size * kernel_size * in_channels
        self.weight = self.register_parameter(
            "weight", Parameter((kernel_size, kernel_size, in_channels, out_channels), dtype, fan_in)
        )
        self.bias = self.register_parameter("bias", Parameter((out_channels,), dtype)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        if x.ndim != 3 or x.shape[2] != self.in_channels:
            raise DimensionError(f"expected {self.in_channels} input channels", x.shape)
        return ops.conv2d(x, self.weight, self.bias)


class ProjectionBlock(Module):
    """3x3 conv, ReLU, 3x3 conv: maps Cin channels to d at unchanged spatial size"""

    def __init__(self, in_channels: int, width: int, dtype: str = "float32") -> None:
        super().__init__()
        self.width = width
        self.conv1 = self.add_module("conv1", Conv2d(in_channels, width, 3, dtype=dtype))
        self.conv2 = self.add_module("conv2", Conv2d(width, width, 3, dtype=dtype))

    def __call__(self, x: Tensor) -> Tensor:
        return self.conv2(ops.relu(self.conv1(x)))


class ResidualConvBlock(Module):
    """x + conv(relu(conv(x))) with 3x3 convs of constant width"""

    def __init__(self, channels: int, dtype: str = "float32") -> None:
        super().__init__()
        self.conv1 = self.add_module("conv1", Conv2d(channels, channels, 3, dtype=dtype))
        self.conv2 = self.add_module("conv2", Conv2d(channels, channels, 3, dtype=dtype))

    def __call__(self, x: Tensor) -> Tensor:
        return x + self.conv2(ops.relu(self.conv1(x)))


def sobel_kernel(dtype: str | np.dtype = "float32") -> Tensor:
    """Fixed `(3, 3, 1, 2)` kernel stacking the horizontal and vertical Sobel operators"""
    return Tensor(np.stack([SOBEL_X, SOBEL_Y], axis=-1)[:, :, None, :], dtype=dtype)


def sobel_apply(x: Tensor) -> Tensor:
    """Per-channel Sobel gradient magnitude sqrt(gx^2 + gy^2), same shape as `x`.

    Borders are edge-replicated before a valid convolution, so constant images map to zero
    everywhere including the border.
    """
    if x.ndim != 3:
        raise DimensionError("sobel_apply expects an (H, W, C) image", x.shape)
    kernel = sobel_kernel(x.dtype)
    padded = ops.pad_edge(x, 1)
    bands = []
    for c in range(x.shape[2]):
        response = ops.conv2d(padded[:, :, c : c + 1], kernel, padding="valid")
        bands.append(ops.sqrt(ops.sum(ops.square(response), axis=2, keepdims=True)))
    return ops.concat(bands, axis=2)


def flatten_tokens(x: Tensor) -> Tensor:
    """`(H, W, C)` image to `(H*W, C)` tokens in row-major pixel order"""
    if x.ndim != 3:
        raise DimensionError("flatten_tokens expects an (H, W, C) image", x.shape)
    h, w, c = x.shape
    return x.reshape(h * w, c)


def unflatten_tokens(tokens: Tensor, height: int, width: int) -> Tensor:
    if tokens.ndim != 2 or tokens.shape[0] != height * width:
        raise DimensionError(f"cannot unflatten to {height}x{width}", tokens.shape)
    return tokens.reshape(height, width, tokens.shape[1])
