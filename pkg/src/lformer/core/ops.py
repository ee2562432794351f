"""Differentiable operations over `Tensor`.

Every function here computes its forward value with NumPy, records a backward rule through
`make_result`, and charges FLOPs to the active tally for the four counted categories
(conv2d, matmul, conv1d rows, softmax). Image tensors are laid out `(H, W, C)`; 2-D
convolution weights are `(kh, kw, Cin, Cout)` and use the cross-correlation convention.
"""

from collections.abc import Sequence
from typing import Any, Literal

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigurationError, DimensionError, NumericError
from .tensor import Tensor, make_result, record_flops

Padding = Literal["same", "valid"]


def as_tensor(value: Any, like: Tensor | None = None) -> Tensor:
    """Return `value` as a Tensor, matching the dtype of `like` for plain numbers"""
    if isinstance(value, Tensor):
        return value
    dtype = like.dtype if like is not None else None
    return Tensor(np.asarray(value, dtype=dtype) if dtype is not None else value)


def unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `grad` down to `shape`, undoing NumPy broadcasting"""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _binary(a: Any, b: Any) -> tuple[Tensor, Tensor]:
    if isinstance(a, Tensor):
        return a, as_tensor(b, a)
    b = as_tensor(b)
    return as_tensor(a, b), b


def add(a: Any, b: Any) -> Tensor:
    a, b = _binary(a, b)

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return unbroadcast(g, a.shape), unbroadcast(g, b.shape)

    return make_result("add", a.data + b.data, (a, b), rule)


def sub(a: Any, b: Any) -> Tensor:
    a, b = _binary(a, b)

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return unbroadcast(g, a.shape), unbroadcast(-g, b.shape)

    return make_result("sub", a.data - b.data, (a, b), rule)


def mul(a: Any, b: Any) -> Tensor:
    a, b = _binary(a, b)

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return unbroadcast(g * b.data, a.shape), unbroadcast(g * a.data, b.shape)

    return make_result("mul", a.data * b.data, (a, b), rule)


def div(a: Any, b: Any) -> Tensor:
    a, b = _binary(a, b)

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return (
            unbroadcast(g / b.data, a.shape),
            unbroadcast(-g * a.data / (b.data * b.data), b.shape),
        )

    return make_result("div", a.data / b.data, (a, b), rule)


def neg(x: Tensor) -> Tensor:
    return make_result("neg", -x.data, (x,), lambda g: (-g,))


def square(x: Tensor) -> Tensor:
    return make_result("square", x.data * x.data, (x,), lambda g: (2.0 * g * x.data,))


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return make_result("relu", np.where(mask, x.data, 0), (x,), lambda g: (g * mask,))


def abs(x: Tensor) -> Tensor:  # noqa: A001
    return make_result("abs", np.abs(x.data), (x,), lambda g: (g * np.sign(x.data),))


def sqrt(x: Tensor) -> Tensor:
    """Elementwise square root; the derivative is taken as 0 where the output is 0"""
    out = np.sqrt(x.data)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        safe = np.where(out > 0, out, 1)
        return (np.where(out > 0, g / (2.0 * safe), 0),)

    return make_result("sqrt", out, (x,), rule)


def _expand_reduced(g: np.ndarray, shape: tuple[int, ...], axis: Any, keepdims: bool) -> np.ndarray:
    if axis is None:
        return np.broadcast_to(g, shape)
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    if not keepdims:
        for ax in sorted(a % len(shape) for a in axes):
            g = np.expand_dims(g, ax)
    return np.broadcast_to(g, shape)


def sum(x: Tensor, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    out = x.data.sum(axis=axis, keepdims=keepdims)
    return make_result("sum", out, (x,), lambda g: (_expand_reduced(g, x.shape, axis, keepdims).copy(),))


def mean(x: Tensor, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> Tensor:
    out = x.data.mean(axis=axis, keepdims=keepdims)
    count = x.size // max(np.asarray(out).size, 1)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (_expand_reduced(g, x.shape, axis, keepdims) / count,)

    return make_result("mean", out, (x,), rule)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        out = x.data.reshape(tuple(shape))
    except ValueError as e:
        raise DimensionError(f"cannot reshape to {tuple(shape)}", x.shape) from e
    return make_result("reshape", out, (x,), lambda g: (g.reshape(x.shape),))


def transpose(x: Tensor, axes: Sequence[int] | None = None) -> Tensor:
    order = tuple(reversed(range(x.ndim))) if axes is None else tuple(axes)
    inverse = tuple(np.argsort(order))
    return make_result("transpose", x.data.transpose(order), (x,), lambda g: (g.transpose(inverse),))


def getitem(x: Tensor, index: Any) -> Tensor:
    out = x.data[index]

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        grad = np.zeros_like(x.data)
        np.add.at(grad, index, g)
        return (grad,)

    return make_result("getitem", np.array(out), (x,), rule)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    if not tensors:
        raise DimensionError("concat needs at least one tensor")
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as e:
        raise DimensionError("concat operands disagree off the joined axis", *(t.shape for t in tensors)) from e
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def rule(g: np.ndarray) -> list[np.ndarray]:
        return np.split(g, bounds, axis=axis)

    return make_result("concat", out, tuple(tensors), rule)


def pad_edge(x: Tensor, pad: int, axes: Sequence[int] = (0, 1)) -> Tensor:
    """Replicate border values `pad` times along each of `axes`"""
    indices = {ax: np.clip(np.arange(-pad, x.shape[ax] + pad), 0, x.shape[ax] - 1) for ax in axes}
    out = x.data
    for ax, idx in indices.items():
        out = np.take(out, idx, axis=ax)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        for ax in reversed(list(indices)):
            shape = list(g.shape)
            shape[ax] = x.shape[ax]
            folded = np.zeros(shape, dtype=g.dtype)
            np.add.at(folded, (np.s_[:],) * ax + (indices[ax],), g)
            g = folded
        return (g,)

    return make_result("pad_edge", out, (x,), rule)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """2-D matrix product `(m, k) @ (k, n)`"""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError("matmul expects (m, k) @ (k, n)", a.shape, b.shape)
    m, k = a.shape
    n = b.shape[1]
    record_flops("matmul", 2 * m * k * n)

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return g @ b.data.T, a.data.T @ g

    return make_result("matmul", a.data @ b.data, (a, b), rule)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Numerically stable softmax along `axis` (5 FLOPs charged per element)"""
    if np.isnan(x.data).any():
        raise NumericError("softmax input contains NaN")
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)
    record_flops("softmax", 5 * x.size)

    def rule(g: np.ndarray) -> tuple[np.ndarray]:
        return (out * (g - (g * out).sum(axis=axis, keepdims=True)),)

    return make_result("softmax", out, (x,), rule)


def _same_padding(size: int) -> tuple[int, int]:
    before = (size - 1) // 2
    return before, size - 1 - before


def conv2d(x: Tensor, w: Tensor, bias: Tensor | None = None, padding: Padding = "same") -> Tensor:
    """2-D cross-correlation of an `(H, W, Cin)` image with a `(kh, kw, Cin, Cout)` kernel.

    Args:
        x: Input image.
        w: Kernel.
        bias: Optional `(Cout,)` bias.
        padding: "same" zero-pads so the output keeps `H x W`; "valid" does not pad.

    Returns:
        `(Hout, Wout, Cout)` output.

    Raises:
        DimensionError: If ranks or channel counts disagree, or a valid convolution has no output.
        ConfigurationError: For an unknown padding mode.
    """
    if x.ndim != 3 or w.ndim != 4:
        raise DimensionError("conv2d expects x (H, W, Cin) and w (kh, kw, Cin, Cout)", x.shape, w.shape)
    kh, kw, cin, cout = w.shape
    if x.shape[2] != cin:
        raise DimensionError("conv2d channel mismatch", x.shape, w.shape)
    if bias is not None and bias.shape != (cout,):
        raise DimensionError("conv2d bias must be (Cout,)", bias.shape, w.shape)
    if padding == "same":
        (top, bottom), (left, right) = _same_padding(kh), _same_padding(kw)
    elif padding == "valid":
        top = bottom = left = right = 0
    else:
        raise ConfigurationError(f"unknown padding mode '{padding}'")

    xp = np.pad(x.data, ((top, bottom), (left, right), (0, 0)))
    if xp.shape[0] < kh or xp.shape[1] < kw:
        raise DimensionError("conv2d kernel larger than input", x.shape, w.shape)
    windows = sliding_window_view(xp, (kh, kw), axis=(0, 1))
    out = np.tensordot(windows, w.data, axes=([3, 4, 2], [0, 1, 2]))
    if bias is not None:
        out = out + bias.data
    hout, wout = out.shape[:2]
    record_flops("conv2d", 2 * hout * wout * kh * kw * cin * cout)

    def rule(g: np.ndarray) -> tuple[np.ndarray | None, ...]:
        dw = np.tensordot(windows, g, axes=([0, 1], [0, 1])).transpose(1, 2, 0, 3)
        gp = np.pad(g, ((kh - 1, kh - 1), (kw - 1, kw - 1), (0, 0)))
        flipped = w.data[::-1, ::-1].transpose(0, 1, 3, 2)
        g_windows = sliding_window_view(gp, (kh, kw), axis=(0, 1))
        dxp = np.tensordot(g_windows, flipped, axes=([3, 4, 2], [0, 1, 2]))
        dx = dxp[top : top + x.shape[0], left : left + x.shape[1]]
        grads: list[np.ndarray | None] = [dx, dw]
        if bias is not None:
            grads.append(g.sum(axis=(0, 1)))
        return grads

    inputs = (x, w) if bias is None else (x, w, bias)
    return make_result("conv2d", out, inputs, rule)


def conv1d_rows(x: Tensor, kernel: Tensor) -> Tensor:
    """Convolve every row of a 2-D tensor with one odd-length kernel, zero padding "same".

    `kernel` is `(kw,)` or `(1, kw)`; output has the shape of `x`.
    """
    if x.ndim != 2:
        raise DimensionError("conv1d_rows expects a 2-D input", x.shape)
    if kernel.ndim == 2 and kernel.shape[0] == 1:
        taps = kernel.data.reshape(-1)
    elif kernel.ndim == 1:
        taps = kernel.data
    else:
        raise DimensionError("conv1d_rows kernel must be (kw,) or (1, kw)", kernel.shape)
    kw = taps.shape[0]
    if kw % 2 == 0:
        raise ConfigurationError(f"kernel size must be odd, got {kw}")
    rows, length = x.shape
    half = kw // 2
    xp = np.pad(x.data, ((0, 0), (half, half)))
    out = np.zeros_like(x.data)
    for t in range(kw):
        out = out + taps[t] * xp[:, t : t + length]
    record_flops("conv1d", 2 * rows * length * kw)

    def rule(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        dxp = np.zeros_like(xp)
        dk = np.zeros_like(taps)
        for t in range(kw):
            dxp[:, t : t + length] += taps[t] * g
            dk[t] = (g * xp[:, t : t + length]).sum()
        return dxp[:, half : half + length], dk.reshape(kernel.shape)

    return make_result("conv1d_rows", out, (x, kernel), rule)


def scale(x: Tensor, factor: float) -> Tensor:
    """Multiply by a Python scalar without promoting the dtype"""
    return make_result("scale", x.data * x.dtype.type(factor), (x,), lambda g: (g * x.dtype.type(factor),))
