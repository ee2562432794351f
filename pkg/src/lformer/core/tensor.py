"""Tensor value type and the gradient tape that differentiates through it.

A `Tensor` wraps a row-major NumPy buffer of float32 or float64 values. Operations in
`lformer.core.ops` attach an `OpRecord` to every output that depends on a tensor with
`requires_grad=True`; `GradTape.trace` orders those records topologically so `backward`
can replay them in reverse.

Runtime switches (gradient recording, NaN/Inf guards, FLOP tallies) are thread-local: a
tape and the tensors it records belong to the thread that created them.
"""

import logging
import threading
from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DimensionError, NumericError

logger = logging.getLogger(__name__)

SUPPORTED_DTYPES = (np.dtype(np.float32), np.dtype(np.float64))

BackwardRule = Callable[[np.ndarray], Sequence[np.ndarray | None]]

_state = threading.local()


def _get(name: str, default: Any) -> Any:
    return getattr(_state, name, default)


def is_grad_enabled() -> bool:
    """Return whether operations currently record onto the gradient tape"""
    return _get("grad_enabled", True)


def is_debug() -> bool:
    """Return whether NaN/Inf guards run after every forward operation"""
    return _get("debug", True)


def set_debug(enabled: bool) -> None:
    """Turn the NaN/Inf guards on or off for the calling thread"""
    _state.debug = enabled


@contextmanager
def no_grad() -> Iterator[None]:
    """Disable gradient recording inside the block"""
    previous = is_grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


@contextmanager
def debug_mode(enabled: bool = True) -> Iterator[None]:
    """Enable (or disable) NaN/Inf guards inside the block"""
    previous = is_debug()
    _state.debug = enabled
    try:
        yield
    finally:
        _state.debug = previous


@contextmanager
def benchmark_mode() -> Iterator[None]:
    """Run without gradient recording and without validation guards"""
    with no_grad(), debug_mode(False):
        yield


@dataclass
class FlopTally:
    """Runtime FLOP counts per operation category (one multiply-accumulate = 2 FLOPs).

    Attributes:
        conv2d: FLOPs spent in 2-D convolutions.
        matmul: FLOPs spent in matrix products.
        conv1d: FLOPs spent convolving attention rows.
        softmax: FLOPs charged to softmax (5 per element).
    """

    conv2d: int = 0
    matmul: int = 0
    conv1d: int = 0
    softmax: int = 0

    @property
    def total(self) -> int:
        return self.conv2d + self.matmul + self.conv1d + self.softmax


@contextmanager
def flop_tally() -> Iterator[FlopTally]:
    """Count FLOPs of every operation executed inside the block"""
    previous = _get("tally", None)
    tally = FlopTally()
    _state.tally = tally
    try:
        yield tally
    finally:
        _state.tally = previous


def record_flops(category: str, count: int) -> None:
    """Charge `count` FLOPs to `category` on the active tally, if any"""
    tally = _get("tally", None)
    if tally is not None:
        setattr(tally, category, getattr(tally, category) + int(count))


def _coerce(data: Any, dtype: Any = None) -> np.ndarray:
    if isinstance(data, Tensor):
        data = data.data
    if dtype is not None:
        arr = np.array(data, dtype=dtype)
    else:
        arr = np.array(data)
        if arr.dtype not in SUPPORTED_DTYPES:
            arr = arr.astype(np.float32)
    if arr.dtype not in SUPPORTED_DTYPES:
        raise DimensionError(f"unsupported dtype {arr.dtype}; expected float32 or float64")
    return np.ascontiguousarray(arr)


@dataclass
class OpRecord:
    """One recorded operation: its inputs and the rule mapping output grad to input grads"""

    name: str
    inputs: tuple["Tensor", ...]
    backward: BackwardRule


class Tensor:
    """Dense N-dimensional float array that can take part in reverse-mode differentiation."""

    __array_priority__ = 100

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        dtype: Any = None,
        _record: OpRecord | None = None,
    ) -> None:
        self.data: np.ndarray = _coerce(data, dtype)
        self.requires_grad = requires_grad
        self.grad: Tensor | None = None
        self._record = _record

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return self._record is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.size != 1:
            raise DimensionError("item() requires a single-element tensor", self.shape)
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{flag})"

    def __len__(self) -> int:
        return self.shape[0]

    # Operator sugar; the implementations live in lformer.core.ops.
    def __add__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.add(self, other)

    def __radd__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.add(other, self)

    def __sub__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.sub(self, other)

    def __rsub__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.sub(other, self)

    def __mul__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.mul(self, other)

    def __rmul__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.mul(other, self)

    def __truediv__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.div(self, other)

    def __rtruediv__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.div(other, self)

    def __neg__(self) -> "Tensor":
        from . import ops

        return ops.neg(self)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from . import ops

        return ops.matmul(self, other)

    def __getitem__(self, index: Any) -> "Tensor":
        from . import ops

        return ops.getitem(self, index)

    def reshape(self, *shape: Any) -> "Tensor":
        from . import ops

        if len(shape) == 1 and isinstance(shape[0], tuple | list):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, axes: Sequence[int] | None = None) -> "Tensor":
        from . import ops

        return ops.transpose(self, axes)

    @property
    def T(self) -> "Tensor":
        return self.transpose()

    def sum(self, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> "Tensor":
        from . import ops

        return ops.sum(self, axis, keepdims)

    def mean(self, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> "Tensor":
        from . import ops

        return ops.mean(self, axis, keepdims)


def make_result(name: str, data: np.ndarray, inputs: Sequence[Tensor], backward_rule: BackwardRule) -> Tensor:
    """Wrap an operation output, recording it on the tape when any input needs gradients.

    Args:
        name: Operation name, used in diagnostics.
        data: Forward result.
        inputs: Tensor operands in the order `backward_rule` returns their gradients.
        backward_rule: Maps the output gradient to one gradient (or None) per input.

    Returns:
        The output tensor.

    Raises:
        NumericError: In debug mode, when finite inputs produced a non-finite output.
    """
    dtype = np.result_type(*(t.data.dtype for t in inputs)) if inputs else data.dtype
    out = np.asarray(data, dtype=dtype)
    if is_debug() and not np.all(np.isfinite(out)) and all(np.all(np.isfinite(t.data)) for t in inputs):
        raise NumericError(f"{name} produced non-finite values from finite inputs")
    needs_grad = is_grad_enabled() and any(t.requires_grad for t in inputs)
    record = OpRecord(name, tuple(inputs), backward_rule) if needs_grad else None
    return Tensor(out, requires_grad=needs_grad, _record=record)


@dataclass
class GradTape:
    """Operations reachable from a root, in topological (creation-compatible) order.

    Attributes:
        nodes: Every tensor reachable from the root that requires gradients; each node's
            inputs appear before the node.
    """

    nodes: list[Tensor] = field(default_factory=list)

    @classmethod
    def trace(cls, root: Tensor) -> "GradTape":
        """Collect the recorded graph below `root` in topological order"""
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited or not node.requires_grad:
                continue
            visited.add(id(node))
            stack.append((node, True))
            if node._record is not None:
                for parent in node._record.inputs:
                    if id(parent) not in visited:
                        stack.append((parent, False))
        return cls(order)

    @property
    def leaves(self) -> list[Tensor]:
        return [n for n in self.nodes if n.is_leaf]

    def gradients(self, root: Tensor) -> dict[int, np.ndarray]:
        """Return d(root)/d(node) for every leaf on the tape, keyed by `id(node)`.

        Nothing is written to `.grad`, so several threads may differentiate graphs that share
        read-only parameter leaves.
        """
        if root.size != 1:
            raise DimensionError("backward requires a scalar root", root.shape)
        grads: dict[int, np.ndarray] = {id(root): np.ones_like(root.data)}
        for node in reversed(self.nodes):
            upstream = grads.get(id(node))
            if upstream is None or node._record is None:
                continue
            parts = node._record.backward(upstream)
            for parent, part in zip(node._record.inputs, parts, strict=True):
                if part is None or not parent.requires_grad:
                    continue
                part = np.asarray(part, dtype=parent.data.dtype)
                if part.shape != parent.shape:
                    raise DimensionError(f"gradient of {node._record.name} has wrong shape", part.shape, parent.shape)
                if id(parent) in grads:
                    grads[id(parent)] = grads[id(parent)] + part
                else:
                    grads[id(parent)] = part
            if not node.is_leaf:
                del grads[id(node)]
        return {key: value for key, value in grads.items() if key in {id(leaf) for leaf in self.leaves}}


def backward(root: Tensor) -> None:
    """Accumulate d(root)/d(leaf) into `.grad` of every reachable leaf that requires grad"""
    tape = GradTape.trace(root)
    grads = tape.gradients(root)
    for leaf in tape.leaves:
        value = grads.get(id(leaf))
        if value is None:
            value = np.zeros_like(leaf.data)
        if leaf.grad is None:
            leaf.grad = Tensor(value)
        else:
            leaf.grad = Tensor(leaf.grad.data + value)
