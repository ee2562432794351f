"""Adam with decoupled weight decay and a multi-step learning-rate schedule"""

import logging
from dataclasses import dataclass, field

import numpy as np

from lformer.core.errors import ConfigurationError, DimensionError
from lformer.models.blocks import Parameter

logger = logging.getLogger(__name__)


@dataclass
class MultiStepSchedule:
    """Learning rate `base_lr * factor ** (number of milestones <= step)`"""

    base_lr: float
    milestones: list[int] = field(default_factory=list)
    factor: float = 0.1

    def lr(self, step: int) -> float:
        passed = sum(1 for m in self.milestones if m <= step)
        return self.base_lr * self.factor**passed


@dataclass
class AdamState:
    """First and second moment estimates per parameter, after `step` updates"""

    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


class Adam:
    """Adam over named parameters with weight decay applied directly to the weights.

    Each update first shrinks every parameter by `lr * weight_decay`, then applies the
    bias-corrected moment step `lr * m_hat / (sqrt(v_hat) + eps)`.
    """

    def __init__(
        self,
        params: list[tuple[str, Parameter]],
        lr: float = 3e-4,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.1,
        schedule: MultiStepSchedule | None = None,
    ) -> None:
        if lr < 0 or eps <= 0 or weight_decay < 0 or not all(0 <= b < 1 for b in betas):
            raise ConfigurationError(f"invalid Adam settings lr={lr} betas={betas} eps={eps} wd={weight_decay}")
        self.params = dict(params)
        self.betas = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.schedule = schedule or MultiStepSchedule(lr)
        self.state = AdamState(
            m={name: np.zeros_like(p.data) for name, p in self.params.items()},
            v={name: np.zeros_like(p.data) for name, p in self.params.items()},
        )

    @property
    def current_lr(self) -> float:
        return self.schedule.lr(self.state.step)

    def step(self, grads: dict[str, np.ndarray]) -> float:
        """Apply one update and return the learning rate it used.

        Args:
            grads: Gradient per parameter name; missing names count as zero gradients.
        """
        lr = self.current_lr
        b1, b2 = self.betas
        t = self.state.step + 1
        for name, param in self.params.items():
            g = grads.get(name)
            g = np.zeros_like(param.data) if g is None else np.asarray(g, dtype=param.dtype)
            if g.shape != param.shape:
                raise DimensionError(f"gradient for {name} has wrong shape", g.shape, param.shape)
            m = b1 * self.state.m[name] + (1 - b1) * g
            v = b2 * self.state.v[name] + (1 - b2) * g * g
            self.state.m[name], self.state.v[name] = m.astype(param.dtype), v.astype(param.dtype)
            m_hat = m / (1 - b1**t)
            v_hat = v / (1 - b2**t)
            decayed = param.data - lr * self.weight_decay * param.data
            param.data = (decayed - lr * m_hat / (np.sqrt(v_hat) + self.eps)).astype(param.dtype)
        self.state.step = t
        return lr

    def load_state(self, state: AdamState) -> None:
        if set(state.m) != set(self.params) or set(state.v) != set(self.params):
            raise DimensionError("optimizer state does not match the parameters")
        self.state = state
