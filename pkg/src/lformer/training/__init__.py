"""Optimizer and training loop"""

from .optim import Adam, AdamState, MultiStepSchedule
from .trainer import BatchOrder, StepResult, Trainer, TrainResult, loss_forward, sample_gradients, train_step

__all__ = [
    "Adam",
    "AdamState",
    "BatchOrder",
    "MultiStepSchedule",
    "StepResult",
    "TrainResult",
    "Trainer",
    "loss_forward",
    "sample_gradients",
    "train_step",
]
