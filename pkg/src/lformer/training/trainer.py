"""Training loop: loss, per-sample gradients, Adam updates, checkpoints and the loss curve.

Batches follow a stateless order: position `p = step * batch + j` reads sample
`perm_e[p % n]` where `e = p // n` and `perm_e` is a permutation drawn from `(seed, e)`. A run
resumed from a checkpoint at step s therefore sees exactly the batches an unbroken run sees.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from lformer.core.errors import DataError, NumericError
from lformer.core.tensor import GradTape, Tensor
from lformer.data.dataset import Sample, load_manifest, load_sample
from lformer.models.checkpoint import load_checkpoint, save_checkpoint
from lformer.models.lformer import LFormerModel, build
from lformer.quality.losses import total_loss
from lformer.utils.run_config import RunConfig

from .optim import Adam, AdamState, MultiStepSchedule

logger = logging.getLogger(__name__)

LOSS_CURVE_NAME = "loss_curve.csv"
RUN_CONFIG_NAME = "run_config.txt"


def loss_forward(model: LFormerModel, sample: Sample, alpha: float = 0.1, variant: str | None = None) -> Tensor:
    """L1(H_s, GT) + alpha * (1 - SSIM(H_s, GT)) for one sample"""
    if sample.gt is None:
        raise DataError(f"sample '{sample.id}' has no ground truth")
    fused, _ = model.forward(sample.ms_up, sample.pan, variant)
    return total_loss(fused, sample.gt, alpha)


def sample_gradients(model: LFormerModel, sample: Sample, alpha: float) -> tuple[float, dict[str, np.ndarray]]:
    """Loss value and gradient per parameter name, without touching `.grad`"""
    loss = loss_forward(model, sample, alpha)
    tape = GradTape.trace(loss)
    by_id = tape.gradients(loss)
    grads = {}
    for name, param in model.named_parameters():
        g = by_id.get(id(param))
        grads[name] = np.zeros_like(param.data) if g is None else g
    return loss.item(), grads


@dataclass
class StepResult:
    """Outcome of one training step: mean loss over the batch and the learning rate used"""

    loss: float
    lr: float | None


def train_step(
    model: LFormerModel,
    batch: list[Sample],
    optimizer: Adam | None,
    alpha: float = 0.1,
    pool: ThreadPoolExecutor | None = None,
) -> StepResult:
    """Average the per-sample gradients of `batch` and apply one optimizer update.

    Per-sample gradients are reduced in batch order, so the update is identical whether or not
    a thread `pool` computes them. With `optimizer=None` only the loss is evaluated.

    Raises:
        NumericError: If the batch loss is not finite.
    """
    if not batch:
        raise DataError("empty batch")
    if pool is not None:
        results = list(pool.map(lambda s: sample_gradients(model, s, alpha), batch))
    else:
        results = [sample_gradients(model, s, alpha) for s in batch]
    loss = float(np.mean([r[0] for r in results]))
    if not np.isfinite(loss):
        raise NumericError(f"training loss is {loss}")
    if optimizer is None:
        return StepResult(loss, None)
    scale = 1.0 / len(batch)
    grads = {}
    for name in results[0][1]:
        total = results[0][1][name].copy()
        for _, sample_grads in results[1:]:
            total += sample_grads[name]
        grads[name] = total * total.dtype.type(scale)
    return StepResult(loss, optimizer.step(grads))


@dataclass
class BatchOrder:
    """Deterministic, resumable sample order over `n` training samples"""

    n: int
    batch: int
    seed: int
    _perms: dict[int, np.ndarray] = field(default_factory=dict)

    def permutation(self, epoch: int) -> np.ndarray:
        if epoch not in self._perms:
            self._perms[epoch] = np.random.default_rng([self.seed, epoch]).permutation(self.n)
        return self._perms[epoch]

    def indices(self, step: int) -> list[int]:
        positions = range(step * self.batch, (step + 1) * self.batch)
        return [int(self.permutation(p // self.n)[p % self.n]) for p in positions]


@dataclass
class TrainResult:
    """Summary of a finished run"""

    model: LFormerModel
    losses: pd.DataFrame
    checkpoint: Path
    steps: int


class Trainer:
    """Run a training job described by a RunConfig.

    Outputs land in `out_dir`: the run config, `loss_curve.csv` and `checkpoints/`. When
    `out_dir` already holds checkpoints the run resumes from the latest one.
    """

    def __init__(self, config: RunConfig, data_dir: str | Path, out_dir: str | Path) -> None:
        self.config = config
        self.data_dir = Path(data_dir)
        self.out_dir = Path(out_dir)

    def _load_training_set(self, dtype: str) -> list[Sample]:
        manifest = load_manifest(self.data_dir)
        ids = manifest.ids("train")
        if not ids:
            raise DataError(f"no training samples in {self.data_dir}")
        if manifest.bands != self.config.bands:
            raise DataError(f"dataset has {manifest.bands} bands, config expects {self.config.bands}")
        return [load_sample(self.data_dir, "train", i).astype(dtype) for i in ids]

    def _restore(self) -> tuple[LFormerModel, int, AdamState | None]:
        checkpoints = self.out_dir / "checkpoints"
        if not (checkpoints / "latest").is_file():
            return build(self.config.network_config()), 0, None
        restored = load_checkpoint(checkpoints)
        if restored.model.config != self.config.network_config():
            raise DataError(f"checkpoint in {checkpoints} was trained with a different network config")
        state = None
        if restored.moments is not None:
            state = AdamState(step=restored.step, m=restored.moments[0], v=restored.moments[1])
        logger.info(f"Resuming from step {restored.step}")
        return restored.model, restored.step, state

    def _previous_losses(self, start: int) -> list[dict]:
        path = self.out_dir / LOSS_CURVE_NAME
        if start == 0 or not path.is_file():
            return []
        frame = pd.read_csv(path, float_precision="round_trip")
        return frame[frame["step"] < start].to_dict(orient="records")

    def run(self) -> TrainResult:
        """Train until `config.steps` updates, checkpointing along the way.

        Row s of the loss curve is the loss of batch s at the parameters after s updates, so a
        run writes `steps + 1` rows.

        Raises:
            NumericError: If the loss becomes non-finite; the latest checkpoint is left in place.
        """
        cfg = self.config
        samples = self._load_training_set(cfg.dtype)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        (self.out_dir / RUN_CONFIG_NAME).write_text(cfg.to_text(), encoding="utf-8")

        model, start, state = self._restore()
        schedule = MultiStepSchedule(cfg.lr, cfg.milestones(), cfg.decay_factor)
        optimizer = Adam(list(model.named_parameters()), cfg.lr, cfg.betas, cfg.eps, cfg.weight_decay, schedule)
        if state is not None:
            optimizer.load_state(state)
        order = BatchOrder(len(samples), cfg.batch, cfg.seed)
        rows = self._previous_losses(start)
        checkpoint = save_checkpoint(self.out_dir, model, start, self._moments(optimizer)) if start == 0 else None

        pool = ThreadPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
        try:
            for step in range(start, cfg.steps + 1):
                batch = [samples[i] for i in order.indices(step)]
                result = train_step(model, batch, optimizer if step < cfg.steps else None, cfg.alpha, pool)
                rows.append({"step": step, "loss": result.loss, "lr": result.lr if result.lr is not None else 0.0})
                if step % cfg.log_every == 0 or step == cfg.steps:
                    logger.info(f"step {step}/{cfg.steps} loss {result.loss:.6f}")
                done = step + 1
                if done <= cfg.steps and (done % cfg.checkpoint_every == 0 or done == cfg.steps):
                    checkpoint = save_checkpoint(self.out_dir, model, done, self._moments(optimizer))
                    self._write_losses(rows)
        except NumericError:
            logger.exception(f"Training diverged; keeping the checkpoint in {self.out_dir / 'checkpoints'}")
            self._write_losses(rows)
            raise
        finally:
            if pool is not None:
                pool.shutdown()

        losses = self._write_losses(rows)
        if checkpoint is None:
            checkpoint = save_checkpoint(self.out_dir, model, cfg.steps, self._moments(optimizer))
        return TrainResult(model, losses, checkpoint, cfg.steps)

    @staticmethod
    def _moments(optimizer: Adam) -> tuple[dict[str, np.ndarray], dict[str, np.ndarray]]:
        return optimizer.state.m, optimizer.state.v

    def _write_losses(self, rows: list[dict]) -> pd.DataFrame:
        frame = pd.DataFrame(rows, columns=["step", "loss", "lr"])
        frame.to_csv(self.out_dir / LOSS_CURVE_NAME, index=False)
        return frame
