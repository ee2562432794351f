"""Checkpoint directories: one container file per tensor plus a `manifest.txt`.

    <out>/checkpoints/step_000100/manifest.txt
    <out>/checkpoints/step_000100/param.<name>.lftk
    <out>/checkpoints/step_000100/state.m.<name>.lftk
    <out>/checkpoints/step_000100/state.v.<name>.lftk
    <out>/checkpoints/latest            name of the newest complete checkpoint

The manifest holds `step`, every `config.<field>`, `param.<name>=<file>` and the optimizer
entries `state.step`, `state.m.<name>`, `state.v.<name>`.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from lformer.core.errors import ConfigurationError, DataError
from lformer.data.container import load_tensor, save_tensor
from lformer.utils.keyvalue import read_keyvalue, write_keyvalue

from .config import LFormerConfig
from .lformer import LFormerModel

logger = logging.getLogger(__name__)

CHECKPOINTS_DIR = "checkpoints"
LATEST_NAME = "latest"
MANIFEST_NAME = "manifest.txt"


@dataclass
class Checkpoint:
    """A model restored from disk with its training position.

    Attributes:
        model: Network with the stored parameters.
        step: Number of optimizer updates applied to the parameters.
        moments: Optimizer first and second moments per parameter, if stored.
        path: Directory the checkpoint was read from.
    """

    model: LFormerModel
    step: int
    moments: tuple[dict[str, np.ndarray], dict[str, np.ndarray]] | None
    path: Path


def checkpoint_name(step: int) -> str:
    return f"step_{step:06d}"


def save_checkpoint(
    out_dir: str | Path,
    model: LFormerModel,
    step: int,
    moments: tuple[dict[str, np.ndarray], dict[str, np.ndarray]] | None = None,
) -> Path:
    """Write a checkpoint under `<out_dir>/checkpoints/` and point `latest` at it"""
    root = Path(out_dir) / CHECKPOINTS_DIR
    directory = root / checkpoint_name(step)
    directory.mkdir(parents=True, exist_ok=True)
    entries: dict[str, object] = {"step": step}
    entries.update({f"config.{k}": v for k, v in model.config.model_dump().items()})
    for name, param in model.named_parameters():
        filename = f"param.{name}.lftk"
        save_tensor(directory / filename, param.data)
        entries[f"param.{name}"] = filename
    if moments is not None:
        entries["state.step"] = step
        for kind, values in zip(("m", "v"), moments, strict=True):
            for name, value in values.items():
                filename = f"state.{kind}.{name}.lftk"
                save_tensor(directory / filename, value)
                entries[f"state.{kind}.{name}"] = filename
    write_keyvalue(directory / MANIFEST_NAME, entries)
    (root / LATEST_NAME).write_text(directory.name + "\n", encoding="utf-8")
    logger.info(f"Saved checkpoint {directory}")
    return directory


def resolve_checkpoint(path: str | Path) -> Path:
    """Accept a checkpoint directory, a `checkpoints/` directory or a training output directory"""
    path = Path(path)
    for candidate in (path, path / CHECKPOINTS_DIR):
        if (candidate / MANIFEST_NAME).is_file():
            return candidate
        latest = candidate / LATEST_NAME
        if latest.is_file():
            return candidate / latest.read_text(encoding="utf-8").strip()
    raise DataError(f"no checkpoint found at {path}")


def load_checkpoint(path: str | Path) -> Checkpoint:
    """Rebuild the model described by a checkpoint and load its parameters and moments"""
    directory = resolve_checkpoint(path)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.is_file():
        raise DataError(f"checkpoint {directory} has no manifest")
    try:
        entries = read_keyvalue(manifest_path)
        step = int(entries["step"])
    except (KeyError, ValueError, ConfigurationError) as e:
        raise DataError(f"malformed checkpoint manifest {manifest_path}: {e}") from e

    config = LFormerConfig.from_mapping(
        {k.removeprefix("config."): v for k, v in entries.items() if k.startswith("config.")}
    )
    model = LFormerModel(config)
    model.load_state_dict(_load_prefixed(directory, entries, "param."))
    moments = None
    if "state.step" in entries:
        moments = (_load_prefixed(directory, entries, "state.m."), _load_prefixed(directory, entries, "state.v."))
    logger.info(f"Loaded checkpoint {directory} at step {step}")
    return Checkpoint(model, step, moments, directory)


def _load_prefixed(directory: Path, entries: dict[str, str], prefix: str) -> dict[str, np.ndarray]:
    return {k.removeprefix(prefix): load_tensor(directory / v).data for k, v in entries.items() if k.startswith(prefix)}
