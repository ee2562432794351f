"""CLI for evaluating a checkpoint (or the bicubic baseline) on a dataset split"""

import logging

import click

from ..core.errors import DataError
from ..core.tensor import benchmark_mode
from ..data.dataset import FULL_RESOLUTION_SPLIT, iter_samples, load_manifest
from ..models.checkpoint import load_checkpoint
from ..quality.report import FULL_COLUMNS, MetricReport, assess_full, assess_reduced, reduced_columns

logger = logging.getLogger(__name__)


@click.command()
@click.option("--ckpt", required=True, help="Checkpoint or run directory, or 'none' for the bicubic baseline")
@click.option("--data", "data_dir", required=True, type=click.Path(file_okay=False), help="Dataset root")
@click.option("--split", default="test", help="Split to evaluate")
@click.option("--mode", type=click.Choice(["reduced", "full"]), default="reduced", help="Evaluation protocol")
@click.option("--variant", help="Run a trained model with another map strategy, e.g. 'shared'")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Report CSV path")
def evaluate(ckpt, data_dir, split, mode, variant, out):
    """Compute per-image quality metrics and write them with mean and std rows"""
    if mode == "full" and split != FULL_RESOLUTION_SPLIT:
        raise DataError(f"full-resolution evaluation needs the '{FULL_RESOLUTION_SPLIT}' split, got '{split}'")
    if mode == "reduced" and split == FULL_RESOLUTION_SPLIT:
        raise DataError(f"split '{split}' has no ground truth; use --mode full")

    manifest = load_manifest(data_dir)
    model = None if ckpt.lower() == "none" else load_checkpoint(ckpt).model
    if model is not None and model.config.bands != manifest.bands:
        raise DataError(f"model expects {model.config.bands} bands, dataset has {manifest.bands}")
    columns = reduced_columns(manifest.bands) if mode == "reduced" else FULL_COLUMNS
    metric_report = MetricReport(mode, columns)

    click.echo(f"Evaluating {'bicubic baseline' if model is None else ckpt} on {split} ({mode} resolution)...")
    for sample in iter_samples(data_dir, split):
        if model is None:
            fused = sample.ms_up
        else:
            inputs = sample.astype(model.config.dtype)
            with benchmark_mode():
                fused = model(inputs.ms_up, inputs.pan, variant)
        if mode == "reduced":
            if sample.gt is None:
                raise DataError(f"sample '{sample.id}' has no ground truth")
            values = assess_reduced(fused, sample.gt, manifest.ratio)
        else:
            values = assess_full(fused, sample.ms, sample.pan, manifest.ratio)
        metric_report.add(sample.id, values)
        logger.info(f"{sample.id}: {values}")

    if not metric_report.images:
        raise DataError(f"split '{split}' is empty")
    path = metric_report.write_csv(out)
    click.echo(f"\n=== {mode.upper()} RESOLUTION REPORT ({len(metric_report.images)} images) ===")
    for name, value in metric_report.mean().items():
        click.echo(f"{name}: {value:.4f}")
    click.echo(f"Report saved to {path}")
