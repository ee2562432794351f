"""CLI for tracing one sample through a trained model and writing visual reports"""

from pathlib import Path

import click
import numpy as np
import pandas as pd

from ..core.tensor import benchmark_mode
from ..data.dataset import find_sample, load_manifest
from ..data.export import write_ppm
from ..models.checkpoint import load_checkpoint
from ..profiling.profiler import similarity_report, write_similarity_csv
from ..quality.dashboard_generator import ExperimentDashboardGenerator
from ..quality.report import MetricReport, assess_reduced, reduced_columns
from ..training.trainer import LOSS_CURVE_NAME


@click.command()
@click.option("--trace-from", "ckpt", required=True, help="Checkpoint or run directory")
@click.option("--data", "data_dir", required=True, type=click.Path(file_okay=False), help="Dataset root")
@click.option("--sample", "sample_id", required=True, help="Sample id, e.g. test_00000")
@click.option("--variant", help="Run the model with another map strategy, e.g. 'shared'")
@click.option("--head", default=0, type=int, help="Attention head whose maps are compared")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory")
@click.option("--dashboard", type=click.Choice(["plotly", "vega", "both"]), default="both", help="Dashboard format")
def report(ckpt, data_dir, sample_id, variant, head, out, dashboard):
    """Write attention similarity, feature maps, the error map and a dashboard for one sample"""
    checkpoint = load_checkpoint(ckpt)
    model = checkpoint.model
    sample = find_sample(data_dir, sample_id).astype(model.config.dtype)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)

    click.echo(f"Tracing {sample_id} through {checkpoint.path}...")
    with benchmark_mode():
        fused, trace = model.forward(sample.ms_up, sample.pan, variant)

    similarity = similarity_report(trace, head)
    write_similarity_csv(similarity, out_dir / "attention_similarity.csv")
    click.echo(f"Attention similarity ({len(similarity)}x{len(similarity)}) saved")

    for i, features in enumerate(trace.globals, start=1):
        write_ppm(out_dir / f"features_block_{i}.ppm", features.data.mean(axis=2), normalize=True)
    click.echo(f"{len(trace.globals)} feature maps saved")

    metric_report = None
    if sample.gt is not None:
        error = np.abs(fused.data - sample.gt.data).mean(axis=2)
        write_ppm(out_dir / "error_map.ppm", np.clip(error, 0.0, 1.0))
        ratio = load_manifest(data_dir).ratio
        metric_report = MetricReport("reduced", reduced_columns(model.config.bands))
        metric_report.add(sample.id, assess_reduced(fused, sample.gt, ratio))
        metric_report.write_csv(out_dir / "metrics.csv")
        click.echo("Error map and metrics saved")
    else:
        click.echo(f"Sample {sample_id} has no ground truth; skipping the error map")

    loss_path = checkpoint.path.parent.parent / LOSS_CURVE_NAME
    loss_curve = pd.read_csv(loss_path) if loss_path.is_file() else None
    generator = ExperimentDashboardGenerator()
    if dashboard in ("plotly", "both"):
        title = f"LFormer report: {sample_id}"
        html = generator.generate_plotly_dashboard(similarity, loss_curve, metric_report, title)
        (out_dir / "dashboard.html").write_text(html, encoding="utf-8")
    if dashboard in ("vega", "both"):
        (out_dir / "dashboard.json").write_text(generator.generate_vega_dashboard(similarity, loss_curve), "utf-8")
    click.echo(f"Report saved to {out_dir}")
