"""CLI for simulated dataset generation"""

import click

from ..data.dataset import build_dataset


@click.command()
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory (must be empty)")
@click.option("--seed", default=0, type=int, help="Dataset seed")
@click.option("--train", "n_train", default=64, type=int, help="Training samples")
@click.option("--val", "n_val", default=8, type=int, help="Validation samples")
@click.option("--test", "n_test", default=8, type=int, help="Reduced-resolution test samples")
@click.option("--full", "n_full", default=0, type=int, help="Full-resolution test samples (no ground truth)")
@click.option("--size", default=64, type=int, help="PAN/GT size at reduced resolution")
@click.option("--bands", default=4, type=int, help="Spectral bands")
@click.option("--ratio", default=4, type=int, help="MS to PAN resolution ratio")
@click.option("--workers", default=1, type=int, help="Generation threads")
def gen_data(out, seed, n_train, n_val, n_test, n_full, size, bands, ratio, workers):
    """Generate a simulated dataset following the reduced-resolution protocol"""
    manifest = build_dataset(
        out,
        seed=seed,
        n_train=n_train,
        n_val=n_val,
        n_test=n_test,
        height=size,
        width=size,
        bands=bands,
        ratio=ratio,
        n_full=n_full,
        workers=workers,
    )
    click.echo(f"Dataset written to {out}")
    for split, count in manifest.counts.items():
        click.echo(f"  {split}: {count} samples")
