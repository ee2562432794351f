"""CLI for training a network"""

import click

from ..core.errors import ConfigurationError
from ..training.trainer import Trainer
from ..utils.run_config import RunConfig


@click.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Run config (key=value or YAML)")
@click.option("--data", "data_dir", type=click.Path(file_okay=False), help="Dataset root; overrides data_dir")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Run directory; overrides out_dir")
@click.option("--workers", type=int, help="Gradient threads; overrides workers")
def train(config_path, data_dir, out_dir, workers):
    """Train, checkpoint and write the loss curve; resumes when the run directory has checkpoints"""
    config = RunConfig.load(config_path) if config_path else RunConfig()
    if workers is not None:
        config = RunConfig.from_mapping({**config.model_dump(), "workers": workers})
    data_dir = data_dir or config.data_dir
    out_dir = out_dir or config.out_dir
    if not data_dir or not out_dir:
        raise ConfigurationError("both a dataset (--data) and a run directory (--out) are required")

    click.echo(f"Training {config.variant} model for {config.steps} steps...")
    result = Trainer(config, data_dir, out_dir).run()
    losses = result.losses["loss"]
    click.echo(f"Initial loss: {losses.iloc[0]:.6f}")
    click.echo(f"Final loss: {losses.iloc[-1]:.6f}")
    click.echo(f"Checkpoint saved to {result.checkpoint}")
