"""CLI commands for the lformer package."""
