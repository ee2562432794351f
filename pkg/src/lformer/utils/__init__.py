"""Shared helpers: key=value text and run configuration."""
