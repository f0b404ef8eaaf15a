"""Experiment drivers behind the CLI."""
