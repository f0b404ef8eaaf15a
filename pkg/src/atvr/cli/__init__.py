"""Command-line interface for atvr."""
