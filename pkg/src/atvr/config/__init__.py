"""Configuration management."""

from atvr.config.settings import LoggingSettings, RuntimeSettings, Settings, get_settings

__all__ = ["LoggingSettings", "RuntimeSettings", "Settings", "get_settings"]
