"""Threat models and projections."""

from atvr.threats.base import Ball, Norm, ThreatModel
from atvr.threats.projection import contains, project, random_init

__all__ = ["Ball", "Norm", "ThreatModel", "contains", "project", "random_init"]
