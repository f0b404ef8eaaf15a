"""Artifact sinks."""

from atvr.sinks.base import Sink
from atvr.sinks.csv import CSVSink
from atvr.sinks.json import JSONSink
from atvr.sinks.svg import SVGSink

__all__ = ["Sink", "CSVSink", "JSONSink", "SVGSink"]
