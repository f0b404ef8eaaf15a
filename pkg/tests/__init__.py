"""Tests for AI Evolution Platform."""
