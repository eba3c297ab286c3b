"""Tests for cptgen."""
