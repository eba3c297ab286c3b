"""Observation tables, CPT files and reports."""
