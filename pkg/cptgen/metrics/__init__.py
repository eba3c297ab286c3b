"""Goodness measures for predicted effects and CPT comparison."""
