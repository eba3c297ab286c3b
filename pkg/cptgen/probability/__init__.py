"""Probability vectors, the combine operator and CPT inference."""
