"""CPT generation from observations."""
