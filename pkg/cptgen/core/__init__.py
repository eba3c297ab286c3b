"""Core shared components: configuration, errors, logging and metrics."""
