"""Prometheus metrics for CPT generation and evaluation runs."""

from pathlib import Path

import structlog
from prometheus_client import (
    CollectorRegistry,
    Counter,
    Histogram,
    generate_latest,
    write_to_textfile,
)

logger = structlog.get_logger("cptgen.metrics")

cptgen_registry = CollectorRegistry()

cpts_generated_total = Counter(
    "cptgen_cpts_generated_total",
    "Total number of CPTs generated",
    ["method"],
    registry=cptgen_registry,
)

repaired_columns_total = Counter(
    "cptgen_repaired_columns_total",
    "CPT basis columns changed by a repair method",
    ["method", "action"],
    registry=cptgen_registry,
)

generation_duration_seconds = Histogram(
    "cptgen_generation_duration_seconds",
    "Time spent generating one CPT",
    ["method"],
    registry=cptgen_registry,
)

em_iterations = Histogram(
    "cptgen_em_iterations",
    "EM updates performed per restart",
    buckets=(1, 2, 5, 10, 20, 50, 100, 200, 500, 1000),
    registry=cptgen_registry,
)

evaluations_total = Counter(
    "cptgen_evaluations_total",
    "Total number of CPT evaluations against observation sets",
    registry=cptgen_registry,
)


class MetricsCollector:
    """Collector for cptgen run metrics."""

    def record_generated(self, method: str, duration: float) -> None:
        """Record that a CPT was generated."""
        cpts_generated_total.labels(method=method).inc()
        generation_duration_seconds.labels(method=method).observe(duration)

    def record_repair(self, method: str, action: str, columns: int) -> None:
        """Record repaired basis columns by action (out_of_range, surge_fallback, uniform)."""
        if columns:
            repaired_columns_total.labels(method=method, action=action).inc(columns)

    def record_em_run(self, iterations: int) -> None:
        """Record the iteration count of one EM restart."""
        em_iterations.observe(iterations)

    def record_evaluation(self) -> None:
        """Record one CPT evaluation."""
        evaluations_total.inc()

    def get_metrics_text(self) -> str:
        """Get metrics in Prometheus text format."""
        return generate_latest(cptgen_registry).decode("utf-8")

    def write_textfile(self, path: str | Path) -> None:
        """Write the registry to a node-exporter style text file."""
        write_to_textfile(str(path), cptgen_registry)
        logger.debug("Metrics written", path=str(path))


# Global metrics collector
metrics = MetricsCollector()
