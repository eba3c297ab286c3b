"""Key-value goodness reports and plot-data CSVs."""

import math
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path

import pandas as pd
import structlog

from cptgen.core.errors import IoError
from cptgen.metrics.report import GoodnessReport

logger = structlog.get_logger("cptgen")

_HUNDREDTH = Decimal("0.01")


def format_percent(value: float) -> str:
    """``0.92857…`` → ``92.86%``, rounding half to even on the shortest decimal form."""
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    percent = (Decimal(repr(float(value))) * 100).quantize(_HUNDREDTH, rounding=ROUND_HALF_EVEN)
    if percent == 0:
        percent = abs(percent)
    return f"{percent}%"


def report_lines(report: GoodnessReport) -> list[str]:
    lines = [
        f"observation_count,{report.observation_count}",
        f"diagnostic_goodness,{format_percent(report.diagnostic_goodness)}",
        f"diagnostic_error,{format_percent(report.diagnostic_error)}",
        f"mean_absolute_error,{format_percent(report.mean_absolute_error)}",
        f"total_average_shift_error,{format_percent(report.total_average_shift_error)}",
        f"average_shift_error,{format_percent(report.average_shift_error)}",
    ]
    for label, error in zip(report.state_labels, report.state_errors, strict=True):
        lines.append(f"state_error:{label},{format_percent(error)}")
    return lines


def plot_data_paths(path: str | Path) -> tuple[Path, Path]:
    """Companion CSV paths ``<stem>_errors.csv`` and ``<stem>_effects.csv``."""
    path = Path(path)
    return (
        path.with_name(f"{path.stem}_errors.csv"),
        path.with_name(f"{path.stem}_effects.csv"),
    )


def _effects_frame(report: GoodnessReport) -> pd.DataFrame:
    labels = report.state_labels
    frame = pd.DataFrame(
        {"observation": range(1, report.observation_count + 1)},
    )
    for j, label in enumerate(labels):
        frame[f"observed:{label}"] = [row[j] for row in report.observed_effects]
    for j, label in enumerate(labels):
        frame[f"predicted:{label}"] = [row[j] for row in report.predicted_effects]
    return frame


def write_report(report: GoodnessReport, path: str | Path, plot_data: bool = False) -> list[Path]:
    """Write the report and, with ``plot_data``, the per-observation CSVs.

    Returns:
        Every file written, report first.

    Raises:
        IoError: If a file cannot be written.
    """
    path = Path(path)
    written = [path]
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(report_lines(report)) + "\n")

        if plot_data:
            errors_path, effects_path = plot_data_paths(path)
            errors = pd.DataFrame(
                {
                    "observation": range(1, report.observation_count + 1),
                    "error": report.per_observation_errors,
                }
            )
            errors.to_csv(errors_path, index=False, lineterminator="\n")
            _effects_frame(report).to_csv(effects_path, index=False, lineterminator="\n")
            written.extend([errors_path, effects_path])
    except OSError as e:
        raise IoError(f"cannot write report: {e.strerror}", path=str(path)) from e

    logger.info("Report written", path=str(path), plot_data=plot_data)
    return written
