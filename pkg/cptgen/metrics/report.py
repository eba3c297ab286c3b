"""Goodness report of a CPT on a test observation set."""

import numpy as np
import structlog
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from cptgen.core.errors import DimensionError
from cptgen.core.metrics import metrics
from cptgen.generation.observations import ObservationSet
from cptgen.metrics.effects import diagnostic_goodness, observation_errors, state_errors
from cptgen.probability.tables import Cpt

logger = structlog.get_logger("cptgen")

_MEAN_TOLERANCE = 1e-12


class GoodnessReport(BaseModel):
    """Error measures of predicted against observed effect probabilities."""

    model_config = ConfigDict(frozen=True)

    per_observation_errors: tuple[float, ...] = Field(..., description="Absolute effect observation error per row")
    mean_absolute_error: float = Field(..., ge=0.0, le=1.0)
    state_errors: tuple[float, ...] = Field(..., description="Mean absolute error per effect state")
    total_average_shift_error: float = Field(..., ge=0.0, le=1.0)
    average_shift_error: float = Field(..., ge=0.0, le=1.0, description="Σ|Ẑ−Z| / (m·k)")
    diagnostic_goodness: float = Field(..., ge=0.0, le=1.0)
    diagnostic_error: float = Field(..., ge=0.0, le=1.0)
    observation_count: int = Field(..., ge=1)
    effect_labels: tuple[str, ...] = ()
    observed_effects: tuple[tuple[float, ...], ...] = ()
    predicted_effects: tuple[tuple[float, ...], ...] = ()

    @model_validator(mode="after")
    def check_consistency(self) -> "GoodnessReport":
        if len(self.per_observation_errors) != self.observation_count:
            raise ValueError("one observation error per row is required")
        if any(not 0.0 <= e <= 1.0 for e in self.per_observation_errors):
            raise ValueError("observation errors must lie in [0, 1]")
        if any(not 0.0 <= s <= 1.0 for s in self.state_errors):
            raise ValueError("state errors must lie in [0, 1]")
        if self.diagnostic_error != 1.0 - self.diagnostic_goodness:
            raise ValueError("diagnostic error must equal 1 - diagnostic goodness")
        if abs(self.mean_absolute_error - float(np.mean(self.per_observation_errors))) > _MEAN_TOLERANCE:
            raise ValueError("mean absolute error disagrees with the observation errors")
        if self.state_errors and abs(self.total_average_shift_error - float(np.mean(self.state_errors))) > _MEAN_TOLERANCE:
            raise ValueError("total average shift error disagrees with the state errors")
        return self

    @property
    def state_labels(self) -> tuple[str, ...]:
        return self.effect_labels or tuple(str(i + 1) for i in range(len(self.state_errors)))


def build_report(
    z_test: NDArray[np.float64],
    z_hat: NDArray[np.float64],
    effect_labels: tuple[str, ...] = (),
) -> GoodnessReport:
    """Every goodness measure for observed rows ``z_test`` and predictions ``z_hat``."""
    deltas = observation_errors(z_test, z_hat)
    per_state, total = state_errors(z_test, z_hat)
    goodness, error = diagnostic_goodness(z_test, z_hat)
    k, m = z_test.shape
    return GoodnessReport(
        per_observation_errors=tuple(float(d) for d in deltas),
        mean_absolute_error=float(deltas.mean()),
        state_errors=per_state,
        total_average_shift_error=total,
        average_shift_error=min(1.0, float(np.abs(z_hat - z_test).sum() / (m * k))),
        diagnostic_goodness=goodness,
        diagnostic_error=error,
        observation_count=k,
        effect_labels=effect_labels,
        observed_effects=tuple(tuple(float(v) for v in row) for row in z_test),
        predicted_effects=tuple(tuple(float(v) for v in row) for row in z_hat),
    )


def _check_compatible(cpt: Cpt, observations: ObservationSet) -> None:
    if cpt.arities is not None and cpt.arities != observations.arities:
        raise DimensionError(
            f"test parents have arities {observations.arities}, CPT expects {cpt.arities}"
        )
    n = len(observations.cause_labels)
    if cpt.shape != (observations.effect.arity, n):
        raise DimensionError(
            f"test data is {observations.effect.arity}×{n}, CPT is {cpt.shape[0]}×{cpt.shape[1]}"
        )


def _predict_rows(cpt: Cpt, observations: ObservationSet) -> NDArray[np.float64]:
    return np.clip(observations.combined_causes() @ cpt.entries.T, 0.0, 1.0)


def evaluate_cpt(cpt: Cpt, test: ObservationSet) -> GoodnessReport:
    """Compare each test effect row with the CPT's prediction from the test causes.

    Raises:
        DimensionError: If the test arities or effect arity differ from the CPT.
    """
    _check_compatible(cpt, test)
    report = build_report(test.effect_block, _predict_rows(cpt, test), cpt.effect_labels)
    metrics.record_evaluation()
    logger.info(
        "CPT evaluated",
        rows=report.observation_count,
        diagnostic_goodness=report.diagnostic_goodness,
        total_average_shift_error=report.total_average_shift_error,
    )
    return report


def evaluate_against_reference(cpt: Cpt, reference: Cpt, observations: ObservationSet) -> GoodnessReport:
    """Judge ``cpt`` by the predictions of a reference CPT taken as correct."""
    _check_compatible(cpt, observations)
    _check_compatible(reference, observations)
    report = build_report(
        _predict_rows(reference, observations),
        _predict_rows(cpt, observations),
        cpt.effect_labels,
    )
    metrics.record_evaluation()
    logger.info(
        "CPT evaluated against reference",
        rows=report.observation_count,
        diagnostic_goodness=report.diagnostic_goodness,
    )
    return report
