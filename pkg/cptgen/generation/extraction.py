"""CPT extraction from any probability-valued predictor over combined causes."""

from collections.abc import Callable, Sequence

import numpy as np

from cptgen.core.errors import CptError, DimensionError, PredictorRangeError
from cptgen.probability.tables import COLUMN_TOLERANCE, Cpt
from cptgen.probability.vectors import NodeSpec, ProbVector, combined_labels

Predictor = Callable[[ProbVector], ProbVector]


def extract_cpt(
    predictor: Predictor,
    n: int,
    effect_labels: Sequence[str],
    cause_labels: Sequence[str] | None = None,
    parents: Sequence[NodeSpec] | None = None,
    effect_name: str = "Z",
) -> Cpt:
    """Evaluate ``predictor`` at each canonical hard-evidence cause vector.

    Column j of the result is ``predictor(e_j)`` unchanged, so a predictor that
    is already a CPT product returns that CPT exactly.

    Args:
        predictor: Maps an n-state cause vector to an m-state effect vector.
        n: Number of combined cause states.
        effect_labels: The m effect state labels.
        cause_labels: Combined cause labels; derived from ``parents`` or numbered
            ``x1..xn`` when omitted.
        parents: Optional parent nodes whose combined states make up the causes.
        effect_name: Name of the effect node.

    Raises:
        PredictorRangeError: If an output is not a valid probability vector over
            the effect states.
    """
    effect_labels = tuple(effect_labels)
    if cause_labels is None:
        if parents is not None:
            cause_labels = combined_labels([p.labels for p in parents])
        else:
            cause_labels = tuple(f"x{j + 1}" for j in range(n))
    cause_labels = tuple(cause_labels)
    if len(cause_labels) != n:
        raise DimensionError(f"{len(cause_labels)} cause labels for {n} cause states")

    columns = np.empty((len(effect_labels), n))
    for j in range(n):
        try:
            output = predictor(ProbVector.hard(cause_labels, j))
        except CptError as e:
            raise PredictorRangeError(f"predictor failed: {e.reason}", column=cause_labels[j]) from e
        if not isinstance(output, ProbVector) or len(output) != len(effect_labels):
            raise PredictorRangeError(
                f"predictor must return a probability vector over {len(effect_labels)} states",
                column=cause_labels[j],
            )
        if abs(float(output.values.sum()) - 1.0) > COLUMN_TOLERANCE:
            raise PredictorRangeError(
                f"predictor output sums to {float(output.values.sum())!r}", column=cause_labels[j]
            )
        columns[:, j] = output.values

    return Cpt(
        effect_labels=effect_labels,
        cause_labels=cause_labels,
        entries=columns,
        parents=tuple(parents) if parents is not None else None,
        effect_name=effect_name,
    )
