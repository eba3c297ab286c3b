"""Least-squares conditional-mean basis for a CPT."""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import structlog
from numpy.typing import NDArray

from cptgen.core.errors import DimensionError, SingularMatrixError, ValidationError
from cptgen.generation.observations import ObservationSet
from cptgen.probability.vectors import NodeSpec, _frozen

logger = structlog.get_logger("cptgen")


@dataclass(frozen=True, eq=False)
class CptBasis:
    """Unconstrained m×n estimate of a CPT; columns are combined cause states."""

    effect_labels: tuple[str, ...]
    cause_labels: tuple[str, ...]
    entries: NDArray[np.float64] = field(repr=False)
    parents: tuple[NodeSpec, ...] | None = None
    effect_name: str = "Z"

    def __post_init__(self) -> None:
        entries = _frozen(self.entries)
        if entries.shape != (len(self.effect_labels), len(self.cause_labels)):
            raise DimensionError(f"basis shape {entries.shape} does not match labels")
        if not np.all(np.isfinite(entries)):
            raise ValidationError("CPT basis entries must be finite")
        object.__setattr__(self, "entries", entries)


def cpt_basis_least_squares(observations: ObservationSet, ridge: float = 0.0) -> CptBasis:
    """Solve the normal equations B* = (X'X)⁻¹X'Z for the combined causes X.

    Args:
        observations: Training rows; parent blocks are combined row-wise.
        ridge: Tikhonov term added to X'X. Zero requires X to have full column rank.

    Returns:
        The transposed solution as an m×n basis.

    Raises:
        SingularMatrixError: If X'X is singular and ``ridge`` is zero.
    """
    if ridge < 0:
        raise ValidationError(f"ridge must be non-negative, got {ridge}")

    x = observations.combined_causes()
    z = observations.effect_block
    n = x.shape[1]

    if ridge == 0.0:
        rank = int(np.linalg.matrix_rank(x))
        if rank < n:
            raise SingularMatrixError(
                f"combined cause matrix has rank {rank} < {n} columns; X'X is singular "
                "(add observations or request a ridge)"
            )

    gram = x.T @ x
    if ridge:
        gram = gram + ridge * np.eye(n)
    rhs = x.T @ z

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        try:
            solution = scipy.linalg.solve(gram, rhs, assume_a="pos")
        except np.linalg.LinAlgError as e:
            raise SingularMatrixError(f"normal equations could not be solved: {e}") from e

    logger.debug("Least-squares CPT basis computed", rows=x.shape[0], causes=n, ridge=ridge)
    return CptBasis(
        effect_labels=observations.effect.labels,
        cause_labels=observations.cause_labels,
        entries=solution.T,
        parents=observations.parents,
        effect_name=observations.effect.name,
    )
