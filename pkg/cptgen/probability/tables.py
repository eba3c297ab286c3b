"""Conditional probability tables and forward/reverse inference."""

from collections.abc import Sequence
from dataclasses import dataclass, field
from math import prod

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray

from cptgen.core.errors import DegenerateMarginalError, DimensionError, ValidationError
from cptgen.probability.vectors import NodeSpec, ProbVector, _check_labels, _frozen, combined_labels

logger = structlog.get_logger("cptgen")

COLUMN_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class Cpt:
    """Column-stochastic m×n table P(Z|X).

    Columns are indexed by combined cause states. ``parents`` optionally names
    the parent nodes whose combined states make up the columns; ``arities`` is
    the per-parent arity profile and is derived from ``parents`` when given.
    Columns may miss one by up to ``tolerance``; those further off than
    ``COLUMN_TOLERANCE`` are renormalized.
    """

    effect_labels: tuple[str, ...]
    cause_labels: tuple[str, ...]
    entries: NDArray[np.float64] = field(repr=False)
    arities: tuple[int, ...] | None = None
    parents: tuple[NodeSpec, ...] | None = None
    effect_name: str = "Z"
    tolerance: float = field(default=COLUMN_TOLERANCE, repr=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.tolerance < 1.0:
            raise ValidationError(f"column tolerance must lie in (0, 1), got {self.tolerance!r}")
        effect_labels = _check_labels(self.effect_labels, "CPT effect")
        cause_labels = _check_labels(self.cause_labels, "CPT cause")
        entries = _frozen(self.entries)
        if entries.shape != (len(effect_labels), len(cause_labels)):
            raise DimensionError(
                f"entries have shape {entries.shape}, labels need "
                f"{(len(effect_labels), len(cause_labels))}"
            )
        if not np.all(np.isfinite(entries)):
            raise ValidationError("CPT entries must be finite")
        bad = np.argwhere((entries < 0.0) | (entries > 1.0))
        if bad.size:
            i, j = bad[0]
            raise ValidationError(
                f"entry {entries[i, j]!r} outside [0, 1]", row=int(i) + 1, column=cause_labels[j]
            )
        sums = entries.sum(axis=0)
        off = np.flatnonzero(np.abs(sums - 1.0) > self.tolerance)
        if off.size:
            j = int(off[0])
            raise ValidationError(f"column sums to {sums[j]!r}, not 1", column=cause_labels[j])
        loose = np.abs(sums - 1.0) > COLUMN_TOLERANCE
        if loose.any():
            columns = [cause_labels[j] for j in np.flatnonzero(loose)]
            logger.debug("Renormalizing CPT columns", columns=columns)
            entries = _frozen(np.where(loose, entries / sums, entries))

        arities = self.arities
        if self.parents is not None:
            parents = tuple(self.parents)
            derived = tuple(p.arity for p in parents)
            if arities is not None and tuple(arities) != derived:
                raise DimensionError(f"arities {tuple(arities)} disagree with parents {derived}")
            arities = derived
            object.__setattr__(self, "parents", parents)
        if arities is not None:
            arities = tuple(int(a) for a in arities)
            if prod(arities) != len(cause_labels):
                raise DimensionError(
                    f"arity profile {arities} does not multiply to {len(cause_labels)} columns"
                )

        object.__setattr__(self, "effect_labels", effect_labels)
        object.__setattr__(self, "cause_labels", cause_labels)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "arities", arities)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.effect_labels), len(self.cause_labels))

    @property
    def cause_arity_profile(self) -> tuple[int, ...] | None:
        return self.arities

    @property
    def effect(self) -> NodeSpec:
        return NodeSpec(self.effect_name, self.effect_labels)

    def column(self, index: int) -> ProbVector:
        return ProbVector(self.effect_labels, self.entries[:, index])

    def parent_specs(self) -> tuple[NodeSpec, ...]:
        """Parent nodes, falling back to positional names and 1-based state indexes."""
        if self.parents is not None:
            return self.parents
        arities = self.arities or (len(self.cause_labels),)
        return tuple(
            NodeSpec(str(k + 1), tuple(str(s + 1) for s in range(a)))
            for k, a in enumerate(arities)
        )

    @classmethod
    def from_columns(
        cls,
        entries: ArrayLike,
        effect_labels: Sequence[str],
        parents: Sequence[NodeSpec],
        effect_name: str = "Z",
    ) -> "Cpt":
        """Build a CPT whose cause labels are the combined parent labels."""
        parents = tuple(parents)
        return cls(
            effect_labels=tuple(effect_labels),
            cause_labels=combined_labels([p.labels for p in parents]),
            entries=np.asarray(entries, dtype=np.float64),
            parents=parents,
            effect_name=effect_name,
        )


@dataclass(frozen=True, eq=False)
class JointTable:
    """Joint probability table P(Z, X); all entries sum to one."""

    effect_labels: tuple[str, ...]
    cause_labels: tuple[str, ...]
    entries: NDArray[np.float64] = field(repr=False)

    def __post_init__(self) -> None:
        entries = _frozen(self.entries)
        if entries.shape != (len(self.effect_labels), len(self.cause_labels)):
            raise DimensionError(f"joint table shape {entries.shape} does not match labels")
        if np.any(entries < 0.0) or np.any(entries > 1.0):
            raise ValidationError("joint probabilities outside [0, 1]")
        total = float(entries.sum())
        if abs(total - 1.0) > COLUMN_TOLERANCE:
            raise ValidationError(f"joint table sums to {total!r}, not 1")
        object.__setattr__(self, "entries", entries)

    def effect_marginal(self) -> NDArray[np.float64]:
        return self.entries.sum(axis=1)

    def cause_marginal(self) -> NDArray[np.float64]:
        return self.entries.sum(axis=0)


def _check_cause(cpt: Cpt, cause: ProbVector) -> None:
    if len(cause) != cpt.shape[1]:
        raise DimensionError(
            f"cause vector has {len(cause)} states, CPT has {cpt.shape[1]} columns"
        )


def predict_effects(cpt: Cpt, cause: ProbVector) -> ProbVector:
    """Effect probabilities z = C·x.

    Raises:
        DimensionError: If the cause length differs from the CPT column count.
    """
    _check_cause(cpt, cause)
    effects = cpt.entries @ cause.values
    return ProbVector(cpt.effect_labels, np.clip(effects, 0.0, 1.0))


def joint_table(cpt: Cpt, cause: ProbVector) -> JointTable:
    """Joint table P(Z, X) with entries c_ij·x_j."""
    _check_cause(cpt, cause)
    joint = cpt.entries * cause.values[None, :]
    return JointTable(cpt.effect_labels, cpt.cause_labels, np.clip(joint, 0.0, 1.0))


def reverse_cpt(cpt: Cpt, cause: ProbVector, impute_uniform: bool = False) -> Cpt:
    """Reverse a CPT with Bayes' rule, giving the n×m table P(X|Z).

    Args:
        cpt: The forward table P(Z|X).
        cause: Prior over the combined cause states.
        impute_uniform: Set the column of a zero-marginal effect state uniform
            instead of failing.

    Raises:
        DegenerateMarginalError: If an effect state has zero marginal and
            ``impute_uniform`` is not set.
    """
    joint = joint_table(cpt, cause).entries
    marginal = joint.sum(axis=1)
    n = cpt.shape[1]

    reversed_entries = np.empty((n, cpt.shape[0]))
    for i, label in enumerate(cpt.effect_labels):
        if marginal[i] <= 0.0:
            if not impute_uniform:
                raise DegenerateMarginalError(
                    "effect state has zero marginal probability", column=label
                )
            logger.warning("Imputing uniform column for zero effect marginal", state=label)
            reversed_entries[:, i] = 1.0 / n
            continue
        column = joint[i, :] / marginal[i]
        reversed_entries[:, i] = column / column.sum()

    return Cpt(
        effect_labels=cpt.cause_labels,
        cause_labels=cpt.effect_labels,
        entries=np.clip(reversed_entries, 0.0, 1.0),
        effect_name="X",
    )


def predict_causes(
    cpt: Cpt,
    prior: ProbVector,
    effect: ProbVector,
    impute_uniform: bool = False,
) -> ProbVector:
    """Posterior over combined cause states given an observed effect distribution.

    The reversed table P(X|Z) under ``prior`` is applied to ``effect``.
    """
    if len(effect) != cpt.shape[0]:
        raise DimensionError(
            f"effect vector has {len(effect)} states, CPT has {cpt.shape[0]} rows"
        )
    reverse = reverse_cpt(cpt, prior, impute_uniform=impute_uniform)
    return predict_effects(reverse, effect)
