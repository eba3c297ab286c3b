"""Probability vectors and the combine operator for converging subnets."""

from collections.abc import Sequence
from dataclasses import dataclass, field
from math import prod

import numpy as np
from numpy.typing import ArrayLike, NDArray

from cptgen.core.errors import DimensionError, ValidationError

DEFAULT_TOLERANCE = 1e-6


def _frozen(values: ArrayLike) -> NDArray[np.float64]:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


def _check_labels(labels: Sequence[str], what: str) -> tuple[str, ...]:
    labels = tuple(str(label) for label in labels)
    if not labels:
        raise ValidationError(f"{what} needs at least one state label")
    if any(not label for label in labels):
        raise ValidationError(f"{what} has an empty state label")
    if len(set(labels)) != len(labels):
        raise ValidationError(f"{what} has duplicate state labels {list(labels)}")
    return labels


@dataclass(frozen=True)
class NodeSpec:
    """A discrete Bayesian node: its name and ordered state labels."""

    name: str
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("node name must be nonempty")
        object.__setattr__(self, "labels", _check_labels(self.labels, f"node {self.name}"))

    @property
    def arity(self) -> int:
        return len(self.labels)

    def state_index(self, label: str) -> int:
        """Return the position of ``label``; ValidationError if unknown."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(
                f"unknown state {label!r}, expected one of {list(self.labels)}",
                node=self.name,
            ) from None


@dataclass(frozen=True, eq=False)
class ProbVector:
    """A discrete distribution over labeled states.

    Construction only validates; use ``make_prob_vector`` for noisy input that
    needs clamping and renormalization.
    """

    labels: tuple[str, ...]
    values: NDArray[np.float64] = field(repr=False)

    def __post_init__(self) -> None:
        labels = _check_labels(self.labels, "probability vector")
        values = _frozen(self.values)
        if values.ndim != 1 or values.shape[0] != len(labels):
            raise DimensionError(
                f"{values.size} values for {len(labels)} labels"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("probabilities must be finite")
        if np.any(values < 0.0) or np.any(values > 1.0):
            raise ValidationError(f"probabilities outside [0, 1]: {values.tolist()}")
        total = float(values.sum())
        if abs(total - 1.0) > DEFAULT_TOLERANCE:
            raise ValidationError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        pairs = ", ".join(f"{k}={v:.4g}" for k, v in zip(self.labels, self.values, strict=True))
        return f"ProbVector({pairs})"

    @classmethod
    def hard(cls, labels: Sequence[str], index: int) -> "ProbVector":
        """Hard evidence: probability one on state ``index``."""
        values = np.zeros(len(labels))
        if not 0 <= index < len(labels):
            raise DimensionError(f"state index {index} outside 0..{len(labels) - 1}")
        values[index] = 1.0
        return cls(tuple(labels), values)

    @classmethod
    def uniform(cls, labels: Sequence[str]) -> "ProbVector":
        return cls(tuple(labels), np.full(len(labels), 1.0 / len(labels)))

    def is_hard(self) -> bool:
        """True if one state carries probability one."""
        return bool(np.count_nonzero(self.values == 1.0) == 1 and np.count_nonzero(self.values) == 1)

    def hard_index(self) -> int | None:
        return int(np.argmax(self.values)) if self.is_hard() else None


def make_prob_vector(
    labels: Sequence[str],
    values: ArrayLike,
    tolerance: float = DEFAULT_TOLERANCE,
    *,
    node: str | None = None,
    row: int | None = None,
) -> ProbVector:
    """Validate noisy probabilities, clamp small negatives and renormalize.

    Args:
        labels: State labels.
        values: Raw probabilities.
        tolerance: Accepted slack on negativity and on the sum.
        node, row: Coordinates reported in errors.

    Raises:
        ValidationError: If a value is below ``-tolerance`` or the sum is off by more
            than ``tolerance``.
    """
    array = np.array(values, dtype=np.float64)
    labels = tuple(labels)
    if array.ndim != 1 or array.shape[0] != len(labels):
        raise DimensionError(f"{array.size} values for {len(labels)} labels", node=node, row=row)
    if not np.all(np.isfinite(array)):
        raise ValidationError("probabilities must be finite", node=node, row=row)
    if np.any(array < -tolerance):
        raise ValidationError(
            f"negative probability {float(array.min())!r} beyond tolerance {tolerance}",
            node=node,
            row=row,
        )
    total = float(array.sum())
    if abs(total - 1.0) > tolerance:
        raise ValidationError(
            f"probabilities sum to {total!r}, off by more than {tolerance}",
            node=node,
            row=row,
        )
    array = np.clip(array, 0.0, None)
    array = array / array.sum()
    return ProbVector(labels, np.clip(array, 0.0, 1.0))


def combine_rows(blocks: Sequence[ArrayLike]) -> NDArray[np.float64]:
    """Row-wise combine operator.

    Each block is a k×nᵢ matrix of parent probability rows. Row r of the result
    is the combined cause vector of row r, earlier parents varying slower.
    """
    if not blocks:
        raise ValidationError("combine needs at least one parent")
    arrays = [np.atleast_2d(np.asarray(b, dtype=np.float64)) for b in blocks]
    rows = arrays[0].shape[0]
    if any(a.shape[0] != rows for a in arrays):
        raise DimensionError("parent blocks have different row counts")

    combined = arrays[0]
    for block in arrays[1:]:
        combined = (combined[:, :, None] * block[:, None, :]).reshape(rows, -1)
    return combined


COMBINED_LABEL_SEPARATOR = "+"


def _joined_labels(parent_labels: Sequence[Sequence[str]], separator: str) -> list[str]:
    labels = [""]
    for i, states in enumerate(parent_labels):
        join = separator if i else ""
        labels = [f"{prefix}{join}{state}" for prefix in labels for state in states]
    return labels


def combined_labels(parent_labels: Sequence[Sequence[str]]) -> tuple[str, ...]:
    """Joint state labels in combine order (e1r1, e1r2, ...).

    Labels are concatenated. When plain concatenation is ambiguous, for
    example states "1" and "11" of one parent against "1" and "11" of the
    next, every label is joined with ``+`` instead (1+11, 11+1).

    Raises:
        ValidationError: If the joined labels still collide.
    """
    labels = _joined_labels(parent_labels, "")
    if len(set(labels)) != len(labels):
        labels = _joined_labels(parent_labels, COMBINED_LABEL_SEPARATOR)
        if len(set(labels)) != len(labels):
            raise ValidationError(
                "parent state labels give ambiguous joint labels even when joined "
                f"with {COMBINED_LABEL_SEPARATOR!r}"
            )
    return tuple(labels)


def combine(parents: Sequence[ProbVector]) -> ProbVector:
    """Combine independent parent vectors into one vector over joint states.

    The entry for state tuple (i₁, …, i_k) sits at index
    ((i₁·n₂ + i₂)·n₃ + …) with zero-based indices.

    Raises:
        ValidationError: If ``parents`` is empty.
    """
    if not parents:
        raise ValidationError("combine needs at least one parent")
    values = combine_rows([p.values[None, :] for p in parents])[0]
    labels = combined_labels([p.labels for p in parents])
    # Products of entries in [0, 1] stay in range; the clip only guards rounding.
    return ProbVector(labels, np.clip(values, 0.0, 1.0))


def split_combined(
    combined: ProbVector,
    arities: Sequence[int],
    labels: Sequence[Sequence[str]] | None = None,
) -> list[ProbVector]:
    """Split a combined vector back into per-parent marginals.

    Exact inverse of ``combine`` for product-form inputs; for any other input
    the per-parent marginals are returned.

    Raises:
        DimensionError: If the arities do not multiply to the vector length.
    """
    arities = [int(a) for a in arities]
    if not arities or any(a < 1 for a in arities) or prod(arities) != len(combined):
        raise DimensionError(
            f"arities {arities} do not multiply to combined length {len(combined)}"
        )
    if labels is None:
        labels = [tuple(f"s{i + 1}" for i in range(a)) for a in arities]
    elif len(labels) != len(arities):
        raise DimensionError(f"{len(labels)} label sets for {len(arities)} parents")

    joint = combined.values.reshape(arities)
    parents = []
    for axis, states in enumerate(labels):
        others = tuple(i for i in range(len(arities)) if i != axis)
        marginal = joint.sum(axis=others) if others else joint
        marginal = np.clip(marginal, 0.0, 1.0)
        parents.append(ProbVector(tuple(states), marginal))
    return parents
