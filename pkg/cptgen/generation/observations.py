"""Paired cause/effect observations of a converging subnet."""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from cptgen.core.errors import DimensionError, ValidationError
from cptgen.probability.vectors import DEFAULT_TOLERANCE, NodeSpec, _frozen, combine_rows, combined_labels


def _check_block(block: NDArray[np.float64], node: NodeSpec, rows: Sequence[int], tolerance: float) -> None:
    if block.ndim != 2 or block.shape[1] != node.arity:
        raise DimensionError(
            f"block has shape {block.shape}, node has {node.arity} states", node=node.name
        )
    if not np.all(np.isfinite(block)):
        bad = int(np.argwhere(~np.isfinite(block))[0][0])
        raise ValidationError("non-finite probability", row=rows[bad], node=node.name)
    low = np.flatnonzero((block < 0.0).any(axis=1) | (block > 1.0).any(axis=1))
    if low.size:
        raise ValidationError("probability outside [0, 1]", row=rows[int(low[0])], node=node.name)
    sums = block.sum(axis=1)
    off = np.flatnonzero(np.abs(sums - 1.0) > tolerance)
    if off.size:
        r = int(off[0])
        raise ValidationError(f"probabilities sum to {sums[r]!r}", row=rows[r], node=node.name)


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """k paired observations: one probability row per parent and one for the effect.

    ``row_numbers`` keeps the 1-based data row each observation came from.
    """

    parents: tuple[NodeSpec, ...]
    effect: NodeSpec
    parent_blocks: tuple[NDArray[np.float64], ...] = field(repr=False)
    effect_block: NDArray[np.float64] = field(repr=False)
    row_numbers: tuple[int, ...] = field(default=(), repr=False)
    sites: tuple[str, ...] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        parents = tuple(self.parents)
        if not parents:
            raise ValidationError("observations need at least one parent")
        if len(self.parent_blocks) != len(parents):
            raise DimensionError(f"{len(self.parent_blocks)} blocks for {len(parents)} parents")
        blocks = tuple(_frozen(b) for b in self.parent_blocks)
        effect_block = _frozen(self.effect_block)
        k = effect_block.shape[0] if effect_block.ndim == 2 else 0
        if k < 1:
            raise ValidationError("observations need at least one row")
        if any(b.ndim != 2 or b.shape[0] != k for b in blocks):
            raise DimensionError("all blocks must share the row count")
        rows = tuple(self.row_numbers) or tuple(range(1, k + 1))
        if len(rows) != k:
            raise DimensionError(f"{len(rows)} row numbers for {k} rows")
        if self.sites is not None and len(self.sites) != k:
            raise DimensionError(f"{len(self.sites)} site ids for {k} rows")

        for block, node in zip(blocks, parents, strict=True):
            _check_block(block, node, rows, DEFAULT_TOLERANCE)
        _check_block(effect_block, self.effect, rows, DEFAULT_TOLERANCE)

        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "parent_blocks", blocks)
        object.__setattr__(self, "effect_block", effect_block)
        object.__setattr__(self, "row_numbers", rows)

    @classmethod
    def from_arrays(
        cls,
        parents: Sequence[NodeSpec],
        effect: NodeSpec,
        parent_blocks: Sequence[ArrayLike],
        effect_block: ArrayLike,
    ) -> "ObservationSet":
        return cls(
            parents=tuple(parents),
            effect=effect,
            parent_blocks=tuple(np.asarray(b, dtype=np.float64) for b in parent_blocks),
            effect_block=np.asarray(effect_block, dtype=np.float64),
        )

    @property
    def row_count(self) -> int:
        return int(self.effect_block.shape[0])

    @property
    def arities(self) -> tuple[int, ...]:
        return tuple(p.arity for p in self.parents)

    @property
    def cause_labels(self) -> tuple[str, ...]:
        return combined_labels([p.labels for p in self.parents])

    def combined_causes(self) -> NDArray[np.float64]:
        """The k×n matrix X of combined parent rows."""
        return combine_rows(self.parent_blocks)

    def all_blocks(self) -> NDArray[np.float64]:
        """All parent blocks and the effect block side by side, k×(Σnᵢ+m)."""
        return np.hstack([*self.parent_blocks, self.effect_block])

    def take(self, indices: Sequence[int]) -> "ObservationSet":
        """Subset of rows, in the given order."""
        index = np.asarray(indices, dtype=np.intp)
        return ObservationSet(
            parents=self.parents,
            effect=self.effect,
            parent_blocks=tuple(b[index] for b in self.parent_blocks),
            effect_block=self.effect_block[index],
            row_numbers=tuple(self.row_numbers[i] for i in index),
            sites=None if self.sites is None else tuple(self.sites[i] for i in index),
        )

    def is_hard(self) -> bool:
        """True if every row of every block is hard evidence."""
        return all(_hard_rows(b).all() for b in (*self.parent_blocks, self.effect_block))


def _hard_rows(block: NDArray[np.float64]) -> NDArray[np.bool_]:
    return ((block == 1.0).sum(axis=1) == 1) & ((block != 0.0).sum(axis=1) == 1)


def distinct_cause_rows(observations: ObservationSet) -> int:
    """Number of distinct combined parent observations."""
    causes = np.hstack(observations.parent_blocks)
    return int(np.unique(causes, axis=0).shape[0])
