"""Hard and soft evidence on the parents of a converging subnet."""

from collections.abc import Sequence
from dataclasses import dataclass

from cptgen.core.errors import DimensionError, ValidationError
from cptgen.probability.tables import Cpt, predict_effects
from cptgen.probability.vectors import ProbVector, combine


@dataclass(frozen=True)
class Evidence:
    """Evidence on one parent: a state index (hard) or a distribution (soft)."""

    node: int
    state: int | None = None
    soft: ProbVector | None = None

    def __post_init__(self) -> None:
        if (self.state is None) == (self.soft is None):
            raise ValidationError("evidence is either hard (state) or soft (vector)")

    @classmethod
    def hard(cls, node: int, state: int) -> "Evidence":
        return cls(node=node, state=state)

    @classmethod
    def soft_vector(cls, node: int, vector: ProbVector) -> "Evidence":
        return cls(node=node, soft=vector)

    @property
    def is_hard(self) -> bool:
        return self.state is not None

    def as_vector(self, labels: Sequence[str]) -> ProbVector:
        """Express the evidence as a probability vector over ``labels``."""
        if self.state is not None:
            return ProbVector.hard(labels, self.state)
        assert self.soft is not None
        if len(self.soft) != len(labels):
            raise DimensionError(
                f"soft evidence has {len(self.soft)} states, parent has {len(labels)}",
                node=str(self.node),
            )
        return ProbVector(tuple(labels), self.soft.values)


def effects_from_evidence(cpt: Cpt, evidence: Sequence[Evidence]) -> ProbVector:
    """Effect probabilities from evidence on every parent.

    All-hard evidence selects exactly one CPT column; otherwise the result is
    the linear combination of columns weighted by the combined evidence.

    Raises:
        DimensionError: If the CPT has no arity profile, a parent lacks evidence,
            or an evidence arity disagrees with the profile.
    """
    if cpt.arities is None:
        raise DimensionError("CPT has no parent arity profile")
    parents = cpt.parent_specs()
    by_node = {e.node: e for e in evidence}
    if len(by_node) != len(evidence):
        raise DimensionError("more than one evidence item for a parent")
    missing = [p.name for k, p in enumerate(parents) if k not in by_node]
    if missing or len(by_node) != len(parents):
        raise DimensionError(f"evidence required on every parent, missing {missing}")

    ordered = [by_node[k] for k in range(len(parents))]
    for item, parent in zip(ordered, parents, strict=True):
        if item.state is not None and not 0 <= item.state < parent.arity:
            raise DimensionError(
                f"state index {item.state} outside parent arity {parent.arity}", node=parent.name
            )
        if item.soft is not None and len(item.soft) != parent.arity:
            raise DimensionError(
                f"soft evidence has {len(item.soft)} states, parent has {parent.arity}",
                node=parent.name,
            )

    if all(item.is_hard for item in ordered):
        index = 0
        for item, parent in zip(ordered, parents, strict=True):
            assert item.state is not None
            index = index * parent.arity + item.state
        return cpt.column(index)

    vectors = [item.as_vector(p.labels) for item, p in zip(ordered, parents, strict=True)]
    return predict_effects(cpt, combine(vectors))

