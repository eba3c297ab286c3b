"""Mapping an unconstrained CPT basis into the probability space.

Two per-column repairs are offered. Boundary limitation clamps each entry to
[0, 1] and renormalizes; potential surge shifts a column with negative
entries up by its minimum and renormalizes.
"""

from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import structlog
from numpy.typing import NDArray

from cptgen.core.metrics import metrics
from cptgen.generation.regression import CptBasis
from cptgen.probability.tables import Cpt

logger = structlog.get_logger("cptgen")


class RepairMethod(StrEnum):
    BOUNDARY_LIMITATION = "boundary-limitation"
    POTENTIAL_SURGE = "potential-surge"


@dataclass(frozen=True)
class RepairResult:
    """A repaired CPT and what the repair did to the basis (0-based column indices)."""

    cpt: Cpt
    method: RepairMethod
    repaired_columns: tuple[int, ...]
    surge_fallback_columns: tuple[int, ...]
    uniform_columns: tuple[int, ...]
    max_change: float
    column_sum_error: float


def _uniform(size: int) -> NDArray[np.float64]:
    return np.full(size, 1.0 / size)


def _surge_column(column: NDArray[np.float64]) -> tuple[NDArray[np.float64], bool]:
    """Shift-and-normalize one column; the flag reports a uniform fallback."""
    if np.any(column < 0.0):
        shifted = column - column.min()
    else:
        shifted = column
    total = shifted.sum()
    if total <= 0.0:
        return _uniform(column.size), True
    return shifted / total, False


def _limit_column(column: NDArray[np.float64]) -> tuple[NDArray[np.float64], bool]:
    clamped = np.clip(column, 0.0, 1.0)
    total = clamped.sum()
    if total <= 0.0:
        return _uniform(column.size), True
    return clamped / total, False


def _column_sum_error(entries: NDArray[np.float64]) -> float:
    clamped = np.clip(entries, 0.0, 1.0)
    return float(np.abs(clamped.sum(axis=0) - 1.0).mean())


def repair_basis(basis: CptBasis, method: RepairMethod | str) -> RepairResult:
    """Repair every column of ``basis`` and report what changed.

    Boundary limitation hands columns whose entries are all negative to the
    potential surge repair. Columns that collapse to zero mass become uniform.
    """
    method = RepairMethod(method)
    entries = basis.entries
    n = entries.shape[1]
    repaired = np.empty_like(entries)
    fallback: list[int] = []
    uniform: list[int] = []

    for j in range(n):
        column = entries[:, j]
        if method is RepairMethod.BOUNDARY_LIMITATION and np.all(column < 0.0):
            new, degenerate = _surge_column(column)
            fallback.append(j)
        elif method is RepairMethod.BOUNDARY_LIMITATION:
            new, degenerate = _limit_column(column)
        else:
            new, degenerate = _surge_column(column)
        if degenerate:
            uniform.append(j)
        repaired[:, j] = new

    repaired = np.clip(repaired, 0.0, 1.0)
    changed = np.abs(repaired - entries)
    repaired_columns = tuple(int(j) for j in np.flatnonzero(changed.max(axis=0) > 1e-12))
    out_of_range = ((entries < 0.0) | (entries > 1.0)).any(axis=0)

    if fallback:
        logger.info(
            "Boundary limitation fell back to potential surge",
            columns=[basis.cause_labels[j] for j in fallback],
        )
    metrics.record_repair(method.value, "out_of_range", int(out_of_range.sum()))
    metrics.record_repair(method.value, "surge_fallback", len(fallback))
    metrics.record_repair(method.value, "uniform", len(uniform))

    cpt = Cpt(
        effect_labels=basis.effect_labels,
        cause_labels=basis.cause_labels,
        entries=repaired,
        parents=basis.parents,
        effect_name=basis.effect_name,
    )
    return RepairResult(
        cpt=cpt,
        method=method,
        repaired_columns=repaired_columns,
        surge_fallback_columns=tuple(fallback),
        uniform_columns=tuple(uniform),
        max_change=float(changed.max()) if changed.size else 0.0,
        column_sum_error=_column_sum_error(entries),
    )


def boundary_limitation(basis: CptBasis) -> Cpt:
    """Clamp each column to [0, 1] and renormalize it."""
    return repair_basis(basis, RepairMethod.BOUNDARY_LIMITATION).cpt


def potential_surge(basis: CptBasis) -> Cpt:
    """Shift each column with a negative entry into the positive range and renormalize it."""
    return repair_basis(basis, RepairMethod.POTENTIAL_SURGE).cpt
