"""Distances between two CPTs over the same cause and effect states."""

import math

import numpy as np
from scipy.special import rel_entr

from cptgen.core.errors import DimensionError
from cptgen.probability.tables import Cpt
from cptgen.probability.vectors import ProbVector


def _check_shapes(c: Cpt, c_hat: Cpt) -> None:
    if c.shape != c_hat.shape:
        raise DimensionError(f"CPT shapes {c.shape} and {c_hat.shape} differ")


def _check_weights(c: Cpt, x: ProbVector) -> None:
    if len(x) != c.shape[1]:
        raise DimensionError(f"weight vector has {len(x)} states, CPTs have {c.shape[1]} columns")


def cpt_shift_error(c: Cpt, c_hat: Cpt) -> float:
    """Mean over columns of the half-L1 distance between matching columns."""
    _check_shapes(c, c_hat)
    n = c.shape[1]
    value = float(np.abs(c.entries - c_hat.entries).sum() / (2.0 * n))
    return min(1.0, value)


def cpt_kl_divergence(c: Cpt, c_hat: Cpt, x: ProbVector) -> float:
    """Σ_j x_j Σ_i c_ij ln(c_ij / ĉ_ij), columns weighted by the cause vector.

    Terms with c_ij = 0 vanish. Columns with zero weight are skipped. Returns
    ``math.inf`` when a weighted column has c_ij > 0 where ĉ_ij = 0.
    """
    _check_shapes(c, c_hat)
    _check_weights(c, x)
    weighted = x.values > 0.0
    per_column = rel_entr(c.entries[:, weighted], c_hat.entries[:, weighted]).sum(axis=0)
    if not np.all(np.isfinite(per_column)):
        return math.inf
    # Gibbs: each column term is non-negative up to rounding
    per_column = np.maximum(per_column, 0.0)
    return float(x.values[weighted] @ per_column)


def cpt_euclidean(c: Cpt, c_hat: Cpt, x: ProbVector) -> float:
    """Σ_j x_j Σ_i (c_ij − ĉ_ij)², columns weighted by the cause vector."""
    _check_shapes(c, c_hat)
    _check_weights(c, x)
    squared = ((c.entries - c_hat.entries) ** 2).sum(axis=0)
    return float(x.values @ squared)
