"""Goodness of predicted effect probabilities against observed ones."""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from cptgen.core.errors import DimensionError
from cptgen.probability.vectors import ProbVector


def _pair(z_test: ArrayLike, z_hat: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    test = np.atleast_2d(np.asarray(z_test, dtype=np.float64))
    hat = np.atleast_2d(np.asarray(z_hat, dtype=np.float64))
    if test.shape != hat.shape:
        raise DimensionError(f"effect matrices have shapes {test.shape} and {hat.shape}")
    if test.shape[0] < 1:
        raise DimensionError("effect matrices need at least one row")
    return test, hat


def effect_shift_error(z: ProbVector, z_hat: ProbVector) -> float:
    """Absolute effect observation error: half the L1 distance, in [0, 1]."""
    if len(z) != len(z_hat):
        raise DimensionError(f"effect vectors have {len(z)} and {len(z_hat)} states")
    return float(min(1.0, 0.5 * np.abs(z.values - z_hat.values).sum()))


def observation_errors(z_test: ArrayLike, z_hat: ArrayLike) -> NDArray[np.float64]:
    """Row-wise absolute effect observation errors of two k×m matrices."""
    test, hat = _pair(z_test, z_hat)
    return np.minimum(1.0, 0.5 * np.abs(test - hat).sum(axis=1))


def state_errors(z_test: ArrayLike, z_hat: ArrayLike) -> tuple[tuple[float, ...], float]:
    """Mean absolute error per effect state and the total average shift error.

    Returns:
        (s_1, …, s_m) and their mean.
    """
    test, hat = _pair(z_test, z_hat)
    per_state = np.minimum(1.0, np.abs(test - hat).mean(axis=0))
    return tuple(float(s) for s in per_state), float(per_state.mean())


def _unique_argmax(rows: NDArray[np.float64]) -> NDArray[np.intp]:
    """Argmax per row, or -1 where the maximum is shared."""
    top = rows.max(axis=1, keepdims=True)
    ties = (rows == top).sum(axis=1) > 1
    return np.where(ties, -1, rows.argmax(axis=1))


def diagnostic_goodness(z_test: ArrayLike, z_hat: ArrayLike) -> tuple[float, float]:
    """Fraction of rows whose most probable effect states agree.

    A tied maximum on either side counts as disagreement.

    Returns:
        Diagnostic goodness g and diagnostic error 1 − g.
    """
    test, hat = _pair(z_test, z_hat)
    observed = _unique_argmax(test)
    predicted = _unique_argmax(hat)
    agree = (observed >= 0) & (observed == predicted)
    goodness = float(agree.sum()) / test.shape[0]
    return goodness, 1.0 - goodness
