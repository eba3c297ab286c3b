"""Multinomial logit over combined causes, fitted by damped Newton-Raphson.

Effect probability rows enter the likelihood as fractional case weights, so
soft effect evidence needs no rounding. The last effect state is the
reference category with coefficients fixed at zero.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import structlog
from numpy.typing import NDArray
from scipy.special import logsumexp, softmax

from cptgen.core.errors import DimensionError, NonConvergenceError, ValidationError
from cptgen.generation.observations import ObservationSet
from cptgen.probability.vectors import ProbVector, _frozen

logger = structlog.get_logger("cptgen")


@dataclass(frozen=True, eq=False)
class LogitModel:
    """Coefficients of a multinomial logit with reference state m.

    Row k of ``coefficients`` holds (b_k0, b_k1, …, b_kn) for effect state k < m.
    """

    effect_labels: tuple[str, ...]
    cause_labels: tuple[str, ...]
    coefficients: NDArray[np.float64] = field(repr=False)
    iterations: int = 0
    gradient_norm: float = 0.0

    def __post_init__(self) -> None:
        coefficients = _frozen(self.coefficients)
        expected = (len(self.effect_labels) - 1, len(self.cause_labels) + 1)
        if coefficients.shape != expected:
            raise DimensionError(f"coefficients have shape {coefficients.shape}, expected {expected}")
        if not np.all(np.isfinite(coefficients)):
            raise ValidationError("logit coefficients must be finite")
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def reference_state(self) -> int:
        return len(self.effect_labels) - 1


def _design(causes: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.hstack([np.ones((causes.shape[0], 1)), causes])


def _logits(coefficients: NDArray[np.float64], design: NDArray[np.float64]) -> NDArray[np.float64]:
    """k×m logits with the reference column pinned at zero."""
    scores = design @ coefficients.T
    return np.hstack([scores, np.zeros((design.shape[0], 1))])


def penalized_log_likelihood(
    coefficients: NDArray[np.float64],
    causes: NDArray[np.float64],
    effects: NDArray[np.float64],
    reg: float,
) -> float:
    """Σ_r Σ_i z_ri ln p_ri(b) − (reg/2)·‖slopes‖², intercepts unpenalized."""
    logits = _logits(coefficients, _design(causes))
    log_p = logits - logsumexp(logits, axis=1, keepdims=True)
    slopes = coefficients[:, 1:]
    return float(np.sum(effects * log_p) - 0.5 * reg * np.sum(slopes * slopes))


def penalized_gradient(
    coefficients: NDArray[np.float64],
    causes: NDArray[np.float64],
    effects: NDArray[np.float64],
    reg: float,
) -> NDArray[np.float64]:
    """Analytic gradient of ``penalized_log_likelihood``, shaped like the coefficients."""
    design = _design(causes)
    p = softmax(_logits(coefficients, design), axis=1)
    weights = effects.sum(axis=1, keepdims=True)
    residual = effects - weights * p
    gradient = residual[:, :-1].T @ design
    gradient[:, 1:] -= reg * coefficients[:, 1:]
    return gradient


def _hessian(
    coefficients: NDArray[np.float64],
    design: NDArray[np.float64],
    weights: NDArray[np.float64],
    reg: float,
) -> NDArray[np.float64]:
    """Negative Hessian over the flattened (m−1)·(n+1) coefficients."""
    p = softmax(_logits(coefficients, design), axis=1)[:, :-1]
    classes, width = coefficients.shape
    neg_hessian = np.empty((classes * width, classes * width))
    for a in range(classes):
        for b in range(classes):
            w = weights * p[:, a] * ((a == b) - p[:, b])
            neg_hessian[a * width:(a + 1) * width, b * width:(b + 1) * width] = (design * w[:, None]).T @ design
    penalty = np.tile(np.r_[0.0, np.full(width - 1, reg)], classes)
    return neg_hessian + np.diag(penalty)


def _newton_direction(neg_hessian: NDArray[np.float64], gradient: NDArray[np.float64]) -> NDArray[np.float64]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        try:
            return scipy.linalg.solve(neg_hessian, gradient, assume_a="sym")
        except np.linalg.LinAlgError:
            return np.linalg.lstsq(neg_hessian, gradient, rcond=None)[0]


def fit_multinomial_logit(
    observations: ObservationSet,
    reg: float = 1e-8,
    max_iter: int = 100,
    tol: float = 1e-8,
    max_halvings: int = 30,
) -> LogitModel:
    """Maximize the soft-target log-likelihood by Newton-Raphson with step halving.

    Args:
        observations: Training rows; parents are combined into the covariates.
        reg: Ridge penalty on the slopes.
        max_iter: Newton step budget.
        tol: Target Euclidean norm of the penalized gradient.
        max_halvings: Step halvings allowed per Newton step before giving up.

    Raises:
        NonConvergenceError: If the budget runs out or no halved step keeps the
            likelihood from decreasing. The last iterate is on ``partial``.
    """
    if reg < 0:
        raise ValidationError(f"reg must be non-negative, got {reg}")
    causes = observations.combined_causes()
    effects = observations.effect_block
    design = _design(causes)
    weights = effects.sum(axis=1)
    m, n = effects.shape[1], causes.shape[1]
    labels = (observations.effect.labels, observations.cause_labels)

    if m == 1:
        return LogitModel(*labels, coefficients=np.zeros((0, n + 1)))

    coefficients = np.zeros((m - 1, n + 1))
    loglik = penalized_log_likelihood(coefficients, causes, effects, reg)

    for iteration in range(max_iter + 1):
        gradient = penalized_gradient(coefficients, causes, effects, reg)
        norm = float(np.linalg.norm(gradient))
        if norm <= tol:
            logger.debug("Logit fit converged", iterations=iteration, gradient_norm=norm, loglik=loglik)
            return LogitModel(*labels, coefficients=coefficients, iterations=iteration, gradient_norm=norm)
        if iteration == max_iter:
            break

        step = _newton_direction(_hessian(coefficients, design, weights, reg), gradient.ravel())
        step = step.reshape(coefficients.shape)
        scale = 1.0
        for _ in range(max_halvings + 1):
            candidate = coefficients + scale * step
            candidate_loglik = penalized_log_likelihood(candidate, causes, effects, reg)
            if np.isfinite(candidate_loglik) and candidate_loglik >= loglik - 1e-12 * max(1.0, abs(loglik)):
                break
            scale /= 2.0
        else:
            logger.warning("Step halving exhausted", iteration=iteration, gradient_norm=norm)
            raise NonConvergenceError(
                f"no ascent step after {max_halvings} halvings (gradient norm {norm:.3g})",
                partial=LogitModel(*labels, coefficients=coefficients, iterations=iteration, gradient_norm=norm),
            )
        coefficients, loglik = candidate, candidate_loglik

    raise NonConvergenceError(
        f"Newton-Raphson did not reach gradient norm {tol} in {max_iter} steps (at {norm:.3g})",
        partial=LogitModel(*labels, coefficients=coefficients, iterations=max_iter, gradient_norm=norm),
    )


def logit_predict(model: LogitModel, cause: ProbVector) -> ProbVector:
    """Effect distribution of the fitted logit at one combined cause vector.

    Raises:
        DimensionError: If the cause length differs from the model's cause count.
    """
    if len(cause) != len(model.cause_labels):
        raise DimensionError(
            f"cause vector has {len(cause)} states, model expects {len(model.cause_labels)}"
        )
    logits = _logits(model.coefficients, _design(cause.values[None, :]))[0]
    return ProbVector(model.effect_labels, softmax(logits))
