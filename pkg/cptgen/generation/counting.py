"""Counting-based CPT estimation: maximum likelihood and expectation-maximization."""

from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
import structlog
from numpy.typing import NDArray

from cptgen.core.errors import NonConvergenceError, SoftEvidenceError, ValidationError
from cptgen.core.metrics import metrics
from cptgen.generation.observations import ObservationSet, _hard_rows
from cptgen.probability.tables import Cpt
from cptgen.probability.vectors import combine_rows

logger = structlog.get_logger("cptgen")


def _to_cpt(observations: ObservationSet, entries: NDArray[np.float64]) -> Cpt:
    return Cpt(
        effect_labels=observations.effect.labels,
        cause_labels=observations.cause_labels,
        entries=np.clip(entries, 0.0, 1.0),
        parents=observations.parents,
        effect_name=observations.effect.name,
    )


@dataclass(frozen=True)
class MleResult:
    """Relative-frequency CPT with the columns no row ever reached."""

    cpt: Cpt
    unobserved_columns: tuple[int, ...]
    rows_used: int
    rows_dropped: int


def _round_block(block: NDArray[np.float64]) -> NDArray[np.float64]:
    # Round half up, so a certainty of exactly .5 counts as the state
    return np.floor(block + 0.5)


def mle_cpt(observations: ObservationSet, rounding: bool = False) -> MleResult:
    """Relative frequencies P(z_i|x_j) = N(z_i, x_j) / N(x_j).

    Args:
        observations: Rows of hard evidence.
        rounding: Round soft rows to the nearest integer first; rows that do not
            round to exactly one state per node are dropped.

    Raises:
        SoftEvidenceError: If a row is soft and ``rounding`` is not set.
        ValidationError: If rounding leaves no usable row.
    """
    blocks = [*observations.parent_blocks, observations.effect_block]
    names = [p.name for p in observations.parents] + [observations.effect.name]

    if not rounding:
        for block, name in zip(blocks, names, strict=True):
            soft = np.flatnonzero(~_hard_rows(block))
            if soft.size:
                raise SoftEvidenceError(
                    "soft evidence needs rounding for relative-frequency counting",
                    row=observations.row_numbers[int(soft[0])],
                    node=name,
                )
        keep = np.ones(observations.row_count, dtype=bool)
    else:
        blocks = [_round_block(b) for b in blocks]
        keep = np.logical_and.reduce([_hard_rows(b) for b in blocks])
        dropped = int((~keep).sum())
        if dropped:
            logger.warning("Rows did not round to a single state and were dropped", rows=dropped)
        if not keep.any():
            raise ValidationError("no observation rounds to hard evidence")

    causes = combine_rows([b[keep] for b in blocks[:-1]])
    effects = blocks[-1][keep]
    joint_counts = effects.T @ causes
    cause_counts = joint_counts.sum(axis=0)

    m, n = joint_counts.shape
    entries = np.full((m, n), 1.0 / m)
    seen = cause_counts > 0
    entries[:, seen] = joint_counts[:, seen] / cause_counts[seen]
    unobserved = tuple(int(j) for j in np.flatnonzero(~seen))
    if unobserved:
        logger.info(
            "Cause states without occurrences set uniform",
            columns=[observations.cause_labels[j] for j in unobserved],
        )

    return MleResult(
        cpt=_to_cpt(observations, entries),
        unobserved_columns=unobserved,
        rows_used=int(keep.sum()),
        rows_dropped=int((~keep).sum()),
    )


class EmInit(StrEnum):
    UNIFORM = "uniform"
    RANDOM = "random"


@dataclass(frozen=True)
class EmConfig:
    """EM stopping rule, initialization and multi-start settings.

    With ``init=RANDOM`` every start draws Dirichlet(1) columns from ``seed``;
    with ``init=UNIFORM`` the first start is uniform and further restarts are random.
    """

    epsilon: float = 1e-6
    max_iterations: int = 1000
    init: EmInit = EmInit.UNIFORM
    seed: int = 0
    restarts: int = 1

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iterations < 1:
            raise ValidationError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if self.restarts < 1:
            raise ValidationError(f"restarts must be at least 1, got {self.restarts}")


@dataclass(frozen=True)
class EmResult:
    """Best EM run: CPT, iteration count, final log-likelihood and its history."""

    cpt: Cpt
    iterations: int
    final_loglik: float
    converged: bool
    loglik_history: tuple[float, ...] = field(repr=False)
    restart: int = 0


def em_log_likelihood(theta: NDArray[np.float64], causes: NDArray[np.float64], effects: NDArray[np.float64]) -> float:
    """L(θ) = Σ_d Σ_i z_di ln(Σ_j x_dj θ_ij), with 0·ln(·) taken as 0."""
    predicted = causes @ theta.T
    mask = effects > 0.0
    return float(np.sum(effects[mask] * np.log(predicted[mask])))


def _em_step(theta: NDArray[np.float64], causes: NDArray[np.float64], effects: NDArray[np.float64]) -> NDArray[np.float64]:
    # E-step: r_dij = x_dj θ_ij / Σ_j' x_dj' θ_ij', weighted by z_di
    predicted = causes @ theta.T
    ratio = np.divide(effects, predicted, out=np.zeros_like(effects), where=predicted > 0.0)
    expected = theta * (ratio.T @ causes)
    # M-step: normalize the expected counts per cause column
    totals = expected.sum(axis=0)
    m = theta.shape[0]
    new = np.full_like(theta, 1.0 / m)
    seen = totals > 0.0
    new[:, seen] = expected[:, seen] / totals[seen]
    return new


def _run_em(
    theta: NDArray[np.float64],
    causes: NDArray[np.float64],
    effects: NDArray[np.float64],
    config: EmConfig,
) -> tuple[NDArray[np.float64], list[float], bool]:
    history = [em_log_likelihood(theta, causes, effects)]
    for _ in range(config.max_iterations):
        theta = _em_step(theta, causes, effects)
        history.append(em_log_likelihood(theta, causes, effects))
        if abs(history[-1] - history[-2]) <= config.epsilon:
            return theta, history, True
    return theta, history, False


def em_cpt(
    observations: ObservationSet,
    config: EmConfig | None = None,
    raise_on_nonconvergence: bool = True,
) -> EmResult:
    """Expectation-maximization over soft or hard observations.

    Parent rows act as priors over the combined cause and effect rows as
    fractional case weights. The best start by final log-likelihood wins;
    ties keep the earlier start.

    Raises:
        NonConvergenceError: If the best start hit ``max_iterations`` before the
            log-likelihood change fell to ``epsilon``. The result is on ``partial``.
            With ``raise_on_nonconvergence=False`` it is returned with
            ``converged=False`` instead.
    """
    config = config or EmConfig()
    causes = observations.combined_causes()
    effects = observations.effect_block
    m, n = observations.effect.arity, causes.shape[1]
    rng = np.random.default_rng(config.seed)

    best: EmResult | None = None
    for start in range(config.restarts):
        if config.init is EmInit.UNIFORM and start == 0:
            theta = np.full((m, n), 1.0 / m)
        else:
            theta = rng.dirichlet(np.ones(m), size=n).T
        theta, history, converged = _run_em(theta, causes, effects, config)
        metrics.record_em_run(len(history) - 1)
        logger.debug(
            "EM start finished",
            start=start,
            iterations=len(history) - 1,
            loglik=history[-1],
            converged=converged,
        )
        result = EmResult(
            cpt=_to_cpt(observations, theta),
            iterations=len(history) - 1,
            final_loglik=history[-1],
            converged=converged,
            loglik_history=tuple(history),
            restart=start,
        )
        if best is None or result.final_loglik > best.final_loglik:
            best = result

    assert best is not None
    if not best.converged:
        logger.warning(
            "EM reached the iteration cap without converging",
            max_iterations=config.max_iterations,
            epsilon=config.epsilon,
        )
        if raise_on_nonconvergence:
            raise NonConvergenceError(
                f"EM did not converge within {config.max_iterations} iterations "
                f"(epsilon {config.epsilon})",
                partial=best,
            )
    return best
