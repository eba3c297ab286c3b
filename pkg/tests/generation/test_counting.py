"""Tests for relative-frequency counting and expectation-maximization."""

import math

import numpy as np
import pytest

from cptgen.core.errors import NonConvergenceError, SoftEvidenceError, ValidationError
from cptgen.generation.counting import EmConfig, EmInit, em_cpt, em_log_likelihood, mle_cpt
from cptgen.generation.observations import ObservationSet
from cptgen.probability.vectors import NodeSpec
from tests.conftest import CSF, M, S, ground_truth_cpt, sample_set, soft_set

X = NodeSpec("X", ("x1", "x2"))
Z = NodeSpec("Z", ("z1", "z2"))


def single_parent(causes: list[list[float]], effects: list[list[float]]) -> ObservationSet:
    return ObservationSet.from_arrays((X,), Z, [causes], effects)


class TestMle:
    """Relative frequencies N(z, x) / N(x)."""

    def test_direct_counting(self):
        observations = single_parent(
            [[1, 0], [1, 0], [1, 0], [0, 1]],
            [[1, 0], [1, 0], [0, 1], [0, 1]],
        )
        result = mle_cpt(observations)
        np.testing.assert_allclose(result.cpt.entries, [[2 / 3, 0.0], [1 / 3, 1.0]])
        assert result.unobserved_columns == ()
        assert result.rows_used == 4

    def test_unobserved_cause_is_uniform(self):
        """A cause state without rows gets a uniform column and is flagged."""
        result = mle_cpt(single_parent([[1, 0], [1, 0]], [[1, 0], [0, 1]]))
        np.testing.assert_allclose(result.cpt.entries[:, 1], [0.5, 0.5])
        assert result.unobserved_columns == (1,)

    def test_soft_rows_rejected(self):
        """Soft evidence needs the rounding flag."""
        observations = single_parent([[0.7, 0.3], [1, 0]], [[1, 0], [0, 1]])
        with pytest.raises(SoftEvidenceError, match="row 1, node X"):
            mle_cpt(observations)

    def test_rounding_matches_hand_count(self):
        """Rows certain at .7 round to hard evidence; ambiguous rows are dropped."""
        observations = single_parent(
            [[0.7, 0.3], [0.7, 0.3], [0.3, 0.7], [0.5, 0.5]],
            [[0.3, 0.7], [0.7, 0.3], [0.3, 0.7], [1.0, 0.0]],
        )
        result = mle_cpt(observations, rounding=True)
        np.testing.assert_allclose(result.cpt.entries, [[0.5, 0.0], [0.5, 1.0]])
        assert result.rows_used == 3
        assert result.rows_dropped == 1

    def test_rounding_leaves_nothing(self):
        observations = single_parent([[0.5, 0.5]], [[1.0, 0.0]])
        with pytest.raises(ValidationError):
            mle_cpt(observations, rounding=True)


class TestEm:
    """EM with parent rows as priors and effect rows as fractional weights."""

    def test_agrees_with_mle_on_complete_data(self, rng):
        """200 hard rows: EM converges to the relative frequencies."""
        truth = ground_truth_cpt(rng, CSF, (S, M))
        observations = sample_set(rng, truth, 200, hard_effects=True)
        em = em_cpt(observations)
        mle = mle_cpt(observations)
        np.testing.assert_allclose(em.cpt.entries, mle.cpt.entries, atol=1e-6)
        assert em.converged
        history = np.array(em.loglik_history)
        assert np.all(np.diff(history) >= -1e-12)

    def test_log_likelihood_non_decreasing_on_soft_data(self, rng):
        observations = soft_set(rng, (S, M), CSF, 60)
        em = em_cpt(observations, EmConfig(epsilon=1e-9, max_iterations=2000), raise_on_nonconvergence=False)
        history = np.array(em.loglik_history)
        assert np.all(np.diff(history) >= -1e-10)
        assert em.final_loglik == history[-1]
        assert em.iterations == len(history) - 1

    def test_single_row_converges_in_two_steps(self):
        """Uniform start, one row x1→z1: the first step settles the column."""
        em = em_cpt(single_parent([[1, 0]], [[1, 0]]))
        assert em.iterations == 2
        assert em.loglik_history[0] == pytest.approx(math.log(0.5))
        assert em.final_loglik == 0.0
        np.testing.assert_allclose(em.cpt.entries, [[1.0, 0.5], [0.0, 0.5]])

    def test_iteration_cap(self, rng):
        """One iteration on rich data stops short with the partial result attached."""
        truth = ground_truth_cpt(rng, CSF, (S, M))
        observations = sample_set(rng, truth, 200, hard_effects=True)
        config = EmConfig(epsilon=1e-6, max_iterations=1)
        with pytest.raises(NonConvergenceError) as excinfo:
            em_cpt(observations, config)
        partial = excinfo.value.partial
        assert partial.iterations == 1
        assert not partial.converged
        result = em_cpt(observations, config, raise_on_nonconvergence=False)
        assert not result.converged

    def test_seeded_restarts_are_deterministic(self, rng):
        observations = soft_set(rng, (S, M), CSF, 40)
        config = EmConfig(init=EmInit.RANDOM, seed=7, restarts=3)
        first = em_cpt(observations, config, raise_on_nonconvergence=False)
        second = em_cpt(observations, config, raise_on_nonconvergence=False)
        np.testing.assert_array_equal(first.cpt.entries, second.cpt.entries)
        assert first.restart == second.restart

    def test_best_restart_wins(self, rng):
        observations = soft_set(rng, (S, M), CSF, 40)
        best = em_cpt(observations, EmConfig(init=EmInit.RANDOM, seed=3, restarts=4), raise_on_nonconvergence=False)
        for restarts in (1, 2, 3):
            config = EmConfig(init=EmInit.RANDOM, seed=3, restarts=restarts)
            fewer = em_cpt(observations, config, raise_on_nonconvergence=False)
            assert best.final_loglik >= fewer.final_loglik

    def test_log_likelihood_skips_zero_weights(self):
        theta = np.array([[1.0, 0.5], [0.0, 0.5]])
        causes = np.array([[1.0, 0.0]])
        effects = np.array([[1.0, 0.0]])
        assert em_log_likelihood(theta, causes, effects) == 0.0

    @pytest.mark.parametrize(
        "kwargs",
        [{"epsilon": 0.0}, {"max_iterations": 0}, {"restarts": 0}],
    )
    def test_invalid_config(self, kwargs):
        with pytest.raises(ValidationError):
            EmConfig(**kwargs)
