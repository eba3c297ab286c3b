"""Shared fixtures: published CPTs, worked examples and seeded samplers."""

import numpy as np
import pytest

from cptgen.core.logging import configure_logging
from cptgen.generation.observations import ObservationSet
from cptgen.probability.tables import Cpt
from cptgen.probability.vectors import NodeSpec

# Burnt forest GIS CPT, boundary limitation (percent, rows d1..d5, columns e1r1..e3r3)
TABLE1_PERCENT = [
    [11.18, 1.62, 22.58, 4.61, 14.77, 13.09, 16.35, 0.00, 9.30],
    [34.07, 0.00, 53.50, 1.91, 28.70, 18.59, 5.37, 10.86, 7.99],
    [44.70, 7.86, 8.62, 76.22, 41.67, 53.02, 75.84, 9.43, 55.73],
    [0.00, 71.72, 1.73, 8.73, 6.81, 11.84, 0.00, 47.95, 25.47],
    [10.06, 18.80, 13.57, 8.53, 8.05, 3.46, 2.45, 31.76, 1.50],
]

# Same network, multinomial logit extraction
TABLE2_PERCENT = [
    [13.9, 0.1, 23.3, 4.5, 23.0, 10.6, 14.1, 1.8, 8.9],
    [28.4, 0.4, 50.6, 7.6, 22.0, 19.5, 8.2, 5.2, 9.4],
    [47.6, 0.8, 10.9, 70.7, 40.4, 55.5, 70.2, 10.6, 51.2],
    [2.3, 96.9, 4.5, 7.8, 7.3, 10.4, 5.9, 28.0, 26.6],
    [7.9, 1.8, 10.7, 9.4, 7.4, 4.0, 1.7, 54.4, 3.9],
]

# Military effects, expert CPT (rows achieved, at risk, not achieved)
SME_PERCENT = [
    [95.0, 85.0, 70.0, 50.0, 50.0, 25.0, 5.0, 3.0, 2.0],
    [3.0, 11.0, 20.0, 35.0, 30.0, 35.0, 5.0, 4.0, 3.0],
    [2.0, 4.0, 10.0, 15.0, 20.0, 40.0, 90.0, 93.0, 95.0],
]

# Military effects, regression with potential surge (one row per cause state)
SURGE_PERCENT_BY_CAUSE = [
    [49.1, 50.9, 0.0],
    [84.2, 0.0, 15.8],
    [0.0, 59.4, 40.6],
    [0.0, 42.3, 57.7],
    [0.0, 60.3, 39.7],
    [60.8, 0.0, 39.2],
    [70.0, 0.0, 30.0],
    [0.0, 20.8, 79.2],
    [23.8, 30.0, 46.1],
]

E = NodeSpec("E", ("e1", "e2", "e3"))
R = NodeSpec("R", ("r1", "r2", "r3"))
D = NodeSpec("D", ("d1", "d2", "d3", "d4", "d5"))
S = NodeSpec("S", ("good", "critical", "bad"))
M = NodeSpec("M", ("high", "parity", "low"))
CSF = NodeSpec("CSF", ("achieved", "at risk", "not achieved"))


def normalized_columns(percent: list[list[float]]) -> np.ndarray:
    """Published percentages as a column-stochastic matrix; rounding leaves some columns at 99.99%."""
    table = np.asarray(percent, dtype=np.float64) / 100.0
    return table / table.sum(axis=0)


def canonical_set(cpt: Cpt, repeats: int = 1) -> ObservationSet:
    """Every combined cause state as hard evidence, ``repeats`` times, with its exact CPT column."""
    parents = cpt.parent_specs()
    arities = tuple(p.arity for p in parents)
    n = cpt.shape[1]
    states = np.repeat(np.arange(n), repeats)
    per_parent = np.unravel_index(states, arities)
    blocks = [np.eye(p.arity)[index] for p, index in zip(parents, per_parent, strict=True)]
    return ObservationSet.from_arrays(parents, cpt.effect, blocks, cpt.entries.T[states])


def random_cpt(rng: np.random.Generator, effect: NodeSpec, parents: tuple[NodeSpec, ...]) -> Cpt:
    n = int(np.prod([p.arity for p in parents]))
    entries = rng.dirichlet(np.ones(effect.arity), size=n).T
    return Cpt.from_columns(entries, effect.labels, parents, effect_name=effect.name)


def ground_truth_cpt(rng: np.random.Generator, effect: NodeSpec, parents: tuple[NodeSpec, ...]) -> Cpt:
    """Columns 0.7·one-hot + 0.3·Dirichlet(1): a clear most probable state per column."""
    n = int(np.prod([p.arity for p in parents]))
    dominant = np.eye(effect.arity)[rng.integers(effect.arity, size=n)].T
    entries = 0.7 * dominant + 0.3 * rng.dirichlet(np.ones(effect.arity), size=n).T
    return Cpt.from_columns(entries, effect.labels, parents, effect_name=effect.name)


def perturb(rng: np.random.Generator, column: np.ndarray, radius: float) -> np.ndarray:
    """Zero-sum noise of L1 norm at most ``radius``, clipped and renormalized."""
    noise = rng.uniform(-1.0, 1.0, size=column.size)
    noise -= noise.mean()
    norm = np.abs(noise).sum()
    if norm > 0:
        noise *= rng.uniform(0.0, radius) / norm
    noisy = np.clip(column + noise, 0.0, None)
    return noisy / noisy.sum()


def sample_set(
    rng: np.random.Generator,
    cpt: Cpt,
    k: int,
    radius: float = 0.0,
    hard_effects: bool = False,
) -> ObservationSet:
    """k rows with hard causes drawn uniformly; effects are noisy true columns or sampled states."""
    parents = cpt.parent_specs()
    arities = tuple(p.arity for p in parents)
    states = rng.integers(cpt.shape[1], size=k)
    per_parent = np.unravel_index(states, arities)
    blocks = [np.eye(p.arity)[index] for p, index in zip(parents, per_parent, strict=True)]
    columns = cpt.entries.T[states]
    if hard_effects:
        drawn = [rng.choice(cpt.shape[0], p=col / col.sum()) for col in columns]
        effects = np.eye(cpt.shape[0])[drawn]
    else:
        effects = np.array([perturb(rng, col, radius) for col in columns])
    return ObservationSet.from_arrays(parents, cpt.effect, blocks, effects)


def soft_set(rng: np.random.Generator, parents: tuple[NodeSpec, ...], effect: NodeSpec, k: int) -> ObservationSet:
    """k rows of Dirichlet soft evidence on every node."""
    blocks = [rng.dirichlet(np.ones(p.arity), size=k) for p in parents]
    effects = rng.dirichlet(np.ones(effect.arity), size=k)
    return ObservationSet.from_arrays(parents, effect, blocks, effects)


@pytest.fixture(autouse=True)
def stderr_logging() -> None:
    """Route library logging to standard error at the command line default level."""
    configure_logging("WARNING")


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator; every test draws its own deterministic stream."""
    return np.random.default_rng(20240611)


@pytest.fixture
def table1_cpt() -> Cpt:
    return Cpt.from_columns(normalized_columns(TABLE1_PERCENT), D.labels, (E, R), effect_name="D")


@pytest.fixture
def table2_cpt() -> Cpt:
    return Cpt.from_columns(normalized_columns(TABLE2_PERCENT), D.labels, (E, R), effect_name="D")


@pytest.fixture
def sme_cpt() -> Cpt:
    return Cpt.from_columns(normalized_columns(SME_PERCENT), CSF.labels, (S, M), effect_name="CSF")


@pytest.fixture
def surge_cpt() -> Cpt:
    by_column = np.asarray(SURGE_PERCENT_BY_CAUSE).T.tolist()
    return Cpt.from_columns(normalized_columns(by_column), CSF.labels, (S, M), effect_name="CSF")


@pytest.fixture
def example1() -> tuple[np.ndarray, np.ndarray]:
    """Observed and predicted effects of three observations with one tied prediction.

    As published the third pair agrees on its most probable state, so g = 2/3.
    """
    z_test = np.array([[0.3, 0.7], [0.4, 0.6], [0.9, 0.1]])
    z_hat = np.array([[0.2, 0.8], [0.5, 0.5], [0.7, 0.3]])
    return z_test, z_hat


@pytest.fixture
def example1_disagreeing() -> tuple[np.ndarray, np.ndarray]:
    """Example 1 with the third observation flipped to (.1, .9): one agreement, one tie, one miss."""
    z_test = np.array([[0.3, 0.7], [0.4, 0.6], [0.1, 0.9]])
    z_hat = np.array([[0.2, 0.8], [0.5, 0.5], [0.7, 0.3]])
    return z_test, z_hat


@pytest.fixture
def example2() -> tuple[Cpt, Cpt]:
    """Two 4×3 CPTs whose columns share no mass."""
    effects = ("z1", "z2", "z3", "z4")
    causes = ("x1", "x2", "x3")
    c = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
    c_hat = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
    return Cpt(effects, causes, c), Cpt(effects, causes, c_hat)

