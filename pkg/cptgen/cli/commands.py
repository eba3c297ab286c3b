"""Batch commands behind the ``cptgen`` executable.

Each ``cmd_*`` function takes a validated ``RunConfig`` plus the loaded
``AppConfig``, prints its results to standard output and returns the exit
code. Errors propagate as ``CptError`` and are mapped to exit codes by the
entry point.
"""

import time
from functools import partial
from pathlib import Path
from typing import Literal

import structlog
from pydantic import BaseModel, ConfigDict, model_validator

from cptgen.core.config import AppConfig
from cptgen.core.errors import DimensionError, ValidationError
from cptgen.core.metrics import metrics
from cptgen.generation.counting import EmConfig, EmInit, em_cpt, mle_cpt
from cptgen.generation.extraction import extract_cpt
from cptgen.generation.logit import fit_multinomial_logit, logit_predict
from cptgen.generation.observations import ObservationSet, distinct_cause_rows
from cptgen.generation.regression import cpt_basis_least_squares
from cptgen.generation.repair import RepairMethod, repair_basis
from cptgen.io.cpt_files import load_cpt, load_weights, save_cpt
from cptgen.io.observations import dedup, load_observations, load_schema_file, save_observations
from cptgen.io.reports import format_percent, write_report
from cptgen.metrics.report import evaluate_against_reference, evaluate_cpt
from cptgen.metrics.tables import cpt_euclidean, cpt_kl_divergence, cpt_shift_error
from cptgen.probability.evidence import Evidence, effects_from_evidence
from cptgen.probability.tables import Cpt, predict_causes
from cptgen.probability.vectors import NodeSpec, ProbVector, combine, make_prob_vector, split_combined

logger = structlog.get_logger("cptgen")

Command = Literal["generate", "evaluate", "compare", "infer", "dedup"]
Method = Literal["mle", "em", "regress-limit", "regress-surge", "logit"]

REQUESTED_RIDGE = "requested"

_REQUIRED_PATHS: dict[str, tuple[str, ...]] = {
    "generate": ("train", "out"),
    "evaluate": ("cpt", "test"),
    "compare": ("cpt", "cpt_b"),
    "infer": ("cpt",),
    "dedup": ("train", "out"),
}


class RunConfig(BaseModel):
    """One validated command line invocation."""

    model_config = ConfigDict(extra="forbid")

    command: Command
    method: Method | None = None

    train: Path | None = None
    test: Path | None = None
    cpt: Path | None = None
    cpt_b: Path | None = None
    out: Path | None = None
    weights: Path | None = None
    schema_file: Path | None = None
    config: Path | None = None
    metrics_file: Path | None = None

    tolerance: float | None = None
    epsilon: float | None = None
    max_iter: int | None = None
    ridge: float | Literal["requested"] | None = None
    reg: float | None = None
    seed: int | None = None
    restarts: int | None = None

    distinct: bool = False
    impute_uniform: bool = False
    plot_data: bool = False
    rounding: bool = False

    evidence: list[str] = []
    diagnose: str | None = None

    log_level: str | None = None
    json_logs: bool = False

    @model_validator(mode="after")
    def check_command(self) -> "RunConfig":
        if self.command == "generate" and self.method is None:
            raise ValueError("generate requires --method")
        if self.command != "generate" and self.method is not None:
            raise ValueError("--method only applies to generate")
        missing = [name for name in _REQUIRED_PATHS[self.command] if getattr(self, name) is None]
        if missing:
            flags = ", ".join("--" + name.replace("_", "-") for name in missing)
            raise ValueError(f"{self.command} requires {flags}")
        if self.command == "infer" and not self.evidence:
            raise ValueError("infer requires --evidence for every parent")
        if self.plot_data and self.out is None:
            raise ValueError("--plot-data requires --out")
        for name in ("tolerance", "epsilon"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"--{name} must be positive")
        if self.reg is not None and self.reg < 0:
            raise ValueError("--reg must be non-negative")
        if isinstance(self.ridge, float) and self.ridge < 0:
            raise ValueError("--ridge must be non-negative")
        for name in ("max_iter", "restarts"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"--{name.replace('_', '-')} must be at least 1")
        return self

    def settings_with_overrides(self, app: AppConfig) -> AppConfig:
        """``app`` with every numeric flag given on the command line applied."""
        updates = {
            "validation": {"tolerance": self.tolerance},
            "em": {"epsilon": self.epsilon, "max_iterations": self.max_iter, "restarts": self.restarts},
            "logit": {"reg": self.reg, "max_iter": self.max_iter},
            "logging": {"level": self.log_level.upper() if self.log_level else None, "json_output": self.json_logs or None},
        }
        data = app.model_dump()
        for section, values in updates.items():
            data[section].update({k: v for k, v in values.items() if v is not None})
        if self.ridge == REQUESTED_RIDGE:
            data["regression"]["ridge"] = app.regression.requested_ridge
        elif self.ridge is not None:
            data["regression"]["ridge"] = self.ridge
        return AppConfig.model_validate(data)


def _load_training(config: RunConfig, app: AppConfig, path: Path) -> ObservationSet:
    schema = load_schema_file(config.schema_file) if config.schema_file else None
    return load_observations(path, schema, app.validation.tolerance)


def _labels(cpt: Cpt, columns: tuple[int, ...]) -> str:
    return ";".join(cpt.cause_labels[j] for j in columns) or "none"


def _print_pairs(pairs: list[tuple[str, object]]) -> None:
    for key, value in pairs:
        print(f"{key},{value}")


def cmd_generate(config: RunConfig, app: AppConfig) -> int:
    """Generate a CPT from training observations and write it to ``--out``."""
    assert config.train is not None and config.out is not None and config.method is not None
    observations = _load_training(config, app, config.train)
    if config.distinct:
        observations = dedup(observations)

    log = logger.bind(method=config.method, rows=observations.row_count)
    log.info("Generating CPT")
    started = time.perf_counter()
    summary: list[tuple[str, object]] = []

    if config.method == "mle":
        mle = mle_cpt(observations, rounding=config.rounding)
        cpt = mle.cpt
        summary += [
            ("rows_dropped", mle.rows_dropped),
            ("unobserved_columns", _labels(cpt, mle.unobserved_columns)),
        ]
    elif config.method == "em":
        em_config = EmConfig(
            epsilon=app.em.epsilon,
            max_iterations=app.em.max_iterations,
            init=EmInit.UNIFORM if config.seed is None else EmInit.RANDOM,
            seed=config.seed or 0,
            restarts=app.em.restarts,
        )
        em = em_cpt(observations, em_config)
        cpt = em.cpt
        summary += [("iterations", em.iterations), ("final_loglik", repr(em.final_loglik))]
    elif config.method == "logit":
        model = fit_multinomial_logit(
            observations,
            reg=app.logit.reg,
            max_iter=app.logit.max_iter,
            tol=app.logit.tol,
            max_halvings=app.logit.max_halvings,
        )
        cpt = extract_cpt(
            partial(logit_predict, model),
            len(observations.cause_labels),
            observations.effect.labels,
            parents=observations.parents,
            effect_name=observations.effect.name,
        )
        summary += [("iterations", model.iterations), ("gradient_norm", f"{model.gradient_norm:.3g}")]
    else:
        repair_method = (
            RepairMethod.BOUNDARY_LIMITATION if config.method == "regress-limit" else RepairMethod.POTENTIAL_SURGE
        )
        basis = cpt_basis_least_squares(observations, ridge=app.regression.ridge)
        repaired = repair_basis(basis, repair_method)
        cpt = repaired.cpt
        summary += [
            ("repaired_columns", _labels(cpt, repaired.repaired_columns)),
            ("surge_fallback_columns", _labels(cpt, repaired.surge_fallback_columns)),
            ("uniform_columns", _labels(cpt, repaired.uniform_columns)),
            ("max_change", format_percent(repaired.max_change)),
            ("column_sum_error", format_percent(repaired.column_sum_error)),
        ]

    duration = time.perf_counter() - started
    metrics.record_generated(config.method, duration)
    save_cpt(cpt, config.out)
    log.info("CPT generated", duration_seconds=round(duration, 6), out=str(config.out))

    _print_pairs(
        [
            ("method", config.method),
            ("rows", observations.row_count),
            ("distinct_causes", distinct_cause_rows(observations)),
            *summary,
        ]
    )
    return 0


def cmd_evaluate(config: RunConfig, app: AppConfig) -> int:
    """Score a CPT on test observations, optionally judged by a reference CPT."""
    assert config.cpt is not None and config.test is not None
    cpt = load_cpt(config.cpt, app.validation.cpt_tolerance)
    test = _load_training(config, app, config.test)
    if config.cpt_b is not None:
        reference = load_cpt(config.cpt_b, app.validation.cpt_tolerance)
        report = evaluate_against_reference(cpt, reference, test)
    else:
        report = evaluate_cpt(cpt, test)
    if config.out is not None:
        write_report(report, config.out, plot_data=config.plot_data)

    _print_pairs(
        [
            ("diagnostic_goodness", format_percent(report.diagnostic_goodness)),
            ("total_average_shift_error", format_percent(report.total_average_shift_error)),
        ]
    )
    return 0


def cmd_compare(config: RunConfig, app: AppConfig) -> int:
    """Print shift error, KL divergence and Euclidean distance between two CPTs."""
    assert config.cpt is not None and config.cpt_b is not None
    c = load_cpt(config.cpt, app.validation.cpt_tolerance)
    c_hat = load_cpt(config.cpt_b, app.validation.cpt_tolerance)
    if c.shape != c_hat.shape:
        raise DimensionError(f"CPT shapes {c.shape} and {c_hat.shape} differ")
    if config.weights is not None:
        x = load_weights(config.weights, c.cause_labels, app.validation.tolerance)
    else:
        x = ProbVector.uniform(c.cause_labels)

    _print_pairs(
        [
            ("shift", format_percent(cpt_shift_error(c, c_hat))),
            ("kl", f"{cpt_kl_divergence(c, c_hat, x):.6g}"),
            ("euclidean", f"{cpt_euclidean(c, c_hat, x):.6g}"),
        ]
    )
    return 0


def _parse_assignment(text: str, flag: str) -> tuple[str, str]:
    name, sep, value = text.partition("=")
    if not sep or not name or not value:
        raise ValidationError(f"{flag} expects NODE=state or NODE=p1,p2,..., got {text!r}")
    return name.strip(), value.strip()


def _soft_vector(node: NodeSpec, value: str, tolerance: float) -> ProbVector:
    try:
        values = [float(v) for v in value.split(",")]
    except ValueError:
        raise ValidationError(f"bad probability list {value!r}", node=node.name) from None
    if len(values) != node.arity:
        raise DimensionError(f"{len(values)} probabilities for {node.arity} states", node=node.name)
    return make_prob_vector(node.labels, values, tolerance, node=node.name)


def parse_evidence(items: list[str], parents: tuple[NodeSpec, ...], tolerance: float) -> list[Evidence]:
    """``NODE=state`` gives hard evidence, ``NODE=p1,p2,...`` soft evidence."""
    index = {p.name: k for k, p in enumerate(parents)}
    evidence = []
    for item in items:
        name, value = _parse_assignment(item, "--evidence")
        if name not in index:
            raise ValidationError(f"unknown parent, expected one of {list(index)}", node=name)
        node = parents[index[name]]
        if "," in value or (node.arity == 1 and value not in node.labels):
            evidence.append(Evidence.soft_vector(index[name], _soft_vector(node, value, tolerance)))
        else:
            evidence.append(Evidence.hard(index[name], node.state_index(value)))
    return evidence


def cmd_infer(config: RunConfig, app: AppConfig) -> int:
    """Print effect probabilities for parent evidence, or with ``--diagnose``
    the posterior of every parent given an observed effect distribution."""
    assert config.cpt is not None
    cpt = load_cpt(config.cpt, app.validation.cpt_tolerance)
    parents = cpt.parent_specs()
    tolerance = app.validation.tolerance
    evidence = parse_evidence(config.evidence, parents, tolerance)
    effects = effects_from_evidence(cpt, evidence)

    if config.diagnose is None:
        print(",".join(format_percent(v) for v in effects.values))
        return 0

    name, value = _parse_assignment(config.diagnose, "--diagnose")
    if name != cpt.effect_name:
        raise ValidationError(f"--diagnose names the effect node {cpt.effect_name}", node=name)
    observed = _soft_vector(cpt.effect, value, tolerance) if "," in value else ProbVector.hard(
        cpt.effect_labels, cpt.effect.state_index(value)
    )
    by_node = {e.node: e for e in evidence}
    prior = combine([by_node[k].as_vector(p.labels) for k, p in enumerate(parents)])
    posterior = predict_causes(cpt, prior, observed, impute_uniform=config.impute_uniform)
    assert cpt.arities is not None
    marginals = split_combined(posterior, cpt.arities, [p.labels for p in parents])
    for parent, marginal in zip(parents, marginals, strict=True):
        print(",".join([parent.name, *(format_percent(v) for v in marginal.values)]))
    return 0


def cmd_dedup(config: RunConfig, app: AppConfig) -> int:
    """Write the training file without exact duplicate rows."""
    assert config.train is not None and config.out is not None
    observations = _load_training(config, app, config.train)
    distinct = dedup(observations)
    save_observations(distinct, config.out)
    _print_pairs([("rows", observations.row_count), ("distinct", distinct.row_count)])
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "infer": cmd_infer,
    "dedup": cmd_dedup,
}


def run(config: RunConfig, app: AppConfig) -> int:
    """Dispatch ``config.command`` and write the metrics file if requested."""
    try:
        return COMMANDS[config.command](config, app)
    finally:
        if config.metrics_file is not None:
            metrics.write_textfile(config.metrics_file)
