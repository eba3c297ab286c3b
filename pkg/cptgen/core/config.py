"""Consolidated configuration for cptgen."""

from pathlib import Path

import yaml
from pydantic import BaseModel, ConfigDict, Field

from cptgen.core.errors import IoError, ParseError


class ValidationSettings(BaseModel):
    """Tolerances used when validating probability input."""

    model_config = ConfigDict(extra="forbid")

    # Elicited data carries rounding noise; sums within this band are renormalized
    tolerance: float = Field(default=1e-6, gt=0)
    cpt_tolerance: float = Field(default=1e-9, gt=0, lt=1)  # CPT column sums


class RegressionSettings(BaseModel):
    """Least-squares CPT basis settings."""

    model_config = ConfigDict(extra="forbid")

    ridge: float = Field(default=0.0, ge=0)
    requested_ridge: float = Field(default=1e-8, gt=0)  # used by a bare --ridge flag


class EmSettings(BaseModel):
    """Expectation-maximization settings."""

    model_config = ConfigDict(extra="forbid")

    epsilon: float = Field(default=1e-6, gt=0)
    max_iterations: int = Field(default=1000, ge=1)
    restarts: int = Field(default=1, ge=1)


class LogitSettings(BaseModel):
    """Multinomial logit fitting settings."""

    model_config = ConfigDict(extra="forbid")

    reg: float = Field(default=1e-8, ge=0)
    max_iter: int = Field(default=100, ge=1)
    tol: float = Field(default=1e-8, gt=0)
    max_halvings: int = Field(default=30, ge=0)


class LoggingSettings(BaseModel):
    """Diagnostics output on standard error."""

    model_config = ConfigDict(extra="forbid")

    level: str = Field(default="WARNING", pattern="^(DEBUG|INFO|WARNING|ERROR)$")
    json_output: bool = False


class AppConfig(BaseModel):
    """Consolidated application configuration."""

    model_config = ConfigDict(extra="forbid")

    validation: ValidationSettings = Field(default_factory=ValidationSettings)
    regression: RegressionSettings = Field(default_factory=RegressionSettings)
    em: EmSettings = Field(default_factory=EmSettings)
    logit: LogitSettings = Field(default_factory=LogitSettings)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)


def load_app_config(path: str | Path | None = None) -> AppConfig:
    """Load configuration defaults, optionally overlaid with a YAML file.

    Args:
        path: YAML file with any subset of the ``AppConfig`` sections.

    Raises:
        IoError: If the file cannot be read.
        ParseError: If the file is not valid YAML or not a mapping.
        pydantic.ValidationError: If a value is out of range or a key is unknown.
    """
    if path is None:
        return AppConfig()

    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise IoError(f"cannot read config: {e.strerror}", path=str(path)) from e
    except yaml.YAMLError as e:
        raise ParseError(f"invalid YAML: {e}", path=str(path)) from e

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ParseError("config root must be a mapping", path=str(path))

    return AppConfig.model_validate(data)
