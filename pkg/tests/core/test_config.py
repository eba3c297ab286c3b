"""Tests for configuration loading."""

import pytest
from pydantic import ValidationError as PydanticValidationError

from cptgen.core.config import AppConfig, load_app_config
from cptgen.core.errors import IoError, ParseError


class TestDefaults:
    """Built-in defaults."""

    def test_default_values(self):
        """Defaults match the documented tolerances and iteration limits."""
        config = load_app_config()
        assert config.validation.tolerance == 1e-6
        assert config.validation.cpt_tolerance == 1e-9
        assert config.regression.ridge == 0.0
        assert config.regression.requested_ridge == 1e-8
        assert config.em.epsilon == 1e-6
        assert config.em.max_iterations == 1000
        assert config.em.restarts == 1
        assert config.logit.reg == 1e-8
        assert config.logit.max_iter == 100
        assert config.logit.tol == 1e-8
        assert config.logging.level == "WARNING"
        assert config.logging.json_output is False


class TestYamlOverlay:
    """YAML files override any subset of the defaults."""

    def test_partial_override(self, tmp_path):
        """Only the given keys change."""
        path = tmp_path / "cptgen.yaml"
        path.write_text("em:\n  epsilon: 1.0e-9\n  restarts: 4\nlogging:\n  level: DEBUG\n")
        config = load_app_config(path)
        assert config.em.epsilon == 1e-9
        assert config.em.restarts == 4
        assert config.em.max_iterations == 1000
        assert config.logging.level == "DEBUG"

    def test_empty_file_gives_defaults(self, tmp_path):
        """An empty YAML document is an empty overlay."""
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert load_app_config(path) == AppConfig()

    def test_unknown_key_rejected(self, tmp_path):
        """Typos in section keys are reported instead of ignored."""
        path = tmp_path / "typo.yaml"
        path.write_text("em:\n  epsilom: 0.1\n")
        with pytest.raises(PydanticValidationError):
            load_app_config(path)

    def test_out_of_range_value_rejected(self, tmp_path):
        """Non-positive tolerances are invalid."""
        path = tmp_path / "bad.yaml"
        path.write_text("validation:\n  tolerance: 0\n")
        with pytest.raises(PydanticValidationError):
            load_app_config(path)

    def test_missing_file(self, tmp_path):
        """A missing config file is an I/O error naming the path."""
        path = tmp_path / "missing.yaml"
        with pytest.raises(IoError, match="missing.yaml"):
            load_app_config(path)

    def test_non_mapping_root(self, tmp_path):
        """The document root must be a mapping."""
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ParseError):
            load_app_config(path)

    def test_invalid_yaml(self, tmp_path):
        """Broken YAML is a parse error."""
        path = tmp_path / "broken.yaml"
        path.write_text("em: [unclosed\n")
        with pytest.raises(ParseError):
            load_app_config(path)
