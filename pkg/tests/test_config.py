"""Tests for settings loading, provenance hashing and logging setup."""

import logging

import pytest
from pydantic import ValidationError

from src.config import Settings, config_hash, get_settings, load_settings, use_settings
from src.logging_config import ProvenanceFilter, setup_logging


class TestLoadSettings:
    """Tests for YAML settings."""

    def test_packaged_defaults(self):
        """Should load the packaged configuration."""
        settings = load_settings()
        assert settings.verify.n == 128
        assert settings.solver.normal.laurent_terms == 200

    def test_partial_file_keeps_defaults(self, tmp_path):
        """Should fill unspecified keys with defaults."""
        path = tmp_path / "q.yaml"
        path.write_text("verify:\n  n: 64\n")
        settings = load_settings(str(path))
        assert settings.verify.n == 64
        assert settings.verify.seed == Settings().verify.seed

    def test_empty_file(self, tmp_path):
        """Should treat an empty file as all defaults."""
        path = tmp_path / "q.yaml"
        path.write_text("")
        assert load_settings(str(path)) == Settings()

    def test_environment_variable(self, tmp_path, monkeypatch):
        """Should read the path from QUASIBEL_CONFIG."""
        path = tmp_path / "q.yaml"
        path.write_text("solver:\n  max_iter: 7\n")
        monkeypatch.setenv("QUASIBEL_CONFIG", str(path))
        assert load_settings().solver.max_iter == 7

    def test_missing_explicit_file(self, tmp_path):
        """Should raise FileNotFoundError for a named file that does not exist."""
        with pytest.raises(FileNotFoundError):
            load_settings(str(tmp_path / "absent.yaml"))

    def test_invalid_values(self, tmp_path):
        """Should raise ValidationError for mistyped values."""
        path = tmp_path / "q.yaml"
        path.write_text("verify:\n  n: many\n")
        with pytest.raises(ValidationError):
            load_settings(str(path))


class TestActiveSettings:
    """Tests for process-wide settings and provenance."""

    def test_use_settings_installs_and_restores(self):
        """Should return installed settings until reset."""
        custom = Settings().model_copy(update={"verify": Settings().verify.model_copy(update={"n": 32})})
        try:
            use_settings(custom)
            assert get_settings().verify.n == 32
        finally:
            use_settings(None)
        assert get_settings().verify.n == load_settings().verify.n

    def test_hash_is_stable_and_sensitive(self):
        """Should hash equal settings equally and changed settings differently."""
        base = Settings()
        changed = base.model_copy(update={"solver": base.solver.model_copy(update={"series_tol": 1e-8})})
        assert config_hash(base) == config_hash(Settings())
        assert config_hash(base) != config_hash(changed)
        assert len(config_hash(base)) == 64


class TestLogging:
    """Tests for logging setup."""

    def test_provenance_filter_stamps_records(self):
        """Should attach version and config hash to records."""
        record = logging.LogRecord("quasibel", logging.INFO, __file__, 1, "message", None, None)
        assert ProvenanceFilter("abc123").filter(record)
        assert record.config_hash == "abc123"
        assert record.version

    def test_setup_sets_level(self):
        """Should apply the requested level to the root logger."""
        setup_logging(level="WARNING", config_hash="abc")
        assert logging.getLogger().level == logging.WARNING
        setup_logging(level="INFO")
        assert logging.getLogger().level == logging.INFO
