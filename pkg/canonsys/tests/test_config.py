import logging

import pytest
from pydantic import ValidationError

from canonsys.core.config import Settings
from canonsys.core.log_setup import configure_logging


def test_settings_defaults():
    s = Settings(_env_file=None)
    assert s.ode_tol == 1e-10
    assert s.disc_tol == 1e-8
    assert s.t_max == 1e6
    assert s.retry_attempts == 3


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("CANONSYS_DISC_TOL", "1e-6")
    monkeypatch.setenv("CANONSYS_MAX_CONCURRENCY", "8")
    s = Settings(_env_file=None)
    assert s.disc_tol == 1e-6
    assert s.max_concurrency == 8


def test_settings_reject_nonpositive_tolerance(monkeypatch):
    monkeypatch.setenv("CANONSYS_ODE_TOL", "0")
    with pytest.raises(ValidationError):
        Settings(_env_file=None)


def test_configure_logging_is_idempotent():
    configure_logging("debug")
    configure_logging("info")
    logger = logging.getLogger("canonsys")
    assert logger.level == logging.INFO
    assert sum(getattr(h, "_canonsys", False) for h in logger.handlers) == 1
