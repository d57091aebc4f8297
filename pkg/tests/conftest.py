from __future__ import annotations

from typing import Callable

import pytest

from qubo_approx.config import get_settings


@pytest.fixture(autouse=True)
def _fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def settings_env(monkeypatch) -> Callable[..., None]:
    """Override QUBO_* variables for one test: ``settings_env(QUBO_RUNS="7")``."""

    def _set(**values: str) -> None:
        for key, value in values.items():
            monkeypatch.setenv(key, value)
        get_settings.cache_clear()

    return _set
