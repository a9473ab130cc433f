import os

import pytest


@pytest.fixture(autouse=True)
def clean_gbm_env(monkeypatch, tmp_path):
    """Tests never see GBM_* variables or a .env file from the developer's shell."""
    for key in list(os.environ):
        if key.upper().startswith("GBM_"):
            monkeypatch.delenv(key, raising=False)
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def unit_disk():
    from src.bodies import ball

    return ball(2, 1.0)


@pytest.fixture
def square():
    from src.bodies import box

    return box(1.0, 1.0)


@pytest.fixture
def small_budget():
    """Enough samples for loose statistical assertions, fast enough for every run."""
    from src.models.estimates import SamplingBudget

    return SamplingBudget(samples=200_000, seed=20240611)


@pytest.fixture
def body_file(tmp_path):
    """Write a body document and return its path."""
    from src.bodies.serialization import save_body

    def _write(body, name="body.json"):
        path = tmp_path / name
        save_body(body, path)
        return path

    return _write
