from pathlib import Path

import pytest

from app.services.command_service import GroupContext
from app.services.graph import RelativeMetric
from app.storage.file_handler import load_group

GROUPS_DIR = Path(__file__).resolve().parent.parent / "groups"


def load_context(name: str, radius: int | None = None) -> GroupContext:
    pres, oracle = load_group(GROUPS_DIR / f"{name}.json")
    return GroupContext(name, pres, oracle, RelativeMetric(pres, oracle, radius=radius))


@pytest.fixture
def groups_dir() -> Path:
    return GROUPS_DIR


@pytest.fixture
def zz() -> GroupContext:
    return load_context("zz")


@pytest.fixture
def bs12() -> GroupContext:
    return load_context("bs12")


@pytest.fixture
def f2() -> GroupContext:
    return load_context("f2")


@pytest.fixture
def f2relx() -> GroupContext:
    return load_context("f2relx")


@pytest.fixture
def fp23() -> GroupContext:
    return load_context("fp23")


@pytest.fixture
def baseline_dir(tmp_path, monkeypatch):
    from app.core.config import settings

    directory = tmp_path / "baselines"
    monkeypatch.setattr(settings, "BASELINE_DIR", str(directory))
    return directory
