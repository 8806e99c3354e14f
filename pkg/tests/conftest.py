from __future__ import annotations

from typing import TYPE_CHECKING

import pytest

from stochsum.sequences import example1_family, example2, family_from_spec
from stochsum.summability import cesaro, identity_matrix

if TYPE_CHECKING:
    from pytest_django.fixtures import SettingsWrapper


@pytest.fixture(autouse=True)
def test_settings(settings: SettingsWrapper, tmp_path) -> SettingsWrapper:
    settings.STOCHSUM_OUTPUT_DIR = tmp_path / "reports"

    return settings


@pytest.fixture
def no_propagate(settings: SettingsWrapper) -> SettingsWrapper:
    settings.STOCHSUM_PROPAGATE_EXCEPTIONS = False

    return settings


@pytest.fixture
def threaded(settings: SettingsWrapper) -> SettingsWrapper:
    settings.STOCHSUM_WORKERS = 4

    return settings


@pytest.fixture
def cesaro_matrix():
    return cesaro()


@pytest.fixture
def identity():
    return identity_matrix()


@pytest.fixture
def example1_seq():
    return example1_family()


@pytest.fixture
def example2_quarter():
    return example2("1/4")


@pytest.fixture
def harmonic_as():
    return family_from_spec({"family": "synthetic_as", "decay_power": 1})
