"""Shared fixtures and hypothesis settings for the suite."""

import random

import pytest
from hypothesis import HealthCheck, settings

from starforge import PhaseContext

settings.register_profile(
    "starforge",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("starforge")


@pytest.fixture
def ctx():
    return PhaseContext(1)


@pytest.fixture
def ctx2():
    return PhaseContext(2)


@pytest.fixture
def rng():
    # one seed for the whole suite keeps the random corpora reproducible
    return random.Random(20260822)
