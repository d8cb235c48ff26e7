from __future__ import annotations

import random

import pytest
from hypothesis import settings

from pyphitau.coeffs import GaloisRing, PadicField, PrimeConfig

settings.register_profile("pyphitau", max_examples=40, deadline=None)
settings.load_profile("pyphitau")


@pytest.fixture
def cfg():
    return PrimeConfig()


@pytest.fixture
def Zr(cfg):
    return GaloisRing(cfg)


@pytest.fixture
def Qp(cfg):
    return PadicField(cfg)


@pytest.fixture
def rng():
    return random.Random(20240611)
