import pytest

from dppsi import RandomSource, Ristretto255Group, TinyGroup


@pytest.fixture(scope="session")
def tiny():
    return TinyGroup()


@pytest.fixture(scope="session")
def ristretto():
    return Ristretto255Group()


@pytest.fixture
def rng():
    return RandomSource.seeded(20240817)
