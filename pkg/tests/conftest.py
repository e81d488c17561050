import pytest

from polyrew import Signature, load_preset
from polyrew.terms import RESOURCE_OPS

MONOID_OPS = (("mu", 2, 1), ("eta", 0, 1))


@pytest.fixture(scope="session")
def term_sig():
    """Signature of the monoid term language: one binary, one constant."""
    return Signature(MONOID_OPS)


@pytest.fixture(scope="session")
def circuit_sig():
    """Term operators plus the wire-management trio."""
    return Signature(RESOURCE_OPS + MONOID_OPS)


@pytest.fixture(scope="session")
def rds():
    return load_preset("rds")


@pytest.fixture(scope="session")
def lz2():
    return load_preset("lz2")


@pytest.fixture(scope="session")
def r0():
    return load_preset("r0")


@pytest.fixture(scope="session")
def r1():
    return load_preset("r1")


@pytest.fixture(scope="session")
def r2():
    return load_preset("r2")
