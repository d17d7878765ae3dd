from pathlib import Path

import pytest

from artifact.forms import FormSystem, shift
from artifact.field import FieldDescriptor
from artifact.poly import Poly

INSTANCES = Path(__file__).resolve().parent.parent / "instances"


def load(name: str) -> FormSystem:
    return FormSystem.from_json((INSTANCES / f"{name}.json").read_text())


@pytest.fixture(scope="session")
def quadric3():
    return load("quadric3")


@pytest.fixture(scope="session")
def quadric5():
    return load("quadric5")


@pytest.fixture(scope="session")
def conic3():
    return load("conic3")


@pytest.fixture(scope="session")
def F3():
    return FieldDescriptor(3)


def T(fd, *c):
    """Polynomial from ascending coefficients."""
    return Poly(fd, tuple(c))


def conic_twisted(conic):
    return shift(conic, T(conic.fd, 0, 1), ("1", "1", "1"))
