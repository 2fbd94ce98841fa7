from pathlib import Path

import numpy as np
import pytest

from gradedkms.algebra import GradedAlgebra, supertrace_functional
from gradedkms.flow import ModularFlow
from gradedkms.scenarios import load_scenario
from gradedkms.utils import complex_gaussian, make_rng

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixture_path():
    def _path(name: str) -> Path:
        return FIXTURES / name

    return _path


@pytest.fixture
def worked_algebra():
    return GradedAlgebra.from_sectors(1, 1)


@pytest.fixture
def worked_rho():
    return np.diag([0.75, 0.25]).astype(complex)


@pytest.fixture
def worked_omega(worked_algebra, worked_rho):
    return supertrace_functional(worked_algebra, worked_rho)


@pytest.fixture
def worked_flow(worked_algebra, worked_rho):
    return ModularFlow.from_density(worked_rho, sectors=worked_algebra.signs)


@pytest.fixture
def worked_scenario():
    return load_scenario(FIXTURES / "worked_2x2.json")


@pytest.fixture
def unit():
    def _unit(n: int, i: int, j: int) -> np.ndarray:
        e = np.zeros((n, n), dtype=complex)
        e[i, j] = 1.0
        return e

    return _unit


@pytest.fixture
def random_elements():
    def _elements(n: int, count: int, seed: int = 0) -> list:
        rng = make_rng(seed, 7)
        return [complex_gaussian(rng, (n, n)) for _ in range(count)]

    return _elements


@pytest.fixture
def even_density():
    """
    A random even positive definite density for the grading ``signs``.
    """

    def _density(signs, seed: int = 0) -> np.ndarray:
        signs = np.asarray(signs)
        rng = make_rng(seed, 9)
        n = signs.size
        x = complex_gaussian(rng, (n, n))
        x = np.where(np.equal.outer(signs, signs), x, 0)
        rho = x @ x.conj().T + np.eye(n)
        return rho / np.trace(rho)

    return _density
