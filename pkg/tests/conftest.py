import numpy as np
import pytest

from shadowleaf.config import RunConfig, parse_config
from shadowleaf.dynamics import Perturbation
from shadowleaf.frame import HyperbolicMatrix
from shadowleaf.dynamics import PerturbedLift
from shadowleaf.verify import build_context


@pytest.fixture(scope="session")
def cat():
    return HyperbolicMatrix(2, 1, 1, 1)


@pytest.fixture(scope="session")
def ctx():
    return build_context(RunConfig())


@pytest.fixture(scope="session")
def zero_ctx():
    return build_context(parse_config({"perturbation": []}))


@pytest.fixture(scope="session")
def linear_lift(cat):
    return PerturbedLift(cat, Perturbation(()))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
