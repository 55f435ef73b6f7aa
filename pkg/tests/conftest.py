import logging

import numpy as np
import pytest

from core.generator import builtin_generator
from core.rng import substream
from utils.logger import LOGGER_NAME


@pytest.fixture
def uniform3():
    return builtin_generator("uniform", 3)


@pytest.fixture
def model2():
    return builtin_generator("model2")


@pytest.fixture
def study4():
    return builtin_generator("study4")


@pytest.fixture
def rng(request):
    """Per-test stream keyed by the test name."""
    return substream(1234, request.node.name)


@pytest.fixture(autouse=True)
def _reset_logger():
    yield

    logger = logging.getLogger(LOGGER_NAME)
    for h in list(logger.handlers):
        h.close()
        logger.removeHandler(h)


def midpoint_states(paths):
    return np.array([int(p.state_at(0.5 * p.horizon)) for p in paths])
