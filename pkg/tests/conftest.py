import logging

import numpy as np
import pytest

from sipdg.config.config import AppArgs, AppConfig, AppContext
from sipdg.models.domain.dgspace import build_space
from sipdg.models.domain.mesh import build_lshape_mesh, build_square_mesh, mesh_from_arrays
from sipdg.services.experiment_service import ExperimentService
from sipdg.services.response_formatting_service import ResponseFormattingService


@pytest.fixture
def two_triangle_square():
    """Unit square split along the (0,0)-(1,1) diagonal."""
    return build_square_mesh(1)


@pytest.fixture
def square_mesh():
    return build_square_mesh(2)


@pytest.fixture
def square_mesh_4():
    return build_square_mesh(4)


@pytest.fixture
def lshape_mesh():
    return build_lshape_mesh(2)


@pytest.fixture
def single_triangle():
    """The reference triangle as a one-element mesh."""
    return mesh_from_arrays([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 2]])


@pytest.fixture
def p1_square(square_mesh):
    return build_space(square_mesh, 1)


@pytest.fixture
def p2_square(square_mesh):
    return build_space(square_mesh, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


@pytest.fixture
def app_config():
    return AppConfig()


@pytest.fixture
def app_args():
    return AppArgs(command="wmp", domain="square", n=4, degree=1)


@pytest.fixture
def app_context(app_config, app_args):
    return AppContext(app_config, app_args)


@pytest.fixture
def experiment_service(app_config):
    return ExperimentService(app_config)


@pytest.fixture
def formatter():
    return ResponseFormattingService()


@pytest.fixture(autouse=True)
def reset_package_logger():
    """Drop handlers installed by configure_logging so no test writes into a closed capture stream."""
    yield
    logger = logging.getLogger("sipdg")
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)
        handler.close()
    logger.addHandler(logging.NullHandler())
    logger.setLevel(logging.NOTSET)
    logger.propagate = True
