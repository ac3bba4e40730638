import os

os.environ["ENVIRONMENT"] = "testing"
os.environ.setdefault("PGC_PROGRESS_BARS", "False")

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from density import synth_dataset  # noqa: E402
from kernels import build_dictionary  # noqa: E402
from schemas import (  # noqa: E402
    DictionaryConfigSchema,
    NetworkConfigSchema,
    SceneConfigSchema,
)
from storages import LocalTensorStorage  # noqa: E402


def pytest_addoption(parser):
    parser.addoption(
        "--runslow",
        action="store_true",
        default=False,
        help="Run slow acceptance tests (benchmarks, multi-seed trends).",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def default_dictionary():
    return build_dictionary(DictionaryConfigSchema())


@pytest.fixture(scope="session")
def full_rank_dictionary():
    config = DictionaryConfigSchema()
    return build_dictionary(
        config.model_copy(update={"retained_count": config.grid_size})
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def scene_config():
    return SceneConfigSchema(height=32, width=32, count=8)


@pytest.fixture(scope="session")
def small_scenes(scene_config):
    return synth_dataset(4, scene_config, seed=7, threads=1)


@pytest.fixture(scope="session")
def small_network_config():
    return NetworkConfigSchema(backbone_channels=[4, 4], num_pgc_blocks=1)


@pytest.fixture
def storage(tmp_path):
    return LocalTensorStorage(tmp_path)
